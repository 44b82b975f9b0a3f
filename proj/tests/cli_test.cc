#include <gtest/gtest.h>

#include <sstream>

#include "mice/cli/commands.h"
#include "mice/cli/config.h"
#include "test_util.h"

namespace mice::cli {
namespace {

using mice::testing::ReadText;
using mice::testing::TempDir;
using mice::testing::WriteText;

int RunCli(std::vector<std::string> args) {
  args.insert(args.begin(), "mice");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return Main(static_cast<int>(argv.size()), argv.data());
}

TEST(ConfigTest, ParsesAssignmentsAndComments) {
  std::istringstream in(
      "# comment\nseed = 4\n\n  epochs=3  \nsystems = majority,svm\nout = runs/#1\n");
  const Config c = Config::Parse(in);
  EXPECT_EQ(c.Get("seed"), "4");
  EXPECT_EQ(c.Get("epochs"), "3");
  EXPECT_EQ(c.Get("out"), "runs/#1");  // only whole-line comments
  EXPECT_FALSE(c.Get("hidden").has_value());
  const ExperimentConfig e = Resolve(c);
  EXPECT_EQ(e.seed, 4u);
  EXPECT_EQ(e.split_seed, 4u);
  EXPECT_EQ(e.train.epochs, 3);
  EXPECT_EQ(e.systems, (std::vector<std::string>{"majority", "svm"}));
}

TEST(ConfigTest, RejectsMalformedInput) {
  std::istringstream no_equals("seed 4\n");
  EXPECT_THROW(Config::Parse(no_equals), FormatError);
  Config c;
  EXPECT_THROW(Resolve(c), std::invalid_argument);  // no seed
  c.Set("seed", "1");
  c.Set("colour", "blue");
  EXPECT_THROW(Resolve(c), std::invalid_argument);
  Config d;
  d.Set("seed", "x");
  EXPECT_THROW(Resolve(d), std::invalid_argument);
  EXPECT_THROW(d.SetAssignment("novalue"), std::invalid_argument);
}

TEST(ConfigTest, RatiosAcceptPercentages) {
  Config c;
  c.Set("seed", "1");
  c.Set("ratios", "63:30:7");
  const auto r = Resolve(c).ratios;
  EXPECT_DOUBLE_EQ(r[0], 0.63);
  EXPECT_DOUBLE_EQ(r[1], 0.30);
  EXPECT_DOUBLE_EQ(r[2], 0.07);
}

TEST(ConfigTest, RenderResolveRoundTrip) {
  Config c;
  c.Set("seed", "9");
  c.Set("hidden", "12");
  c.Set("task", "token");
  c.Set("clip_norm", "5");
  const ExperimentConfig e = Resolve(c);
  std::istringstream rendered(Render(e));
  EXPECT_EQ(Render(Resolve(Config::Parse(rendered))), Render(e));
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ASSERT_EQ(RunCli({"synth", "--seed", "3", "--out", (dir_.path() / "data").string(), "--set",
                   "synth_sentences=120", "--set", "synth_expressions=6", "--set",
                   "synth_dim=4"}),
              0);
  }
  std::string Path(const std::string& name) const { return (dir_.path() / name).string(); }
  std::vector<std::string> Data() const {
    return {"--corpus", Path("data/corpus.tsv"), "--archive", Path("data/archive.emb")};
  }
  std::vector<std::string> Cmd(std::vector<std::string> head) const {
    for (auto& a : Data()) head.push_back(a);
    return head;
  }
  TempDir dir_;
};

TEST_F(CliTest, TrainIsBitwiseDeterministic) {
  for (const char* out : {"a", "b"}) {
    ASSERT_EQ(RunCli(Cmd({"train", "--seed", "7", "--out", Path(out), "--set", "epochs=2", "--set",
                       "hidden=3"})),
              0);
  }
  const std::string a = ReadText(Path("a/model.ckpt"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, ReadText(Path("b/model.ckpt")));
  EXPECT_EQ(ReadText(Path("a/loss.tsv")), ReadText(Path("b/loss.tsv")));
  ASSERT_EQ(RunCli(Cmd({"train", "--seed", "8", "--out", Path("c"), "--set", "epochs=2", "--set",
                     "hidden=3"})),
            0);
  EXPECT_NE(a, ReadText(Path("c/model.ckpt")));
}

TEST_F(CliTest, ZeroEpochsStillWritesCheckpoint) {
  ASSERT_EQ(RunCli(Cmd({"train", "--seed", "1", "--out", Path("z"), "--set", "epochs=0", "--set",
                     "hidden=2"})),
            0);
  EXPECT_TRUE(std::filesystem::exists(Path("z/model.ckpt")));
}

TEST_F(CliTest, MissingSeedFails) {
  EXPECT_NE(RunCli(Cmd({"train", "--out", Path("x")})), 0);
  EXPECT_NE(RunCli(Cmd({"train", "--seed", "1", "--out", Path("x"), "--set", "bogus=1"})), 0);
  EXPECT_NE(RunCli({"train", "--seed", "1", "--out", Path("x"), "--corpus", Path("missing.tsv")}),
            0);
}

TEST_F(CliTest, ResolvedConfigIsEchoed) {
  WriteText(Path("run.conf"), "seed = 5\nhidden = 2\nepochs = 1\n");
  ASSERT_EQ(RunCli(Cmd({"train", "--config", Path("run.conf"), "--out", Path("r"), "--set",
                     "dropout=0.25"})),
            0);
  const std::string echoed = ReadText(Path("r/config.resolved"));
  EXPECT_NE(echoed.find("# command: train"), std::string::npos);
  EXPECT_NE(echoed.find("seed = 5\n"), std::string::npos);
  EXPECT_NE(echoed.find("dropout = 0.25\n"), std::string::npos);
}

TEST_F(CliTest, EvalEnsembleAndExport) {
  for (const char* seed : {"1", "2"}) {
    ASSERT_EQ(RunCli(Cmd({"train", "--seed", seed, "--out", Path(std::string("m") + seed), "--set",
                       "epochs=1", "--set", "hidden=2", "--set", "split_seed=0"})),
              0);
  }
  ASSERT_EQ(RunCli(Cmd({"eval", Path("m1/model.ckpt"), "--seed", "0", "--out", Path("e"),
                     "--format", "json"})),
            0);
  EXPECT_TRUE(std::filesystem::exists(Path("e/report.json")));
  ASSERT_EQ(RunCli({"export-report", "--input", Path("e/report.json"), "--seed", "0", "--out",
                 Path("x")}),
            0);
  EXPECT_TRUE(std::filesystem::exists(Path("x/report.tsv")));
  ASSERT_EQ(RunCli(Cmd({"ensemble", Path("m1/model.ckpt"), Path("m2/model.ckpt"), "--seed", "0",
                     "--out", Path("ens")})),
            0);
  EXPECT_TRUE(std::filesystem::exists(Path("ens/ensemble.mm")));
  EXPECT_NE(ReadText(Path("ens/report.tsv")).find("ensemble_mm"), std::string::npos);
}

TEST_F(CliTest, StatsAndSplit) {
  ASSERT_EQ(RunCli(Cmd({"stats", "--seed", "0", "--out", Path("s")})), 0);
  EXPECT_FALSE(ReadText(Path("s/stats.tsv")).empty());
  ASSERT_EQ(RunCli(Cmd({"split", "--seed", "4", "--out", Path("p1")})), 0);
  ASSERT_EQ(RunCli(Cmd({"split", "--seed", "4", "--out", Path("p2")})), 0);
  EXPECT_EQ(ReadText(Path("p1/split.txt")), ReadText(Path("p2/split.txt")));
}

}  // namespace
}  // namespace mice::cli
