#include "mice/cli/commands.h"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mice/checkpoint.h"
#include "mice/cli/config.h"
#include "mice/corpus.h"
#include "mice/cupt.h"
#include "mice/embeddings.h"
#include "mice/ensemble.h"
#include "mice/protocols.h"
#include "mice/report.h"
#include "mice/rng.h"
#include "mice/systems.h"

namespace mice::cli {
namespace {

namespace fs = std::filesystem;

struct Flags {
  std::string config;
  std::optional<std::string> seed;
  std::optional<std::string> out;
  std::optional<std::string> task;
  std::optional<std::string> archive;
  std::optional<std::string> corpus;
  std::optional<std::string> format;
  std::vector<std::string> sets;
  std::vector<std::string> checkpoints;
  std::string input;
};

void Log(const std::string& message) { std::cerr << "[mice] " << message << '\n'; }

ExperimentConfig ResolveFlags(const Flags& flags) {
  Config config;
  if (!flags.config.empty()) config = Config::Load(flags.config);
  for (const auto& s : flags.sets) config.SetAssignment(s);
  if (flags.seed) config.Set("seed", *flags.seed);
  if (flags.out) config.Set("out", *flags.out);
  if (flags.task) config.Set("task", *flags.task);
  if (flags.archive) config.Set("archive", *flags.archive);
  if (flags.corpus) config.Set("corpus", *flags.corpus);
  if (flags.format) config.Set("report_format", *flags.format);
  return Resolve(config);
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// Creates the output directory and records the resolved configuration.
void PrepareOut(const ExperimentConfig& c, const std::string& command) {
  fs::create_directories(c.out);
  WriteFile(c.out / "config.resolved", "# command: " + command + "\n" + Render(c));
}

Corpus LoadAnyCorpus(const fs::path& path, const std::string& language) {
  if (path.extension() == ".cupt") {
    Corpus corpus;
    for (const auto& s : LoadCupt(path, {"VID"})) corpus.push_back(CuptToAnnotated(s, language));
    return corpus;
  }
  return LoadSloie(path, language);
}

Corpus LoadCorpus(const ExperimentConfig& c) {
  RequireExisting(c.corpus, "corpus");
  Corpus corpus = LoadAnyCorpus(c.corpus, c.language);
  if (c.filter_agreement) corpus = FilterAgreement(corpus);
  Log("loaded " + std::to_string(corpus.size()) + " sentences from " + c.corpus.string());
  return corpus;
}

EmbeddingArchive LoadArchive(const fs::path& path) {
  RequireExisting(path, "archive");
  EmbeddingArchive archive = OpenArchive(path);
  Log("opened archive " + path.string() + " (" + std::to_string(archive.size()) +
      " sentences, dim " + std::to_string(archive.dim()) + ")");
  return archive;
}

DataSplit MakeSplit(const ExperimentConfig& c, const Corpus& corpus) {
  if (!c.split_file.empty()) {
    RequireExisting(c.split_file, "split_file");
    return ReadSplit(c.split_file, corpus);
  }
  const std::uint64_t seed = DeriveSeed(c.split_seed, "split");
  switch (c.split_mode) {
    case SplitMode::kRandom: return SplitRandom(corpus, c.ratios, seed);
    case SplitMode::kExpressionDisjoint:
      return SplitExpressionDisjoint(corpus, c.test_fraction, seed);
    case SplitMode::kStratified: return SplitStratified(corpus, c.test_fraction, seed);
    case SplitMode::kLeaveOneExpressionOut: break;
  }
  throw std::invalid_argument(
      "leave-one-expression-out has one split per expression; use it with the eval command");
}

std::unique_ptr<System> MakeSystem(const std::string& name, const ExperimentConfig& c) {
  if (name == "majority") return std::make_unique<MajoritySystem>();
  if (name == "all_positive") return std::make_unique<AllPositiveSystem>();
  if (name == "svm") {
    return std::make_unique<SvmSystem>(
        SvmOptions{c.svm_lambda, c.svm_epochs, DeriveSeed(c.seed, "svm")}, c.svm_window);
  }
  if (name == "mice") return std::make_unique<GruSystem>(c.train);
  throw std::invalid_argument("unknown system '" + name +
                              "' (majority, all_positive, svm, mice)");
}

bool NeedsArchive(const std::vector<std::string>& systems) {
  for (const auto& s : systems) {
    if (s == "mice") return true;
  }
  return false;
}

ProtocolOptions MakeProtocolOptions(const ExperimentConfig& c) {
  ProtocolOptions o;
  o.seed = c.split_seed;
  o.ratios = c.ratios;
  o.test_fraction = c.test_fraction;
  o.tasks = {c.task};
  o.expression_tokens_only = c.expression_tokens_only;
  o.score_dev = c.score_dev;
  return o;
}

void Finish(EvalReport report, const ExperimentConfig& c, double seconds,
            const std::string& base = "report") {
  report.metadata["seed"] = std::to_string(c.seed);
  report.metadata["split_seed"] = std::to_string(c.split_seed);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", seconds);
  report.metadata["elapsed_seconds"] = buf;
  for (const auto& path : EmitReport(report, ParseReportFormat(c.report_format), c.out / base)) {
    Log("wrote " + path.string());
  }
  std::cout << ResultsTsv(report);
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

GruSystem LoadMember(const fs::path& path, const ExperimentConfig& c, const std::string& name) {
  RequireExisting(path, "checkpoint");
  Checkpoint ckpt = LoadCheckpoint(path);
  if (ckpt.task != c.task) {
    throw std::invalid_argument(path.string() + " was trained for the " +
                                TaskName(ckpt.task) + " task, not " + TaskName(c.task));
  }
  return GruSystem::Frozen(std::move(ckpt.model), ckpt.task, 0, name);
}

int CmdStats(const Flags& flags) {
  const ExperimentConfig c = ResolveFlags(flags);
  PrepareOut(c, "stats");
  const Corpus corpus = LoadCorpus(c);
  std::ostringstream text;
  text << ComputeStats(corpus);
  WriteFile(c.out / "stats.tsv", text.str());
  std::cout << text.str();
  return 0;
}

int CmdSplit(const Flags& flags) {
  const ExperimentConfig c = ResolveFlags(flags);
  PrepareOut(c, "split");
  const Corpus corpus = LoadCorpus(c);
  const DataSplit split = MakeSplit(c, corpus);
  WriteSplit(split, corpus, c.out / "split.txt");
  std::cout << "mode\t" << SplitModeName(split.mode) << "\ntrain\t" << split.train.size()
            << "\ntest\t" << split.test.size() << "\ndev\t" << split.dev.size() << '\n';
  return 0;
}

int CmdTrain(const Flags& flags) {
  const ExperimentConfig c = ResolveFlags(flags);
  PrepareOut(c, "train");
  const Corpus corpus = LoadCorpus(c);
  const EmbeddingArchive archive = LoadArchive(c.archive);
  const DataSplit split = MakeSplit(c, corpus);
  const Corpus train = Select(corpus, split.train);
  Log("training on " + std::to_string(train.size()) + " sentences, " + TaskName(c.task) +
      " task, " + std::to_string(c.train.epochs) + " epochs");
  TrainResult result = Train(train, archive, c.task, c.train);
  SaveCheckpoint({std::move(result.model), c.train, c.task, archive.provider_tag()},
                 c.out / "model.ckpt");
  std::string trace = "epoch\tloss\n";
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%zu\t%.10g\n", e + 1, result.epoch_loss[e]);
    trace += buf;
  }
  WriteFile(c.out / "loss.tsv", trace);
  Log("wrote " + (c.out / "model.ckpt").string());
  return 0;
}

int CmdEval(const Flags& flags) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig c = ResolveFlags(flags);
  PrepareOut(c, "eval");
  const Corpus corpus = LoadCorpus(c);
  std::optional<EmbeddingArchive> archive;
  if (NeedsArchive(c.systems) || !flags.checkpoints.empty()) archive = LoadArchive(c.archive);
  const ArchiveSet archives{archive ? &*archive : nullptr};

  std::vector<std::unique_ptr<System>> owned;
  for (const auto& name : c.systems) owned.push_back(MakeSystem(name, c));
  for (const auto& path : flags.checkpoints) {
    owned.push_back(std::make_unique<GruSystem>(
        LoadMember(path, c, "mice:" + fs::path(path).stem().string())));
  }
  std::vector<System*> systems;
  for (auto& s : owned) systems.push_back(s.get());

  if (c.split_mode == SplitMode::kLeaveOneExpressionOut) {
    auto system = MakeSystem(c.system, c);
    Finish(RunPerExpressionEval(corpus, archives, *system, c.task), c, Seconds(start));
    return 0;
  }
  const DataSplit split = MakeSplit(c, corpus);
  const std::string experiment =
      split.mode == SplitMode::kExpressionDisjoint ? "out_of_training" : "in_training";
  Finish(RunSplitEval(experiment, corpus, archives, systems, split, MakeProtocolOptions(c)), c,
         Seconds(start));
  return 0;
}

int CmdEnsemble(const Flags& flags) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig c = ResolveFlags(flags);
  PrepareOut(c, "ensemble");
  if (flags.checkpoints.size() < 2) {
    throw std::invalid_argument("ensemble needs at least 2 checkpoints (3 in the usual setup)");
  }
  const Corpus corpus = LoadCorpus(c);
  const EmbeddingArchive archive = LoadArchive(c.archive);
  const ArchiveSet archives{&archive};

  std::vector<std::shared_ptr<GruSystem>> members;
  for (std::size_t i = 0; i < flags.checkpoints.size(); ++i) {
    members.push_back(std::make_shared<GruSystem>(
        LoadMember(flags.checkpoints[i], c, "member" + std::to_string(i + 1))));
  }
  MixtureOptions mm;
  mm.components = c.mm_components;
  mm.ridge = c.mm_ridge;
  mm.shared_covariance = c.mm_shared_covariance;
  mm.seed = DeriveSeed(c.seed, "mixture");
  EnsembleSystem vote(members, EnsembleMode::kVote);
  EnsembleSystem mixture(members, EnsembleMode::kMixture, mm);
  MajoritySystem majority;
  AllPositiveSystem all_positive;
  std::vector<System*> systems{&majority, &all_positive};
  for (auto& m : members) systems.push_back(m.get());
  systems.push_back(&vote);
  systems.push_back(&mixture);

  const DataSplit split = MakeSplit(c, corpus);
  EvalReport report =
      RunSplitEval("ensemble", corpus, archives, systems, split, MakeProtocolOptions(c));
  for (const auto& w : mixture.mixture()->warnings()) Log("warning: " + w);
  SaveEnsemble(*mixture.mixture(), c.out / "ensemble.mm");
  Finish(std::move(report), c, Seconds(start));
  return 0;
}

int CmdAblate(const Flags& flags) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig c = ResolveFlags(flags);
  PrepareOut(c, "ablate");
  const Corpus corpus = LoadCorpus(c);
  std::optional<EmbeddingArchive> archive;
  if (NeedsArchive({c.system})) archive = LoadArchive(c.archive);
  auto system = MakeSystem(c.system, c);
  Finish(RunSizeAblation(corpus, {archive ? &*archive : nullptr}, *system, c.fractions,
                         MakeProtocolOptions(c), c.task),
         c, Seconds(start));
  return 0;
}

int CmdBalanced(const Flags& flags) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig c = ResolveFlags(flags);
  PrepareOut(c, "balanced");
  const Corpus corpus = LoadCorpus(c);
  std::optional<EmbeddingArchive> archive;
  if (NeedsArchive({c.system})) archive = LoadArchive(c.archive);
  auto system = MakeSystem(c.system, c);
  Finish(RunBalancedStudy(corpus, {archive ? &*archive : nullptr}, *system,
                          MakeProtocolOptions(c)),
         c, Seconds(start));
  return 0;
}

int CmdCrosslingual(const Flags& flags) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig c = ResolveFlags(flags);
  PrepareOut(c, "crosslingual");
  if (c.test_sets.empty()) {
    throw std::invalid_argument("crosslingual needs test_languages and test.<lang>.* keys");
  }
  const Corpus corpus = LoadCorpus(c);
  const bool needs_archive = NeedsArchive({c.system});
  std::optional<EmbeddingArchive> archive;
  if (needs_archive) archive = LoadArchive(c.archive);
  std::vector<EmbeddingArchive> test_archives;
  test_archives.reserve(c.test_sets.size());
  std::vector<LanguageTestSet> tests;
  for (const auto& t : c.test_sets) {
    RequireExisting(t.corpus, "test." + t.language + ".corpus");
    const Corpus full = LoadAnyCorpus(t.corpus, t.language);
    LanguageTestSet set;
    set.language = t.language;
    set.corpus = BalancedIdiomSet(full, DeriveSeed(DeriveSeed(c.seed, "balance"),
                                                   Fnv1a64(t.language)));
    if (needs_archive) {
      test_archives.push_back(LoadArchive(t.archive));
      set.archives = {&test_archives.back()};
    } else {
      set.archives = {nullptr};
    }
    Log(t.language + ": " + std::to_string(set.corpus.size()) + " balanced test sentences");
    tests.push_back(std::move(set));
  }
  auto system = MakeSystem(c.system, c);
  Finish(RunCrosslingualEval(corpus, {archive ? &*archive : nullptr}, tests, *system), c,
         Seconds(start));
  return 0;
}

int CmdExportReport(const Flags& flags) {
  Config config;
  if (!flags.config.empty()) config = Config::Load(flags.config);
  for (const auto& s : flags.sets) config.SetAssignment(s);
  if (flags.out) config.Set("out", *flags.out);
  if (flags.format) config.Set("report_format", *flags.format);
  // Reformatting a report involves no randomness.
  if (!config.Get("seed")) config.Set("seed", flags.seed.value_or("0"));
  const ExperimentConfig c = Resolve(config);
  PrepareOut(c, "export-report");
  RequireExisting(flags.input, "input");
  std::ifstream in(flags.input);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const EvalReport report = ParseReportJson(text);
  for (const auto& path : EmitReport(report, ParseReportFormat(c.report_format),
                                     c.out / fs::path(flags.input).stem())) {
    Log("wrote " + path.string());
  }
  return 0;
}

int CmdSynth(const Flags& flags) {
  const ExperimentConfig c = ResolveFlags(flags);
  PrepareOut(c, "synth");
  SyntheticCorpusOptions co;
  co.sentences = c.synth_sentences;
  co.expressions = c.synth_expressions;
  co.seed = DeriveSeed(c.seed, "synthetic-corpus");
  const Corpus corpus = MakeSyntheticCorpus(co);
  SyntheticEmbeddingOptions eo;
  eo.dim = c.synth_dim;
  eo.seed = c.seed;
  if (c.synth_signal > 0.0) eo.planted_signal = c.synth_signal;
  WriteSloie(corpus, c.out / "corpus.tsv");
  WriteArchive(SyntheticProvider(corpus, eo), c.out / "archive.emb");
  Log("wrote " + (c.out / "corpus.tsv").string() + " and " + (c.out / "archive.emb").string());
  return 0;
}

void AddCommon(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "key = value config file");
  cmd->add_option("--seed", f.seed, "master seed (required unless set in the config)");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--task", f.task, "token or sentence");
  cmd->add_option("--archive", f.archive, "embedding archive");
  cmd->add_option("--corpus", f.corpus, "corpus (.tsv or .cupt)");
  cmd->add_option("--format", f.format, "report format: tsv or json");
  cmd->add_option("--set", f.sets, "override any config key: key=value");
}

}  // namespace

int Main(int argc, char** argv) {
  CLI::App app{"Idiomatic-expression detection with frozen contextual embeddings"};
  app.require_subcommand(1);
  Flags flags;
  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Flags&);
  };
  const Command commands[] = {
      {"stats", "print corpus statistics", CmdStats},
      {"split", "write a train/test/dev split", CmdSplit},
      {"train", "train a biGRU on the training split", CmdTrain},
      {"eval", "train and score systems on a split", CmdEval},
      {"ensemble", "vote and mixture ensembles over checkpoints", CmdEnsemble},
      {"ablate", "training-set size ablation", CmdAblate},
      {"balanced", "balanced vs size-matched imbalanced corpora", CmdBalanced},
      {"crosslingual", "train on one corpus, score balanced test sets", CmdCrosslingual},
      {"export-report", "re-emit a JSON report as TSV or JSON", CmdExportReport},
      {"synth", "write a planted-signal synthetic corpus and archive", CmdSynth},
  };
  int (*selected)(const Flags&) = nullptr;
  for (const auto& command : commands) {
    CLI::App* sub = app.add_subcommand(command.name, command.help);
    AddCommon(sub, flags);
    const std::string name = command.name;
    if (name == "eval" || name == "ensemble") {
      sub->add_option("checkpoints", flags.checkpoints, "model checkpoints");
    }
    if (name == "export-report") {
      sub->add_option("--input", flags.input, "report JSON")->required();
    }
    sub->callback([&selected, run = command.run] { selected = run; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    return selected(flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mice::cli
