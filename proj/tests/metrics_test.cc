#include "mice/metrics.h"

#include <gtest/gtest.h>

#include <algorithm>

#include "mice/baseline.h"
#include "mice/rng.h"
#include "test_util.h"

namespace mice {
namespace {

using testing::MakeSentence;

TEST(ScoreTest, WorkedExample) {
  // tp = 1, fp = 1, fn = 1, tn = 7.
  const std::vector<int> gold = {1, 1, 0, 0, 0, 0, 0, 0, 0, 0};
  const std::vector<int> pred = {1, 0, 1, 0, 0, 0, 0, 0, 0, 0};
  const Metrics m = Score(pred, gold, Task::kToken);
  EXPECT_EQ(m.counts, (ConfusionCounts{1, 1, 7, 1, Task::kToken}));
  EXPECT_DOUBLE_EQ(m.ca, 0.8);
  EXPECT_DOUBLE_EQ(m.f1, 0.5);
}

TEST(ScoreTest, EdgeCases) {
  const std::vector<int> zeros = {0, 0, 0};
  EXPECT_DOUBLE_EQ(Score(zeros, zeros, Task::kSentence).f1, 0.0);
  EXPECT_DOUBLE_EQ(Score(zeros, zeros, Task::kSentence).ca, 1.0);
  EXPECT_THROW(Score(zeros, std::vector<int>{0, 0}, Task::kSentence), std::invalid_argument);
  EXPECT_EQ(FromCounts({2, 0, 0, 0, Task::kToken}).f1, 1.0);
}

TEST(ThresholdTest, CutIsInclusive) {
  const std::vector<double> p = {0.49, 0.5, 0.51, 0.0, 1.0};
  EXPECT_EQ(Threshold(p), (std::vector<int>{0, 1, 1, 0, 1}));
  EXPECT_EQ(Threshold(p, 0.9), (std::vector<int>{0, 0, 0, 0, 1}));
}

TEST(GoldUnitsTest, TokenAndSentenceUnits) {
  const Corpus c = {MakeSentence("a", "e", "x y z", "O I I"),
                    MakeSentence("b", "e", "x y", "L O")};
  EXPECT_EQ(GoldUnits(c, Task::kSentence), (std::vector<int>{1, 0}));
  EXPECT_EQ(GoldUnits(c, Task::kToken), (std::vector<int>{0, 1, 1, 0, 0}));
  EXPECT_EQ(GoldUnits(c, Task::kToken, true), (std::vector<int>{1, 1, 0}));
  const std::vector<double> per_token = {0.1, 0.2, 0.3, 0.4, 0.5};
  EXPECT_EQ(FilterUnits(c, per_token, Task::kToken, true), (std::vector<double>{0.2, 0.3, 0.4}));
  EXPECT_EQ(FilterUnits(c, per_token, Task::kToken, false), per_token);
}

Corpus RandomCorpus(std::uint64_t seed) {
  Rng rng(seed);
  const double rate = rng.Uniform(0.02, 0.98);
  const std::size_t n = 5 + rng.Below(300);
  Corpus c;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = 1 + rng.Below(8);
    std::string tokens, mask;
    for (std::size_t k = 0; k < len; ++k) {
      tokens += "w ";
      mask += rng.Bernoulli(rate) ? 'I' : (rng.Bernoulli(0.3) ? 'L' : 'O');
    }
    c.push_back(MakeSentence("s" + std::to_string(i), "e", tokens, mask));
  }
  return c;
}

TEST(MetricIdentityTest, DefaultsMatchPrevalenceOnRandomCorpora) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Corpus c = RandomCorpus(seed);
    for (Task task : {Task::kToken, Task::kSentence}) {
      const std::vector<int> gold = GoldUnits(c, task);
      const double n = static_cast<double>(gold.size());
      const double p = static_cast<double>(std::count(gold.begin(), gold.end(), 1)) / n;
      const auto all = ConstantClassifier::AllPositive().Predict(gold.size());
      const auto maj = ConstantClassifier::Majority(gold).Predict(gold.size());
      EXPECT_NEAR(Score(all, gold, task).f1, 2 * p / (1 + p), 1e-12) << "seed " << seed;
      EXPECT_NEAR(Score(maj, gold, task).ca, std::max(p, 1 - p), 1e-12) << "seed " << seed;
    }
  }
}

TEST(MetricIdentityTest, PermutationInvariance) {
  Rng rng(4);
  std::vector<int> gold(97), pred(97);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    gold[i] = rng.Bernoulli(0.3);
    pred[i] = rng.Bernoulli(0.5);
  }
  const Metrics base = Score(pred, gold, Task::kToken);
  std::vector<std::size_t> order(gold.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int round = 0; round < 5; ++round) {
    rng.Shuffle(std::span(order));
    std::vector<int> g, p;
    for (std::size_t i : order) {
      g.push_back(gold[i]);
      p.push_back(pred[i]);
    }
    const Metrics m = Score(p, g, Task::kToken);
    EXPECT_EQ(m.counts, base.counts);
    EXPECT_EQ(m.ca, base.ca);
    EXPECT_EQ(m.f1, base.f1);
  }
}

}  // namespace
}  // namespace mice
