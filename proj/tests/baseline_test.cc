#include "mice/baseline.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mice/rng.h"

namespace mice {
namespace {

using Doc = std::vector<std::string>;

TEST(TfIdfTest, SingleDocumentIdfIsOne) {
  const std::vector<Doc> docs = {{"a", "b", "a"}};
  const auto v = TfIdfVocabulary::Build(docs);
  EXPECT_DOUBLE_EQ(v.Idf("a"), 1.0);
  EXPECT_DOUBLE_EQ(v.Idf("b"), 1.0);
  EXPECT_EQ(v.document_count(), 1u);
}

TEST(TfIdfTest, SmoothedIdf) {
  const std::vector<Doc> docs = {{"both", "only"}, {"both"}};
  const auto v = TfIdfVocabulary::Build(docs);
  EXPECT_DOUBLE_EQ(v.Idf("both"), 1.0);
  EXPECT_NEAR(v.Idf("only"), 1.405, 5e-4);
  EXPECT_NEAR(v.Idf("only"), 1.0 + std::log(1.5), 1e-15);
  EXPECT_EQ(v.DocumentFrequency("both"), 2u);
  EXPECT_EQ(v.DocumentFrequency("only"), 1u);
  EXPECT_EQ(v.DocumentFrequency("absent"), 0u);
  EXPECT_THROW(v.Idf("absent"), std::out_of_range);
  EXPECT_THROW(TfIdfVocabulary::Build(std::vector<Doc>{}), std::invalid_argument);
}

TEST(TfIdfTest, LexicographicIndicesAndUnitVectors) {
  const std::vector<Doc> docs = {{"zeta", "alpha"}, {"mid", "alpha", "alpha"}, {"beta"}};
  const auto v = TfIdfVocabulary::Build(docs);
  ASSERT_EQ(v.size(), 4u);
  EXPECT_EQ(*v.Index("alpha"), 0u);
  EXPECT_EQ(*v.Index("beta"), 1u);
  EXPECT_EQ(*v.Index("mid"), 2u);
  EXPECT_EQ(*v.Index("zeta"), 3u);
  EXPECT_FALSE(v.Index("nope").has_value());

  const SparseVector x = v.Transform(Doc{"mid", "alpha", "alpha", "unknown"});
  EXPECT_NEAR(Norm(x), 1.0, 1e-12);
  ASSERT_EQ(x.nnz(), 2u);
  EXPECT_EQ(x.index, (std::vector<std::uint32_t>{0, 2}));
  // Raw tf times idf, then normalised: alpha 2 * (1 + ln(4/3)), mid 1 * (1 + ln 2).
  const double a = 2.0 * (1.0 + std::log(4.0 / 3.0));
  const double m = 1.0 + std::log(2.0);
  EXPECT_NEAR(x.value[0], a / std::hypot(a, m), 1e-12);
  EXPECT_NEAR(x.value[1], m / std::hypot(a, m), 1e-12);
  EXPECT_EQ(v.Transform(Doc{"unknown"}).nnz(), 0u);
}

TEST(TokenWindowTest, Clipping) {
  const Doc t = {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};
  EXPECT_EQ(TokenWindow(t, 5).size(), 7u);
  EXPECT_EQ(TokenWindow(t, 0), (Doc{"a", "b", "c", "d"}));
  EXPECT_EQ(TokenWindow(Doc{"x", "y"}, 1), (Doc{"x", "y"}));
  EXPECT_EQ(TokenWindow(t, 9, 1), (Doc{"i", "j"}));
  EXPECT_THROW(TokenWindow(t, 10), std::out_of_range);
}

SparseVector Dense2(double x, double y) { return {{0, 1}, {x, y}}; }

double Accuracy(const LinearSvm& svm, const std::vector<SparseVector>& x,
                const std::vector<int>& y) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < x.size(); ++i) ok += svm.Predict(x[i]) == (y[i] == 1);
  return static_cast<double>(ok) / static_cast<double>(x.size());
}

TEST(SvmTest, SeparableTwoPoints) {
  const std::vector<SparseVector> x = {Dense2(1, 0), Dense2(-1, 0)};
  const std::vector<int> y = {1, 0};
  const LinearSvm svm = TrainSvm(x, y, 2, {});
  EXPECT_EQ(Accuracy(svm, x, y), 1.0);
}

TEST(SvmTest, XorIsNotSeparable) {
  const std::vector<SparseVector> x = {Dense2(1, 1), Dense2(-1, -1), Dense2(1, -1),
                                       Dense2(-1, 1)};
  const std::vector<int> y = {1, 1, 0, 0};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    EXPECT_LE(Accuracy(TrainSvm(x, y, 2, {1e-4, 20, seed}), x, y), 0.75);
  }
}

TEST(SvmTest, BlobsAgainstGridSearchSeparator) {
  Rng rng(21);
  std::vector<SparseVector> x;
  std::vector<int> y;
  for (int i = 0; i < 200; ++i) {
    const int label = i % 2;
    const double cx = label ? 1.5 : -1.0, cy = label ? 1.0 : -1.5;
    x.push_back(Dense2(cx + 0.6 * rng.Normal(), cy + 0.6 * rng.Normal()));
    y.push_back(label);
  }
  // Exhaustive search over directions and offsets for the best separator.
  double best = 0.0;
  for (int a = 0; a < 360; ++a) {
    const double th = a * std::numbers::pi / 180.0;
    for (int b = -40; b <= 40; ++b) {
      std::size_t ok = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = std::cos(th) * x[i].value[0] + std::sin(th) * x[i].value[1] + 0.1 * b;
        ok += (s >= 0.0) == (y[i] == 1);
      }
      best = std::max(best, static_cast<double>(ok) / static_cast<double>(x.size()));
    }
  }
  const LinearSvm svm = TrainSvm(x, y, 2, {1e-3, 20, 4});
  const double acc = Accuracy(svm, x, y);
  EXPECT_GE(best, 0.95);
  EXPECT_GE(acc, 0.95);
  EXPECT_GE(acc, best - 0.03);
}

TEST(SvmTest, DeterministicPerSeedAndValidates) {
  const std::vector<SparseVector> x = {Dense2(1, 0.2), Dense2(-1, 0.1), Dense2(0.5, -1)};
  const std::vector<int> y = {1, 0, 1};
  EXPECT_EQ(TrainSvm(x, y, 2, {1e-2, 5, 3}).weights(), TrainSvm(x, y, 2, {1e-2, 5, 3}).weights());
  EXPECT_THROW(TrainSvm(x, std::vector<int>{1, 1, 1}, 2, {}), std::invalid_argument);
  EXPECT_THROW(TrainSvm(x, std::vector<int>{1, 0}, 2, {}), std::invalid_argument);
  EXPECT_THROW(TrainSvm(x, y, 2, {0.0, 5, 0}), std::invalid_argument);
  EXPECT_THROW(TrainSvm(x, y, 1, {}), std::out_of_range);
}

TEST(SvmTest, JointRescalingKeepsDecisions) {
  Rng rng(5);
  std::vector<SparseVector> x;
  std::vector<int> y;
  for (int i = 0; i < 60; ++i) {
    x.push_back(Dense2(rng.Normal(), rng.Normal()));
    y.push_back(x.back().value[0] + 0.3 * x.back().value[1] > 0.0);
  }
  const LinearSvm svm = TrainSvm(x, y, 2, {1e-3, 10, 1});
  for (double c : {0.001, 0.5, 3.0, 1e4}) {
    const LinearSvm scaled = svm.Rescaled(c);
    for (const auto& v : x) {
      SparseVector cv = v;
      for (double& e : cv.value) e *= c;
      EXPECT_EQ(scaled.Predict(cv), svm.Predict(v));
      EXPECT_NEAR(scaled.Decision(cv), svm.Decision(v), 1e-9 * (1.0 + std::abs(svm.Decision(v))));
    }
  }
}

TEST(ConstantClassifierTest, MajorityAndAllPositive) {
  EXPECT_EQ(ConstantClassifier::Majority(std::vector<int>{0, 0, 1}).label(), 0);
  EXPECT_EQ(ConstantClassifier::Majority(std::vector<int>{1, 0, 1}).label(), 1);
  EXPECT_EQ(ConstantClassifier::Majority(std::vector<int>{1, 0}).label(), 1);  // tie
  EXPECT_EQ(ConstantClassifier::AllPositive().label(), 1);
  EXPECT_EQ(ConstantClassifier::AllPositive().Predict(3), (std::vector<int>{1, 1, 1}));
}

}  // namespace
}  // namespace mice
