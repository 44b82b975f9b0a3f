#include "mice/corpus.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "mice/common.h"
#include "test_util.h"

namespace mice {
namespace {

using testing::LabelledCorpus;
using testing::MakeSentence;
using testing::TempDir;

// Hand-counted: 3 sentences, 15 tokens, 2 idiomatic sentences, 4 idiomatic
// tokens, 2 expressions.
const char kFixture[] =
    "s1\tvreči puško v koruzo\tYES\tYES\tOn je vrgel puško v koruzo\tO O I I I I\n"
    "s2\tvreči puško v koruzo\tNO\tNO\tLovec je vrgel puško\tO O L L\n"
    "s3\titi rakom žvižgat\tyes\tYes\tPodjetje je šlo žvižgat .\tO O I I O\n";

Corpus ParseText(const std::string& text) {
  std::istringstream in(text);
  return ParseSloie(in);
}

TEST(SloieTest, ParsesFixture) {
  const Corpus c = ParseText(kFixture);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0].id, "s1");
  EXPECT_EQ(c[0].expression, "vreči puško v koruzo");
  EXPECT_EQ(c[0].tokens.size(), 6u);
  EXPECT_TRUE(c[0].idiomatic());
  EXPECT_FALSE(c[1].idiomatic());
  EXPECT_EQ(c[1].token_labels[2], TokenLabel::kLiteralExpr);
  EXPECT_EQ(c[2].annotator_a, AnnotatorLabel::kYes);
  EXPECT_EQ(c[2].language, "sl");
}

TEST(SloieTest, StatsMatchHandCount) {
  const CorpusStats s = ComputeStats(ParseText(kFixture));
  EXPECT_EQ(s.sentences, 3u);
  EXPECT_EQ(s.tokens, 15u);
  EXPECT_EQ(s.idiomatic_sentences, 2u);
  EXPECT_EQ(s.literal_sentences, 1u);
  EXPECT_EQ(s.idiomatic_tokens, 6u);
  EXPECT_EQ(s.literal_tokens, 9u);
  EXPECT_EQ(s.expressions, 2u);
}

TEST(SloieTest, EmptyInputGivesEmptyCorpusAndZeroStats) {
  const Corpus c = ParseText("");
  EXPECT_TRUE(c.empty());
  EXPECT_EQ(ComputeStats(c), CorpusStats{});
}

TEST(SloieTest, MaskLengthMismatchNamesLine) {
  const std::string text =
      "a\te\tYES\tYES\tx y\tI I\n"
      "b\te\tYES\tYES\tx y z\tI I\n"
      "c\te\tNO\tNO\tx\tL\n";
  try {
    ParseText(text);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(SloieTest, RejectsMalformedLines) {
  EXPECT_THROW(ParseText("a\te\tYES\tYES\tx\n"), FormatError);              // 5 columns
  EXPECT_THROW(ParseText("a\te\tMAYBE\tYES\tx\tI\n"), FormatError);         // label
  EXPECT_THROW(ParseText("a\te\tYES\tYES\tx\tQ\n"), FormatError);           // mask code
  EXPECT_THROW(ParseText("a\t\tYES\tYES\tx\tI\n"), FormatError);            // expression
  EXPECT_THROW(ParseText("a\te\tYES\tYES\tx\tI\na\te\tNO\tNO\ty\tO\n"), FormatError);
  EXPECT_THROW(ParseText("a\te\tYES\tYES\tx\tI\n\n"), FormatError);         // blank line
}

TEST(SloieTest, LoadReportsFileAndLineOnce) {
  TempDir dir;
  testing::WriteText(dir / "c.tsv", "a\te\tYES\tYES\tx\tI\nb\te\n");
  try {
    LoadSloie(dir / "c.tsv");
    FAIL();
  } catch (const FormatError& e) {
    const std::string what = e.what();
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(what.find("c.tsv"), std::string::npos);
    EXPECT_EQ(what.find("line 2"), what.rfind("line 2"));
  }
}

TEST(SloieTest, WriteParseRoundTrip) {
  const Corpus c = ParseText(kFixture);
  std::ostringstream out;
  WriteSloie(c, out);
  Corpus back = ParseText(out.str());
  EXPECT_EQ(back, c);
}

TEST(ValidateTest, RejectsInvariantViolations) {
  AnnotatedSentence s = MakeSentence("a", "e", "x y", "I O");
  EXPECT_NO_THROW(Validate(s));
  s.sentence_label = SentenceLabel::kLiteral;
  EXPECT_THROW(Validate(s), std::invalid_argument);
  s = MakeSentence("a", "e", "x y", "I O");
  s.token_labels.pop_back();
  EXPECT_THROW(Validate(s), std::invalid_argument);
  s = MakeSentence("a", "", "x", "O");
  EXPECT_THROW(Validate(s), std::invalid_argument);
}

Corpus AgreementFixture() {
  // 10 sentences, 6 agree on YES or NO.
  const AnnotatorLabel Y = AnnotatorLabel::kYes, N = AnnotatorLabel::kNo,
                       D = AnnotatorLabel::kDontKnow, V = AnnotatorLabel::kVague;
  const std::pair<AnnotatorLabel, AnnotatorLabel> pairs[] = {
      {Y, Y}, {Y, N}, {N, N}, {D, D}, {Y, Y}, {V, V}, {N, Y}, {N, N}, {Y, Y}, {N, N}};
  Corpus c;
  for (std::size_t i = 0; i < 10; ++i) {
    auto s = MakeSentence("s" + std::to_string(i), "e", "x", "I");
    s.annotator_a = pairs[i].first;
    s.annotator_b = pairs[i].second;
    c.push_back(s);
  }
  return c;
}

TEST(AgreementTest, FilterKeepsAgreeingYesNo) {
  const Corpus c = AgreementFixture();
  const Corpus kept = FilterAgreement(c);
  ASSERT_EQ(kept.size(), 6u);
  EXPECT_EQ(kept[0].id, "s0");
  EXPECT_EQ(kept[1].id, "s2");
  EXPECT_EQ(kept[5].id, "s9");
  EXPECT_EQ(FilterAgreement(kept), kept);
}

TEST(AgreementTest, RawAgreement) {
  // 8 of 10 fixture pairs are equal (DONT_KNOW and VAGUE pairs included).
  EXPECT_DOUBLE_EQ(InterAnnotatorAgreement(AgreementFixture()), 0.8);
  Corpus c = LabelledCorpus(20, 0);
  c[3].annotator_b = AnnotatorLabel::kVague;
  EXPECT_DOUBLE_EQ(InterAnnotatorAgreement(c), 0.95);
  EXPECT_DOUBLE_EQ(InterAnnotatorAgreement(LabelledCorpus(4, 4)), 1.0);
  EXPECT_THROW(InterAnnotatorAgreement(Corpus{}), std::invalid_argument);
}

std::set<std::string> ExpressionsOf(const Corpus& c, const std::vector<std::size_t>& idx) {
  std::set<std::string> out;
  for (auto i : idx) out.insert(c[i].expression);
  return out;
}

TEST(SplitTest, RandomSizesAtFullScale) {
  const Corpus c = LabelledCorpus(24349, 5051, 75);
  const DataSplit s = SplitRandom(c, {0.63, 0.30, 0.07}, 1);
  EXPECT_EQ(s.train.size(), 18522u);
  EXPECT_EQ(s.test.size(), 8820u);
  EXPECT_EQ(s.dev.size(), 2058u);
  EXPECT_NO_THROW(CheckPartition(s, c.size()));
}

TEST(SplitTest, RandomIsSeedStable) {
  const Corpus c = LabelledCorpus(60, 40, 5);
  EXPECT_EQ(SplitRandom(c, {0.63, 0.30, 0.07}, 5), SplitRandom(c, {0.63, 0.30, 0.07}, 5));
  EXPECT_NE(SplitRandom(c, {0.63, 0.30, 0.07}, 5), SplitRandom(c, {0.63, 0.30, 0.07}, 6));
}

TEST(SplitTest, AllTrain) {
  const Corpus c = LabelledCorpus(5, 5);
  const DataSplit s = SplitRandom(c, {1.0, 0.0, 0.0}, 1);
  EXPECT_EQ(s.train.size(), 10u);
  EXPECT_TRUE(s.test.empty());
  EXPECT_TRUE(s.dev.empty());
}

TEST(SplitTest, RejectsBadRatios) {
  const Corpus c = LabelledCorpus(5, 5);
  EXPECT_THROW(SplitRandom(c, {0.5, 0.3, 0.1}, 1), std::invalid_argument);
  EXPECT_THROW(SplitRandom(c, {1.2, -0.2, 0.0}, 1), std::invalid_argument);
}

TEST(SplitTest, RandomSizesWithinOneOfExact) {
  for (std::size_t n : {1u, 7u, 33u, 100u, 999u}) {
    const Corpus c = LabelledCorpus(n, 0);
    const DataSplit s = SplitRandom(c, {0.63, 0.30, 0.07}, n);
    CheckPartition(s, n);
    EXPECT_LE(std::abs(static_cast<double>(s.train.size()) - 0.63 * n), 1.0);
    EXPECT_LE(std::abs(static_cast<double>(s.test.size()) - 0.30 * n), 1.0);
    EXPECT_LE(std::abs(static_cast<double>(s.dev.size()) - 0.07 * n), 1.0);
  }
}

TEST(SplitTest, ExpressionDisjointProperty) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SyntheticCorpusOptions o;
    o.sentences = 300;
    o.expressions = 2 + seed % 15;
    o.seed = seed;
    const Corpus c = MakeSyntheticCorpus(o);
    const DataSplit s = SplitExpressionDisjoint(c, 0.3, seed);
    CheckPartition(s, c.size());
    ASSERT_FALSE(s.train.empty());
    ASSERT_FALSE(s.test.empty());
    const auto train = ExpressionsOf(c, s.train);
    for (const auto& e : ExpressionsOf(c, s.test)) EXPECT_FALSE(train.count(e)) << e;
  }
}

TEST(SplitTest, ExpressionDisjointHitsTargetWithEqualGroups) {
  const Corpus c = LabelledCorpus(100, 0, 10);  // 10 expressions x 10 sentences
  const DataSplit s = SplitExpressionDisjoint(c, 0.3, 4);
  EXPECT_EQ(s.test.size(), 30u);
  EXPECT_EQ(s, SplitExpressionDisjoint(c, 0.3, 4));
  EXPECT_THROW(SplitExpressionDisjoint(LabelledCorpus(5, 5, 1), 0.3, 1), std::invalid_argument);
}

TEST(SplitTest, LeaveOneExpressionOut) {
  const Corpus c = LabelledCorpus(12, 6, 3);
  const DataSplit s = SplitLeaveOneExpressionOut(c, "e1");
  CheckPartition(s, c.size());
  EXPECT_EQ(s.test.size(), 6u);
  EXPECT_EQ(ExpressionsOf(c, s.test), std::set<std::string>{"e1"});
  EXPECT_FALSE(ExpressionsOf(c, s.train).count("e1"));
  EXPECT_THROW(SplitLeaveOneExpressionOut(c, "nope"), std::invalid_argument);
}

TEST(SplitTest, StratifiedKeepsBalance) {
  const Corpus c = LabelledCorpus(50, 50, 5);
  const Corpus balanced = BalancePerExpression(c, 1);
  const DataSplit s = SplitStratified(balanced, 0.3, 2);
  CheckPartition(s, balanced.size());
  std::size_t pos = 0;
  for (auto i : s.test) pos += balanced[i].idiomatic();
  EXPECT_EQ(2 * pos, s.test.size());
}

TEST(SplitTest, CheckPartitionDetectsProblems) {
  DataSplit s;
  s.train = {0, 1};
  s.test = {1};
  EXPECT_THROW(CheckPartition(s, 3), std::logic_error);
  s.test = {2};
  EXPECT_NO_THROW(CheckPartition(s, 3));
  EXPECT_THROW(CheckPartition(s, 4), std::logic_error);
  s.dev = {7};
  EXPECT_THROW(CheckPartition(s, 3), std::logic_error);
}

TEST(SplitTest, FileRoundTrip) {
  TempDir dir;
  const Corpus c = LabelledCorpus(30, 20, 4);
  const DataSplit s = SplitRandom(c, {0.63, 0.30, 0.07}, 3);
  WriteSplit(s, c, dir / "split.txt");
  DataSplit back = ReadSplit(dir / "split.txt", c);
  EXPECT_EQ(back.mode, SplitMode::kRandom);
  auto sorted = [](std::vector<std::size_t> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  EXPECT_EQ(sorted(back.train), sorted(s.train));
  EXPECT_EQ(sorted(back.test), sorted(s.test));
  EXPECT_EQ(sorted(back.dev), sorted(s.dev));

  testing::WriteText(dir / "bad.txt", "[train]\ns0\nnot-an-id\n");
  EXPECT_THROW(ReadSplit(dir / "bad.txt", c), FormatError);
  testing::WriteText(dir / "partial.txt", "[train]\ns0\n");
  EXPECT_THROW(ReadSplit(dir / "partial.txt", c), FormatError);
}

TEST(SubsampleTest, SizesAndDeterminism) {
  const Corpus c = LabelledCorpus(700, 300, 10);
  for (double f : {1.0, 0.8, 0.6, 0.4, 0.2, 0.1}) {
    const Corpus s = Subsample(c, f, 9);
    EXPECT_EQ(s.size(), static_cast<std::size_t>(std::llround(f * 1000)));
    EXPECT_EQ(s, Subsample(c, f, 9));
  }
  EXPECT_EQ(Subsample(c, 1.0, 3), c);
  EXPECT_THROW(Subsample(c, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(Subsample(c, 1.5, 1), std::invalid_argument);
}

std::map<std::string, std::pair<int, int>> CountsByExpression(const Corpus& c) {
  std::map<std::string, std::pair<int, int>> out;
  for (const auto& s : c) (s.idiomatic() ? out[s.expression].first : out[s.expression].second)++;
  return out;
}

TEST(BalanceTest, PerExpressionBalance) {
  SyntheticCorpusOptions o;
  o.sentences = 500;
  o.seed = 4;
  const Corpus c = MakeSyntheticCorpus(o);
  const Corpus b = BalancePerExpression(c, 1);
  const auto before = CountsByExpression(c);
  for (const auto& [e, counts] : CountsByExpression(b)) {
    EXPECT_EQ(counts.first, counts.second) << e;
    EXPECT_EQ(counts.first, std::min(before.at(e).first, before.at(e).second));
  }
  EXPECT_EQ(b, BalancePerExpression(c, 1));

  const Corpus m = SizeMatchedSubset(c, 2);
  EXPECT_EQ(m.size(), b.size());
  const auto bc = CountsByExpression(b);
  for (const auto& [e, counts] : CountsByExpression(m)) {
    EXPECT_EQ(counts.first + counts.second, bc.at(e).first + bc.at(e).second) << e;
  }
  EXPECT_EQ(m, SizeMatchedSubset(c, 2));
}

TEST(BalanceTest, BalancedIdiomSet) {
  const Corpus c = LabelledCorpus(10, 40, 3);
  const Corpus b = BalancedIdiomSet(c, 5);
  std::size_t pos = 0;
  for (const auto& s : b) pos += s.idiomatic();
  EXPECT_EQ(pos, 10u);
  EXPECT_EQ(b.size(), 20u);
  EXPECT_EQ(b, BalancedIdiomSet(c, 5));
  EXPECT_EQ(BalancedIdiomSet(LabelledCorpus(10, 4), 5).size(), 14u);
}

TEST(SyntheticCorpusTest, ValidAndDeterministic) {
  SyntheticCorpusOptions o;
  const Corpus c = MakeSyntheticCorpus(o);
  ASSERT_EQ(c.size(), 1000u);
  for (const auto& s : c) EXPECT_NO_THROW(Validate(s));
  EXPECT_EQ(DistinctExpressions(c).size(), 20u);
  EXPECT_EQ(c, MakeSyntheticCorpus(o));
  o.seed = 2;
  EXPECT_NE(c, MakeSyntheticCorpus(o));
  const CorpusStats st = ComputeStats(c);
  EXPECT_EQ(st.idiomatic_sentences + st.literal_sentences, st.sentences);
  EXPECT_EQ(st.idiomatic_tokens + st.literal_tokens, st.tokens);
}

}  // namespace
}  // namespace mice
