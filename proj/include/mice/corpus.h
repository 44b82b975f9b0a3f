#ifndef MICE_CORPUS_H_
#define MICE_CORPUS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mice/common.h"

namespace mice {

enum class AnnotatorLabel { kYes, kNo, kDontKnow, kVague };
enum class TokenLabel { kIdiomatic, kLiteralExpr, kOutside };
enum class SentenceLabel { kIdiomatic, kLiteral };

const char* AnnotatorLabelName(AnnotatorLabel label);
AnnotatorLabel ParseAnnotatorLabel(const std::string& text);
char TokenLabelCode(TokenLabel label);

struct AnnotatedSentence {
  std::string id;
  std::string language = "sl";
  std::vector<std::string> tokens;
  std::string expression;
  std::vector<TokenLabel> token_labels;
  SentenceLabel sentence_label = SentenceLabel::kLiteral;
  AnnotatorLabel annotator_a = AnnotatorLabel::kNo;
  AnnotatorLabel annotator_b = AnnotatorLabel::kNo;

  bool idiomatic() const { return sentence_label == SentenceLabel::kIdiomatic; }
  bool operator==(const AnnotatedSentence&) const = default;
};

using Corpus = std::vector<AnnotatedSentence>;

// Sets sentence_label from token_labels (IDIOMATIC iff any token is).
void DeriveSentenceLabel(AnnotatedSentence& sentence);
// Throws std::invalid_argument when a type invariant is violated.
void Validate(const AnnotatedSentence& sentence);

struct CorpusStats {
  std::size_t sentences = 0;
  std::size_t tokens = 0;
  std::size_t idiomatic_sentences = 0;
  std::size_t literal_sentences = 0;
  std::size_t idiomatic_tokens = 0;
  // Every token not labelled IDIOMATIC, so that the two token counts sum to
  // `tokens`.
  std::size_t literal_tokens = 0;
  std::size_t expressions = 0;

  bool operator==(const CorpusStats&) const = default;
};

CorpusStats ComputeStats(std::span<const AnnotatedSentence> sentences);
std::ostream& operator<<(std::ostream& os, const CorpusStats& stats);

// SloIE TSV: id, expression, annA, annB, space-separated tokens, mask of
// {I,L,O}. Throws FormatError naming the offending line.
Corpus LoadSloie(const std::filesystem::path& path,
                 const std::string& language = "sl");
Corpus ParseSloie(std::istream& in, const std::string& language = "sl");
void WriteSloie(std::span<const AnnotatedSentence> sentences, std::ostream& out);
void WriteSloie(std::span<const AnnotatedSentence> sentences,
                const std::filesystem::path& path);

// Keeps sentences where both annotators gave the same YES or NO label.
Corpus FilterAgreement(std::span<const AnnotatedSentence> sentences);

// Raw agreement: fraction of sentences with annotator_a == annotator_b.
double InterAnnotatorAgreement(std::span<const AnnotatedSentence> sentences);

enum class SplitMode { kRandom, kExpressionDisjoint, kLeaveOneExpressionOut, kStratified };
const char* SplitModeName(SplitMode mode);
SplitMode ParseSplitMode(const std::string& name);

// Index-based partition of a corpus. Each index appears in exactly one set.
struct DataSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::vector<std::size_t> dev;
  SplitMode mode = SplitMode::kRandom;

  bool operator==(const DataSplit&) const = default;
};

// Throws std::logic_error if the split is not a partition of [0, corpus_size).
void CheckPartition(const DataSplit& split, std::size_t corpus_size);

Corpus Select(std::span<const AnnotatedSentence> sentences,
              std::span<const std::size_t> indices);

// Uniform shuffle then cut into round(N * ratio) sized pieces; dev takes the
// remainder.
DataSplit SplitRandom(std::span<const AnnotatedSentence> sentences,
                      std::array<double, 3> ratios, std::uint64_t seed);

// Partitions expressions between train and test. Expressions are visited in
// descending sentence count (seeded shuffle breaks ties) and each goes to the
// side that keeps the test count closest to the target.
DataSplit SplitExpressionDisjoint(std::span<const AnnotatedSentence> sentences,
                                  double test_fraction, std::uint64_t seed);

DataSplit SplitLeaveOneExpressionOut(
    std::span<const AnnotatedSentence> sentences, const std::string& expression);

// Train/test split stratified by (expression, sentence label): every stratum
// contributes round(test_fraction * size) sentences to test. Used by the
// balanced study so that balanced corpora yield balanced test sets.
DataSplit SplitStratified(std::span<const AnnotatedSentence> sentences,
                          double test_fraction, std::uint64_t seed);

// Uniform subset of round(fraction * N) sentences, in corpus order.
Corpus Subsample(std::span<const AnnotatedSentence> sentences, double fraction,
                 std::uint64_t seed);

// Per expression keeps k idiomatic and k literal sentences,
// k = min(#idiomatic, #literal). Expressions with k = 0 are dropped.
Corpus BalancePerExpression(std::span<const AnnotatedSentence> sentences,
                            std::uint64_t seed);

// Imbalanced counterpart of BalancePerExpression: per expression a uniform
// random subset of the same size (2k) as the balanced version keeps.
Corpus SizeMatchedSubset(std::span<const AnnotatedSentence> sentences,
                         std::uint64_t seed);

// Every idiomatic sentence plus an equal number of randomly chosen literal
// ones (fewer if not enough exist).
Corpus BalancedIdiomSet(std::span<const AnnotatedSentence> sentences,
                        std::uint64_t seed);

std::vector<std::string> DistinctExpressions(
    std::span<const AnnotatedSentence> sentences);

// Three-section id list: "[train]", "[test]", "[dev]" headers followed by one
// sentence id per line.
void WriteSplit(const DataSplit& split, std::span<const AnnotatedSentence> sentences,
                const std::filesystem::path& path);
DataSplit ReadSplit(const std::filesystem::path& path,
                    std::span<const AnnotatedSentence> sentences);

struct SyntheticCorpusOptions {
  std::size_t sentences = 1000;
  std::size_t expressions = 20;
  std::size_t vocabulary = 400;
  std::size_t min_length = 8;
  std::size_t max_length = 20;
  std::uint64_t seed = 1;
};

// Test-double corpus: filler tokens plus one 2-3 token expression per
// sentence. Expression sizes are skewed and each expression has its own
// idiomatic rate in [0.45, 0.95].
Corpus MakeSyntheticCorpus(const SyntheticCorpusOptions& options);

}  // namespace mice

#endif  // MICE_CORPUS_H_
