#ifndef MICE_METRICS_H_
#define MICE_METRICS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "mice/common.h"
#include "mice/corpus.h"

namespace mice {

// Positive class is IDIOMATIC (label 1).
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  Task level = Task::kSentence;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

struct Metrics {
  ConfusionCounts counts;
  double ca = 0.0;  // (tp + tn) / total
  double f1 = 0.0;  // 2tp / (2tp + fp + fn); 0 when the denominator is 0
};

Metrics Score(std::span<const int> predictions, std::span<const int> gold, Task level);
Metrics FromCounts(const ConfusionCounts& counts);

// Gold units of a corpus: one per token (all tokens, or only expression
// tokens when expression_tokens_only) or one per sentence.
std::vector<int> GoldUnits(std::span<const AnnotatedSentence> sentences, Task task,
                           bool expression_tokens_only = false);
// Selects the per-token entries that GoldUnits keeps. Identity for the
// sentence task or when expression_tokens_only is false.
std::vector<double> FilterUnits(std::span<const AnnotatedSentence> sentences,
                                std::span<const double> per_unit, Task task,
                                bool expression_tokens_only);

std::vector<int> Threshold(std::span<const double> positive_probs, double cut = 0.5);

}  // namespace mice

#endif  // MICE_METRICS_H_
