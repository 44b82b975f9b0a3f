#include "mice/metrics.h"

#include <stdexcept>

namespace mice {

Metrics FromCounts(const ConfusionCounts& c) {
  Metrics m;
  m.counts = c;
  const std::size_t total = c.total();
  m.ca = total ? static_cast<double>(c.tp + c.tn) / static_cast<double>(total) : 0.0;
  const std::size_t denom = 2 * c.tp + c.fp + c.fn;
  m.f1 = denom ? static_cast<double>(2 * c.tp) / static_cast<double>(denom) : 0.0;
  return m;
}

Metrics Score(std::span<const int> predictions, std::span<const int> gold, Task level) {
  if (predictions.size() != gold.size()) {
    throw std::invalid_argument("prediction count " + std::to_string(predictions.size()) +
                                " differs from gold count " + std::to_string(gold.size()));
  }
  ConfusionCounts c;
  c.level = level;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool p = predictions[i] != 0;
    const bool g = gold[i] != 0;
    if (p && g) {
      ++c.tp;
    } else if (p) {
      ++c.fp;
    } else if (g) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return FromCounts(c);
}

std::vector<int> GoldUnits(std::span<const AnnotatedSentence> sentences, Task task,
                           bool expression_tokens_only) {
  std::vector<int> gold;
  for (const auto& s : sentences) {
    if (task == Task::kSentence) {
      gold.push_back(s.idiomatic() ? 1 : 0);
      continue;
    }
    for (TokenLabel l : s.token_labels) {
      if (expression_tokens_only && l == TokenLabel::kOutside) continue;
      gold.push_back(l == TokenLabel::kIdiomatic ? 1 : 0);
    }
  }
  return gold;
}

std::vector<double> FilterUnits(std::span<const AnnotatedSentence> sentences,
                                std::span<const double> per_unit, Task task,
                                bool expression_tokens_only) {
  if (task == Task::kSentence || !expression_tokens_only) {
    return {per_unit.begin(), per_unit.end()};
  }
  std::vector<double> kept;
  std::size_t k = 0;
  for (const auto& s : sentences) {
    for (TokenLabel l : s.token_labels) {
      if (k >= per_unit.size()) throw std::invalid_argument("too few per-token values");
      if (l != TokenLabel::kOutside) kept.push_back(per_unit[k]);
      ++k;
    }
  }
  if (k != per_unit.size()) throw std::invalid_argument("too many per-token values");
  return kept;
}

std::vector<int> Threshold(std::span<const double> positive_probs, double cut) {
  std::vector<int> out;
  out.reserve(positive_probs.size());
  for (double p : positive_probs) out.push_back(p >= cut ? 1 : 0);
  return out;
}

}  // namespace mice
