#ifndef MICE_PROTOCOLS_H_
#define MICE_PROTOCOLS_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mice/corpus.h"
#include "mice/report.h"
#include "mice/systems.h"

namespace mice {

struct ProtocolOptions {
  std::uint64_t seed = 0;
  std::array<double, 3> ratios{0.63, 0.30, 0.07};  // random split
  double test_fraction = 0.30;  // expression-disjoint and stratified splits
  std::vector<Task> tasks{Task::kToken, Task::kSentence};
  // Token task: score only tokens inside the expression.
  bool expression_tokens_only = false;
  // Also score the dev portion (diagnostics only).
  bool score_dev = false;
};

// Fits `system` on `train` and scores it on `test`.
ResultRow FitAndScore(System& system, std::span<const AnnotatedSentence> train,
                      std::span<const AnnotatedSentence> test, const ArchiveSet& archives,
                      Task task, const std::string& dataset, bool expression_tokens_only = false);

// Fits every system on split.train for every task in options.tasks and
// scores it on split.test (and split.dev when options.score_dev).
EvalReport RunSplitEval(const std::string& experiment, const Corpus& corpus,
                        const ArchiveSet& archives, std::span<System* const> systems,
                        const DataSplit& split, const ProtocolOptions& options);

// Random split at options.ratios.
EvalReport RunInTrainingEval(const Corpus& corpus, const ArchiveSet& archives,
                             std::span<System* const> systems, const ProtocolOptions& options);

// Expression-disjoint split at options.test_fraction.
EvalReport RunOutOfTrainingEval(const Corpus& corpus, const ArchiveSet& archives,
                                std::span<System* const> systems,
                                const ProtocolOptions& options);

// Leave-one-expression-out for every expression; one expression row each
// plus a 10-bin F1 histogram.
EvalReport RunPerExpressionEval(const Corpus& corpus, const ArchiveSet& archives,
                                System& system, Task task = Task::kSentence);

inline constexpr std::array<double, 6> kAblationFractions{1.0, 0.8, 0.6, 0.4, 0.2, 0.1};

// One random split; the training part is subsampled to each fraction while
// the test part stays fixed.
EvalReport RunSizeAblation(const Corpus& corpus, const ArchiveSet& archives, System& system,
                           std::span<const double> fractions, const ProtocolOptions& options,
                           Task task = Task::kSentence);

// Balanced (per-expression) and size-matched imbalanced corpora, each with
// a stratified split; `system` plus majority and all-positive rows on both.
EvalReport RunBalancedStudy(const Corpus& corpus, const ArchiveSet& archives, System& system,
                            const ProtocolOptions& options);

struct LanguageTestSet {
  std::string language;
  Corpus corpus;
  ArchiveSet archives;
};

// Trains on the whole training corpus and scores sentence level on each
// test set, with an all-positive reference row per language.
EvalReport RunCrosslingualEval(const Corpus& train_corpus, const ArchiveSet& train_archives,
                               std::span<const LanguageTestSet> tests, System& system);

}  // namespace mice

#endif  // MICE_PROTOCOLS_H_
