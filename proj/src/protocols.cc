#include "mice/protocols.h"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "mice/metrics.h"
#include "mice/rng.h"

namespace mice {
namespace {

std::string Ratio(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string Describe(const DataSplit& split) {
  return std::string(SplitModeName(split.mode)) + " train=" + std::to_string(split.train.size()) +
         " test=" + std::to_string(split.test.size()) + " dev=" + std::to_string(split.dev.size());
}

}  // namespace

ResultRow FitAndScore(System& system, std::span<const AnnotatedSentence> train,
                      std::span<const AnnotatedSentence> test, const ArchiveSet& archives,
                      Task task, const std::string& dataset, bool expression_tokens_only) {
  system.Fit(train, archives, task);
  const auto scores = system.Predict(test, archives, task);
  const auto kept = FilterUnits(test, scores, task, expression_tokens_only);
  const Metrics m =
      Score(Threshold(kept), GoldUnits(test, task, expression_tokens_only), task);
  return MakeRow(system.name(), dataset, train.size(), test.size(), m);
}

EvalReport RunSplitEval(const std::string& experiment, const Corpus& corpus,
                        const ArchiveSet& archives, std::span<System* const> systems,
                        const DataSplit& split, const ProtocolOptions& options) {
  CheckPartition(split, corpus.size());
  EvalReport report;
  report.experiment = experiment;
  report.split = Describe(split);
  report.metadata["seed"] = std::to_string(options.seed);
  report.metadata["corpus_sentences"] = std::to_string(corpus.size());
  report.metadata["expression_tokens_only"] = options.expression_tokens_only ? "true" : "false";
  const Corpus train = Select(corpus, split.train);
  const Corpus test = Select(corpus, split.test);
  const Corpus dev = Select(corpus, split.dev);
  for (Task task : options.tasks) {
    for (System* system : systems) {
      report.results.push_back(FitAndScore(*system, train, test, archives, task, "test",
                                           options.expression_tokens_only));
      if (options.score_dev && !dev.empty()) {
        const auto scores = system->Predict(dev, archives, task);
        const auto kept = FilterUnits(dev, scores, task, options.expression_tokens_only);
        const Metrics m = Score(Threshold(kept),
                                GoldUnits(dev, task, options.expression_tokens_only), task);
        report.results.push_back(MakeRow(system->name(), "dev", train.size(), dev.size(), m));
      }
    }
  }
  return report;
}

EvalReport RunInTrainingEval(const Corpus& corpus, const ArchiveSet& archives,
                             std::span<System* const> systems, const ProtocolOptions& options) {
  const DataSplit split = SplitRandom(corpus, options.ratios, DeriveSeed(options.seed, "split"));
  EvalReport report = RunSplitEval("in_training", corpus, archives, systems, split, options);
  report.metadata["ratios"] = Ratio(options.ratios[0]) + ":" + Ratio(options.ratios[1]) + ":" +
                              Ratio(options.ratios[2]);
  return report;
}

EvalReport RunOutOfTrainingEval(const Corpus& corpus, const ArchiveSet& archives,
                                std::span<System* const> systems,
                                const ProtocolOptions& options) {
  const DataSplit split = SplitExpressionDisjoint(corpus, options.test_fraction,
                                                  DeriveSeed(options.seed, "split"));
  EvalReport report = RunSplitEval("out_of_training", corpus, archives, systems, split, options);
  report.metadata["test_fraction"] = Ratio(options.test_fraction);
  return report;
}

EvalReport RunPerExpressionEval(const Corpus& corpus, const ArchiveSet& archives,
                                System& system, Task task) {
  const auto expressions = DistinctExpressions(corpus);
  if (expressions.size() < 2) {
    throw std::invalid_argument("per-expression evaluation needs at least 2 expressions");
  }
  EvalReport report;
  report.experiment = "per_expression";
  report.split = "leave_one_expression_out folds=" + std::to_string(expressions.size());
  report.metadata["corpus_sentences"] = std::to_string(corpus.size());
  report.metadata["level"] = TaskName(task);
  std::vector<double> f1s;
  for (const auto& expression : expressions) {
    const DataSplit split = SplitLeaveOneExpressionOut(corpus, expression);
    CheckPartition(split, corpus.size());
    const Corpus train = Select(corpus, split.train);
    const Corpus test = Select(corpus, split.test);
    for (const auto& s : train) {
      if (s.expression == expression) {
        throw std::logic_error("held-out expression '" + expression + "' leaked into training");
      }
    }
    const ResultRow row = FitAndScore(system, train, test, archives, task, expression);
    report.expressions.push_back({expression, row.f1, row.counts.tp, test.size()});
    f1s.push_back(row.f1);
  }
  report.histogram = Histogram(f1s, 10);
  return report;
}

EvalReport RunSizeAblation(const Corpus& corpus, const ArchiveSet& archives, System& system,
                           std::span<const double> fractions, const ProtocolOptions& options,
                           Task task) {
  const DataSplit split = SplitRandom(corpus, options.ratios, DeriveSeed(options.seed, "split"));
  CheckPartition(split, corpus.size());
  const Corpus train = Select(corpus, split.train);
  const Corpus test = Select(corpus, split.test);
  EvalReport report;
  report.experiment = "size_ablation";
  report.split = Describe(split);
  report.metadata["seed"] = std::to_string(options.seed);
  report.metadata["corpus_sentences"] = std::to_string(corpus.size());
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    const Corpus part =
        Subsample(train, fractions[i], DeriveSeed(DeriveSeed(options.seed, "subsample"), i));
    report.results.push_back(
        FitAndScore(system, part, test, archives, task, "fraction=" + Ratio(fractions[i])));
  }
  return report;
}

EvalReport RunBalancedStudy(const Corpus& corpus, const ArchiveSet& archives, System& system,
                            const ProtocolOptions& options) {
  EvalReport report;
  report.experiment = "balanced_study";
  report.split = "stratified test_fraction=" + Ratio(options.test_fraction);
  report.metadata["seed"] = std::to_string(options.seed);
  report.metadata["corpus_sentences"] = std::to_string(corpus.size());
  MajoritySystem majority;
  AllPositiveSystem all_positive;
  const std::pair<std::string, Corpus> variants[] = {
      {"balanced", BalancePerExpression(corpus, DeriveSeed(options.seed, "balance"))},
      {"imbalanced", SizeMatchedSubset(corpus, DeriveSeed(options.seed, "size-match"))},
  };
  for (const auto& [dataset, data] : variants) {
    report.metadata[dataset + "_sentences"] = std::to_string(data.size());
    const DataSplit split =
        SplitStratified(data, options.test_fraction, DeriveSeed(options.seed, "split"));
    CheckPartition(split, data.size());
    const Corpus train = Select(data, split.train);
    const Corpus test = Select(data, split.test);
    for (System* s : std::initializer_list<System*>{&system, &majority, &all_positive}) {
      report.results.push_back(FitAndScore(*s, train, test, archives, Task::kSentence, dataset));
    }
  }
  return report;
}

EvalReport RunCrosslingualEval(const Corpus& train_corpus, const ArchiveSet& train_archives,
                               std::span<const LanguageTestSet> tests, System& system) {
  EvalReport report;
  report.experiment = "crosslingual";
  report.split = "train=" + std::to_string(train_corpus.size());
  system.Fit(train_corpus, train_archives, Task::kSentence);
  AllPositiveSystem all_positive;
  for (const auto& t : tests) {
    const auto gold = GoldUnits(t.corpus, Task::kSentence);
    const Metrics m = Score(Threshold(system.Predict(t.corpus, t.archives, Task::kSentence)),
                            gold, Task::kSentence);
    report.results.push_back(MakeRow(system.name(), t.language, train_corpus.size(),
                                     t.corpus.size(), m));
    const Metrics d = Score(Threshold(all_positive.Predict(t.corpus, t.archives, Task::kSentence)),
                            gold, Task::kSentence);
    report.results.push_back(
        MakeRow(all_positive.name(), t.language, train_corpus.size(), t.corpus.size(), d));
  }
  return report;
}

}  // namespace mice
