#ifndef MICE_REPORT_H_
#define MICE_REPORT_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mice/common.h"
#include "mice/metrics.h"

namespace mice {

inline constexpr int kReportSchemaVersion = 1;

struct ResultRow {
  std::string system;
  std::string dataset;  // "test", "dev", a language code, a fraction label...
  Task level = Task::kSentence;
  std::size_t train_size = 0;  // training sentences
  std::size_t test_size = 0;   // evaluated sentences
  ConfusionCounts counts;
  double ca = 0.0;
  double f1 = 0.0;

  bool operator==(const ResultRow&) const = default;
};

struct ExpressionRow {
  std::string expression;
  double f1 = 0.0;
  std::size_t detected = 0;        // true positives
  std::size_t test_sentences = 0;

  bool operator==(const ExpressionRow&) const = default;
};

struct HistogramBin {
  double low = 0.0;
  std::size_t count = 0;

  bool operator==(const HistogramBin&) const = default;
};

struct EvalReport {
  std::string experiment;
  std::string split;
  std::map<std::string, std::string> metadata;
  std::vector<ResultRow> results;
  std::vector<ExpressionRow> expressions;
  std::vector<HistogramBin> histogram;

  bool operator==(const EvalReport&) const = default;
};

ResultRow MakeRow(std::string system, std::string dataset, std::size_t train_size,
                  std::size_t test_size, const Metrics& metrics);

// `bins` equal-width bins over [0, 1]; a value of exactly 1 falls in the
// last bin.
std::vector<HistogramBin> Histogram(std::span<const double> values, std::size_t bins = 10);

enum class ReportFormat { kTsv, kJson };
ReportFormat ParseReportFormat(const std::string& name);

// Header plus one line per result row; fixed columns, 4-decimal floats.
std::string ResultsTsv(const EvalReport& report);
std::string ExpressionsTsv(const EvalReport& report);
std::string HistogramTsv(const EvalReport& report);
std::string ReportJson(const EvalReport& report);
// Accepts the output of ReportJson; throws FormatError otherwise.
EvalReport ParseReportJson(const std::string& text);

// TSV writes <base>.tsv, plus <base>.expressions.tsv and
// <base>.histogram.tsv when present. JSON writes <base>.json. Returns the
// files written.
std::vector<std::filesystem::path> EmitReport(const EvalReport& report, ReportFormat format,
                                              const std::filesystem::path& base);

}  // namespace mice

#endif  // MICE_REPORT_H_
