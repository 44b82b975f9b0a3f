#include "mice/report.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mice {
namespace {

using Json = nlohmann::ordered_json;

std::string Fixed4(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

double Round4(double x) { return std::round(x * 1e4) / 1e4; }

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

ResultRow MakeRow(std::string system, std::string dataset, std::size_t train_size,
                  std::size_t test_size, const Metrics& metrics) {
  ResultRow row;
  row.system = std::move(system);
  row.dataset = std::move(dataset);
  row.level = metrics.counts.level;
  row.train_size = train_size;
  row.test_size = test_size;
  row.counts = metrics.counts;
  row.ca = metrics.ca;
  row.f1 = metrics.f1;
  return row;
}

std::vector<HistogramBin> Histogram(std::span<const double> values, std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("histogram needs at least one bin");
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].low = static_cast<double>(b) / static_cast<double>(bins);
  }
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("histogram value outside [0, 1]");
    auto b = static_cast<std::size_t>(std::floor(v * static_cast<double>(bins) + 1e-9));
    ++out[std::min(b, bins - 1)].count;
  }
  return out;
}

ReportFormat ParseReportFormat(const std::string& name) {
  if (name == "tsv") return ReportFormat::kTsv;
  if (name == "json") return ReportFormat::kJson;
  throw std::invalid_argument("unknown report format '" + name + "' (tsv or json)");
}

std::string ResultsTsv(const EvalReport& report) {
  std::ostringstream out;
  out << "system\tdataset\tlevel\ttrain_size\ttest_size\ttp\tfp\ttn\tfn\tca\tf1\n";
  for (const auto& r : report.results) {
    out << r.system << '\t' << r.dataset << '\t' << TaskName(r.level) << '\t' << r.train_size
        << '\t' << r.test_size << '\t' << r.counts.tp << '\t' << r.counts.fp << '\t'
        << r.counts.tn << '\t' << r.counts.fn << '\t' << Fixed4(r.ca) << '\t' << Fixed4(r.f1)
        << '\n';
  }
  return out.str();
}

std::string ExpressionsTsv(const EvalReport& report) {
  std::ostringstream out;
  out << "expression\tf1\tdetected\ttest_sentences\n";
  for (const auto& e : report.expressions) {
    out << e.expression << '\t' << Fixed4(e.f1) << '\t' << e.detected << '\t'
        << e.test_sentences << '\n';
  }
  return out.str();
}

std::string HistogramTsv(const EvalReport& report) {
  std::ostringstream out;
  out << "bin_low\tcount\n";
  for (const auto& h : report.histogram) out << Fixed4(h.low) << '\t' << h.count << '\n';
  return out.str();
}

std::string ReportJson(const EvalReport& report) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["experiment"] = report.experiment;
  j["split"] = report.split;
  Json meta = Json::object();
  for (const auto& [k, v] : report.metadata) meta[k] = v;
  j["metadata"] = meta;
  Json results = Json::array();
  for (const auto& r : report.results) {
    results.push_back({{"system", r.system},
                       {"dataset", r.dataset},
                       {"level", TaskName(r.level)},
                       {"train_size", r.train_size},
                       {"test_size", r.test_size},
                       {"tp", r.counts.tp},
                       {"fp", r.counts.fp},
                       {"tn", r.counts.tn},
                       {"fn", r.counts.fn},
                       {"ca", Round4(r.ca)},
                       {"f1", Round4(r.f1)}});
  }
  j["results"] = results;
  Json expressions = Json::array();
  for (const auto& e : report.expressions) {
    expressions.push_back({{"expression", e.expression},
                           {"f1", Round4(e.f1)},
                           {"detected", e.detected},
                           {"test_sentences", e.test_sentences}});
  }
  j["expressions"] = expressions;
  Json histogram = Json::array();
  for (const auto& h : report.histogram) {
    histogram.push_back({{"bin_low", Round4(h.low)}, {"count", h.count}});
  }
  j["histogram"] = histogram;
  return j.dump(2) + "\n";
}

EvalReport ParseReportJson(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("report is not valid JSON: ") + e.what());
  }
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kReportSchemaVersion) {
      throw FormatError("unsupported report schema_version " + std::to_string(version));
    }
    EvalReport report;
    report.experiment = j.at("experiment").get<std::string>();
    report.split = j.at("split").get<std::string>();
    for (const auto& [k, v] : j.at("metadata").items()) {
      report.metadata[k] = v.get<std::string>();
    }
    for (const auto& r : j.at("results")) {
      ResultRow row;
      row.system = r.at("system").get<std::string>();
      row.dataset = r.at("dataset").get<std::string>();
      row.level = ParseTask(r.at("level").get<std::string>());
      row.train_size = r.at("train_size").get<std::size_t>();
      row.test_size = r.at("test_size").get<std::size_t>();
      row.counts.tp = r.at("tp").get<std::size_t>();
      row.counts.fp = r.at("fp").get<std::size_t>();
      row.counts.tn = r.at("tn").get<std::size_t>();
      row.counts.fn = r.at("fn").get<std::size_t>();
      row.counts.level = row.level;
      row.ca = r.at("ca").get<double>();
      row.f1 = r.at("f1").get<double>();
      report.results.push_back(std::move(row));
    }
    for (const auto& e : j.at("expressions")) {
      report.expressions.push_back({e.at("expression").get<std::string>(),
                                    e.at("f1").get<double>(),
                                    e.at("detected").get<std::size_t>(),
                                    e.at("test_sentences").get<std::size_t>()});
    }
    for (const auto& h : j.at("histogram")) {
      report.histogram.push_back({h.at("bin_low").get<double>(), h.at("count").get<std::size_t>()});
    }
    return report;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
}

std::vector<std::filesystem::path> EmitReport(const EvalReport& report, ReportFormat format,
                                              const std::filesystem::path& base) {
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& suffix, const std::string& text) {
    std::filesystem::path p = base;
    p += suffix;
    WriteText(p, text);
    written.push_back(p);
  };
  if (format == ReportFormat::kJson) {
    emit(".json", ReportJson(report));
    return written;
  }
  emit(".tsv", ResultsTsv(report));
  if (!report.expressions.empty()) emit(".expressions.tsv", ExpressionsTsv(report));
  if (!report.histogram.empty()) emit(".histogram.tsv", HistogramTsv(report));
  return written;
}

}  // namespace mice
