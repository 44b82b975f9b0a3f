#include "mice/cli/config.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mice/common.h"

namespace mice::cli {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitList(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string Num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("config key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

bool ParseBool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw std::invalid_argument("config key '" + key + "': expected true or false, got '" + text +
                              "'");
}

std::string Join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

const std::set<std::string>& KnownKeys() {
  static const std::set<std::string> keys = {
      "seed", "split_seed", "corpus", "archive", "out", "language", "filter_agreement", "task",
      "split", "ratios", "test_fraction", "split_file", "expression_tokens_only", "score_dev",
      "epochs", "learning_rate", "rho", "epsilon", "batch_size", "hidden", "dropout",
      "clip_norm", "systems", "system", "svm_lambda", "svm_epochs", "svm_window",
      "mm_components", "mm_ridge", "mm_shared_covariance", "fractions", "report_format",
      "test_languages", "synth_sentences", "synth_expressions", "synth_dim", "synth_signal"};
  return keys;
}

bool IsTestSetKey(const std::string& key) {
  if (key.rfind("test.", 0) != 0) return false;
  const auto dot = key.rfind('.');
  const std::string field = key.substr(dot + 1);
  return dot > 5 && (field == "corpus" || field == "archive");
}

}  // namespace

Config Config::Parse(std::istream& in) {
  Config config;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw FormatError("expected 'key = value'", number);
    const std::string key = Trim(t.substr(0, eq));
    if (key.empty()) throw FormatError("empty key", number);
    config.values_[key] = Trim(t.substr(eq + 1));
  }
  return config;
}

Config Config::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  try {
    return Parse(in);
  } catch (const FormatError& e) {
    throw e.WithContext(path.string());
  }
}

void Config::Set(const std::string& key, const std::string& value) { values_[key] = value; }

void Config::SetAssignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || Trim(assignment.substr(0, eq)).empty()) {
    throw std::invalid_argument("expected key=value, got '" + assignment + "'");
  }
  Set(Trim(assignment.substr(0, eq)), Trim(assignment.substr(eq + 1)));
}

std::optional<std::string> Config::Get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

ExperimentConfig Resolve(const Config& config) {
  for (const auto& [key, value] : config.values()) {
    if (!KnownKeys().count(key) && !IsTestSetKey(key)) {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
  ExperimentConfig c;
  auto get = [&](const std::string& key) { return config.Get(key); };
  const auto seed = get("seed");
  if (!seed) throw std::invalid_argument("config key 'seed' is required");
  c.seed = ParseNumber<std::uint64_t>("seed", *seed);
  c.split_seed = c.seed;
  if (auto v = get("split_seed")) c.split_seed = ParseNumber<std::uint64_t>("split_seed", *v);
  if (auto v = get("corpus")) c.corpus = *v;
  if (auto v = get("archive")) c.archive = *v;
  if (auto v = get("out")) c.out = *v;
  if (auto v = get("language")) c.language = *v;
  if (auto v = get("filter_agreement")) c.filter_agreement = ParseBool("filter_agreement", *v);
  if (auto v = get("task")) c.task = ParseTask(*v);
  if (auto v = get("split")) c.split_mode = ParseSplitMode(*v);
  if (auto v = get("ratios")) {
    const auto parts = SplitList(*v, ':');
    if (parts.size() != 3) throw std::invalid_argument("config key 'ratios': expected a:b:c");
    double sum = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      sum += c.ratios[i] = ParseNumber<double>("ratios", parts[i]);
    }
    // Accept both fractions and percentages such as 63:30:7.
    if (sum > 1.5) {
      for (double& r : c.ratios) r /= sum;
    }
  }
  if (auto v = get("test_fraction")) c.test_fraction = ParseNumber<double>("test_fraction", *v);
  if (auto v = get("split_file")) c.split_file = *v;
  if (auto v = get("expression_tokens_only")) {
    c.expression_tokens_only = ParseBool("expression_tokens_only", *v);
  }
  if (auto v = get("score_dev")) c.score_dev = ParseBool("score_dev", *v);
  if (auto v = get("epochs")) c.train.epochs = ParseNumber<int>("epochs", *v);
  if (auto v = get("learning_rate")) {
    c.train.learning_rate = ParseNumber<double>("learning_rate", *v);
  }
  if (auto v = get("rho")) c.train.rho = ParseNumber<double>("rho", *v);
  if (auto v = get("epsilon")) c.train.epsilon = ParseNumber<double>("epsilon", *v);
  if (auto v = get("batch_size")) c.train.batch_size = ParseNumber<std::size_t>("batch_size", *v);
  if (auto v = get("hidden")) c.train.hidden = ParseNumber<std::size_t>("hidden", *v);
  if (auto v = get("dropout")) c.train.dropout = ParseNumber<double>("dropout", *v);
  if (auto v = get("clip_norm")) {
    if (*v == "none" || v->empty()) {
      c.train.clip_norm.reset();
    } else {
      c.train.clip_norm = ParseNumber<double>("clip_norm", *v);
    }
  }
  c.train.seed = c.seed;
  c.train.Validate();
  if (auto v = get("systems")) c.systems = SplitList(*v);
  if (auto v = get("system")) c.system = *v;
  if (auto v = get("svm_lambda")) c.svm_lambda = ParseNumber<double>("svm_lambda", *v);
  if (auto v = get("svm_epochs")) c.svm_epochs = ParseNumber<int>("svm_epochs", *v);
  if (auto v = get("svm_window")) c.svm_window = ParseNumber<std::size_t>("svm_window", *v);
  if (auto v = get("mm_components")) c.mm_components = ParseNumber<int>("mm_components", *v);
  if (auto v = get("mm_ridge")) c.mm_ridge = ParseNumber<double>("mm_ridge", *v);
  if (auto v = get("mm_shared_covariance")) {
    c.mm_shared_covariance = ParseBool("mm_shared_covariance", *v);
  }
  if (auto v = get("fractions")) {
    c.fractions.clear();
    for (const auto& f : SplitList(*v)) c.fractions.push_back(ParseNumber<double>("fractions", f));
  }
  if (auto v = get("report_format")) c.report_format = *v;
  if (c.report_format != "tsv" && c.report_format != "json") {
    throw std::invalid_argument("config key 'report_format': expected tsv or json");
  }
  if (auto v = get("test_languages")) {
    for (const auto& lang : SplitList(*v)) {
      TestSetConfig t;
      t.language = lang;
      const auto corpus = get("test." + lang + ".corpus");
      const auto archive = get("test." + lang + ".archive");
      if (!corpus || !archive) {
        throw std::invalid_argument("test language '" + lang +
                                    "' needs test." + lang + ".corpus and test." + lang +
                                    ".archive");
      }
      t.corpus = *corpus;
      t.archive = *archive;
      c.test_sets.push_back(std::move(t));
    }
  }
  if (auto v = get("synth_sentences")) {
    c.synth_sentences = ParseNumber<std::size_t>("synth_sentences", *v);
  }
  if (auto v = get("synth_expressions")) {
    c.synth_expressions = ParseNumber<std::size_t>("synth_expressions", *v);
  }
  if (auto v = get("synth_dim")) c.synth_dim = ParseNumber<std::size_t>("synth_dim", *v);
  if (auto v = get("synth_signal")) c.synth_signal = ParseNumber<double>("synth_signal", *v);
  return c;
}

std::string Render(const ExperimentConfig& c) {
  std::map<std::string, std::string> kv;
  kv["seed"] = std::to_string(c.seed);
  kv["split_seed"] = std::to_string(c.split_seed);
  kv["corpus"] = c.corpus.string();
  kv["archive"] = c.archive.string();
  kv["out"] = c.out.string();
  kv["language"] = c.language;
  kv["filter_agreement"] = c.filter_agreement ? "true" : "false";
  kv["task"] = TaskName(c.task);
  kv["split"] = SplitModeName(c.split_mode);
  kv["ratios"] = Num(c.ratios[0]) + ":" + Num(c.ratios[1]) + ":" + Num(c.ratios[2]);
  kv["test_fraction"] = Num(c.test_fraction);
  kv["split_file"] = c.split_file.string();
  kv["expression_tokens_only"] = c.expression_tokens_only ? "true" : "false";
  kv["score_dev"] = c.score_dev ? "true" : "false";
  kv["epochs"] = std::to_string(c.train.epochs);
  kv["learning_rate"] = Num(c.train.learning_rate);
  kv["rho"] = Num(c.train.rho);
  kv["epsilon"] = Num(c.train.epsilon);
  kv["batch_size"] = std::to_string(c.train.batch_size);
  kv["hidden"] = std::to_string(c.train.hidden);
  kv["dropout"] = Num(c.train.dropout);
  kv["clip_norm"] = c.train.clip_norm ? Num(*c.train.clip_norm) : "none";
  kv["systems"] = Join(c.systems);
  kv["system"] = c.system;
  kv["svm_lambda"] = Num(c.svm_lambda);
  kv["svm_epochs"] = std::to_string(c.svm_epochs);
  kv["svm_window"] = std::to_string(c.svm_window);
  kv["mm_components"] = std::to_string(c.mm_components);
  kv["mm_ridge"] = Num(c.mm_ridge);
  kv["mm_shared_covariance"] = c.mm_shared_covariance ? "true" : "false";
  std::vector<std::string> fractions;
  for (double f : c.fractions) fractions.push_back(Num(f));
  kv["fractions"] = Join(fractions);
  kv["report_format"] = c.report_format;
  std::vector<std::string> languages;
  for (const auto& t : c.test_sets) {
    languages.push_back(t.language);
    kv["test." + t.language + ".corpus"] = t.corpus.string();
    kv["test." + t.language + ".archive"] = t.archive.string();
  }
  kv["test_languages"] = Join(languages);
  kv["synth_sentences"] = std::to_string(c.synth_sentences);
  kv["synth_expressions"] = std::to_string(c.synth_expressions);
  kv["synth_dim"] = std::to_string(c.synth_dim);
  kv["synth_signal"] = Num(c.synth_signal);
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

void RequireExisting(const std::filesystem::path& path, const std::string& key) {
  if (path.empty()) throw std::invalid_argument("config key '" + key + "' is required");
  if (!std::filesystem::exists(path)) {
    throw std::invalid_argument(key + " does not exist: " + path.string());
  }
}

}  // namespace mice::cli
