#ifndef MICE_CLI_CONFIG_H_
#define MICE_CLI_CONFIG_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mice/common.h"
#include "mice/corpus.h"
#include "mice/trainer.h"

namespace mice::cli {

// Line-oriented "key = value" settings. Blank lines and lines starting with
// '#' are ignored. Later assignments override earlier ones.
class Config {
 public:
  static Config Parse(std::istream& in);
  static Config Load(const std::filesystem::path& path);

  void Set(const std::string& key, const std::string& value);
  // "key=value" from the command line.
  void SetAssignment(const std::string& assignment);
  std::optional<std::string> Get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct TestSetConfig {
  std::string language;
  std::filesystem::path corpus;   // .cupt, or the tab-separated corpus format
  std::filesystem::path archive;
};

// Every setting a command may read, defaults filled in.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  // Seed of the data split; defaults to `seed`. Models trained with
  // different seeds share a split when this is fixed.
  std::uint64_t split_seed = 0;
  std::filesystem::path corpus;
  std::filesystem::path archive;
  std::filesystem::path out = "mice_out";
  std::string language = "sl";
  bool filter_agreement = false;
  Task task = Task::kSentence;
  SplitMode split_mode = SplitMode::kRandom;
  std::array<double, 3> ratios{0.63, 0.30, 0.07};
  double test_fraction = 0.30;
  std::filesystem::path split_file;  // overrides the seeded split when set
  bool expression_tokens_only = false;
  bool score_dev = false;
  TrainConfig train;
  std::vector<std::string> systems{"majority", "all_positive", "svm", "mice"};
  std::string system = "mice";  // single-system protocols
  double svm_lambda = 1e-4;
  int svm_epochs = 20;
  std::size_t svm_window = 3;
  int mm_components = 1;
  double mm_ridge = 1e-6;
  bool mm_shared_covariance = false;
  std::vector<double> fractions{1.0, 0.8, 0.6, 0.4, 0.2, 0.1};
  std::string report_format = "tsv";
  std::vector<TestSetConfig> test_sets;
  // synth command
  std::size_t synth_sentences = 1000;
  std::size_t synth_expressions = 20;
  std::size_t synth_dim = 16;
  double synth_signal = 2.0;
};

// Builds the experiment config; throws std::invalid_argument on unknown keys,
// unparsable values, or a missing seed. Paths are checked by the commands
// that use them.
ExperimentConfig Resolve(const Config& config);

// Inverse of Resolve: every field as "key = value" lines, sorted by key.
std::string Render(const ExperimentConfig& config);

// Throws std::invalid_argument naming the key when the path does not exist.
void RequireExisting(const std::filesystem::path& path, const std::string& key);

}  // namespace mice::cli

#endif  // MICE_CLI_CONFIG_H_
