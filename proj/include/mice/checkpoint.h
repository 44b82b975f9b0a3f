#ifndef MICE_CHECKPOINT_H_
#define MICE_CHECKPOINT_H_

#include <filesystem>
#include <map>
#include <string>

#include "mice/common.h"
#include "mice/gru.h"
#include "mice/trainer.h"

namespace mice {

struct Checkpoint {
  BiGruModel model;
  TrainConfig config;
  Task task = Task::kSentence;
  std::string provider_tag;  // embedding archive the model was trained on
};

// Layout, little-endian:
//   "MICECKP1" | u32 version (1) | u32 metadata length, UTF-8 "key=value\n"
//   lines | u32 tensor count | per tensor: u16 name length, name, u32 rows,
//   u32 cols, rows*cols f64 column-major.
void SaveCheckpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// "key=value" rendering of every TrainConfig field, defaults included.
std::map<std::string, std::string> DescribeConfig(const TrainConfig& config);

}  // namespace mice

#endif  // MICE_CHECKPOINT_H_
