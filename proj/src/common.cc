#include "mice/common.h"

namespace mice {

const char* TaskName(Task task) {
  return task == Task::kToken ? "token" : "sentence";
}

Task ParseTask(const std::string& name) {
  if (name == "token") return Task::kToken;
  if (name == "sentence") return Task::kSentence;
  throw std::invalid_argument("unknown task '" + name +
                              "' (expected token or sentence)");
}

FormatError::FormatError(const std::string& what, std::size_t line)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what
                              : what),
      line_(line) {}

FormatError FormatError::WithContext(const std::string& context) const {
  return FormatError(Verbatim{}, context + ": " + what(), line_);
}

}  // namespace mice
