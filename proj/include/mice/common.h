#ifndef MICE_COMMON_H_
#define MICE_COMMON_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mice {

enum class Task { kToken, kSentence };

const char* TaskName(Task task);
Task ParseTask(const std::string& name);

// Malformed input file. `line` is 1-based, 0 when not line-oriented.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t line = 0);
  std::size_t line() const { return line_; }
  // The same error with `context` (typically a file name) prepended.
  FormatError WithContext(const std::string& context) const;

 private:
  struct Verbatim {};
  FormatError(Verbatim, const std::string& message, std::size_t line)
      : std::runtime_error(message), line_(line) {}

  std::size_t line_;
};

}  // namespace mice

#endif  // MICE_COMMON_H_
