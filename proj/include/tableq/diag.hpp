#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace tableq {

// Position of a token or construct in an input file. line/col are 1-based;
// line 0 means "unknown".
struct SourcePos {
  std::string file;
  int line = 0;
  int col = 0;

  bool known() const { return line > 0; }
};

std::string to_string(const SourcePos& pos);

// The one error type thrown by parsers, the compiler, and the analysis
// passes. what() is "file:line:col: message" when the position is known.
class Error : public std::runtime_error {
 public:
  Error(SourcePos pos, const std::string& message);

  const SourcePos& where() const { return pos_; }
  const std::string& message() const { return message_; }

 private:
  SourcePos pos_;
  std::string message_;
};

[[noreturn]] inline void fail(SourcePos pos, std::string message) {
  throw Error(std::move(pos), std::move(message));
}

}  // namespace tableq
