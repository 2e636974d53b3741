#pragma once

#include <stdexcept>
#include <string>

namespace aucoder {

enum class ErrorCode {
  InvalidArgument = 1,
  Io = 2,
  Parse = 3,
  Degenerate = 4,
  OutOfRange = 5,
  MaskMismatch = 6,
};

// Every failure in the core surfaces as an Error; the C API maps the code
// onto aucoder_status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace aucoder
