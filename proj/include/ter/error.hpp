#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ter {

// Error codes used across the library. The CLI prints them as a
// single machine-parsable line: "CODE: human readable text".
enum class ErrorCode {
  Io,       // file cannot be opened / written
  Parse,    // malformed data file line
  Config,   // bad configuration value or unknown key
  Shape,    // tensor dimension mismatch
  Arg,      // invalid argument to an operation
  Numeric,  // non-finite value where a finite one is required
  Data,     // semantic data problem (unknown user/item, pool too small)
  State,    // cache/params mismatch, wrong mode
  Format,   // corrupt or truncated checkpoint
  Version,  // checkpoint format version mismatch
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ter
