#include "ter/error.hpp"

namespace ter {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return "E_IO";
    case ErrorCode::Parse: return "E_PARSE";
    case ErrorCode::Config: return "E_CONFIG";
    case ErrorCode::Shape: return "E_SHAPE";
    case ErrorCode::Arg: return "E_ARG";
    case ErrorCode::Numeric: return "E_NUMERIC";
    case ErrorCode::Data: return "E_DATA";
    case ErrorCode::State: return "E_STATE";
    case ErrorCode::Format: return "E_FORMAT";
    case ErrorCode::Version: return "E_VERSION";
  }
  return "E_UNKNOWN";
}

}  // namespace ter
