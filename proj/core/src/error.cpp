#include "ipmn/error.hpp"

namespace ipmn {

std::string_view to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::io: return "io";
    case ErrorCategory::format: return "format";
    case ErrorCategory::invalid_argument: return "invalid_argument";
    case ErrorCategory::geometry: return "geometry";
    case ErrorCategory::numeric: return "numeric";
    case ErrorCategory::data: return "data";
    case ErrorCategory::leakage: return "leakage";
  }
  return "unknown";
}

}  // namespace ipmn
