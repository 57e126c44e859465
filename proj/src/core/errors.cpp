#include "loqi/core/errors.hpp"

namespace loqi {

std::string_view category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::validation:
      return "validation";
    case ErrorCategory::format:
      return "format";
    case ErrorCategory::environment:
      return "environment";
    case ErrorCategory::external_tool:
      return "external-tool";
    case ErrorCategory::numeric:
      return "numeric";
    case ErrorCategory::io:
      return "io";
  }
  return "unknown";
}

}  // namespace loqi
