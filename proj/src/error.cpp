#include "mammosynth/error.hpp"

namespace mammosynth {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::out_of_bounds: return "out_of_bounds";
    case ErrorKind::io: return "io";
    case ErrorKind::format: return "format";
    case ErrorKind::numeric: return "numeric";
  }
  return "unknown";
}

}  // namespace mammosynth
