#include "spkid/error.hpp"

namespace spkid {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    case ErrorKind::format: return "format";
    case ErrorKind::insufficient_data: return "insufficient-data";
    case ErrorKind::missing_model: return "missing-model";
    case ErrorKind::numeric: return "numeric";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return 2;
    case ErrorKind::config: return 3;
    case ErrorKind::io: return 4;
    case ErrorKind::format: return 5;
    case ErrorKind::insufficient_data: return 6;
    case ErrorKind::missing_model: return 7;
    case ErrorKind::numeric: return 8;
  }
  return 1;
}

}  // namespace spkid
