#include "mtlen/errors.hpp"

namespace mtlen {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::NonPositiveFreePool: return "non_positive_free_pool";
    case ErrorKind::BracketFailure: return "bracket_failure";
    case ErrorKind::StepFailure: return "step_failure";
    case ErrorKind::EmptyPool: return "empty_pool";
    case ErrorKind::ZeroSignal: return "zero_signal";
  }
  return "unknown";
}

}  // namespace mtlen
