#pragma once

#include <stdexcept>
#include <string>

namespace mtlen {

enum class ErrorKind {
  InvalidArgument,
  Config,
  Io,
  Infeasible,           // requested target unreachable under the Lambert-W_alpha bound
  NonPositiveFreePool,  // T_tot <= N * L_bar
  BracketFailure,
  StepFailure,
  EmptyPool,
  ZeroSignal,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mtlen
