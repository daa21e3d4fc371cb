#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ness {

enum class ErrorKind {
  InvalidArgument,
  NotRelaxing,
  SolveFailed,
  StepTooLarge,
  NotConverged,
  InsufficientPoints,
  DegenerateNess,
  TooLarge,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind, so callers (the sweep
/// runner, the CLI) can label rows and pick exit codes without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& where, const std::string& what)
      : std::runtime_error(where + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for failures of the numerics (as opposed to bad input or I/O).
  bool is_numerical() const noexcept {
    return kind_ == ErrorKind::NotRelaxing || kind_ == ErrorKind::SolveFailed ||
           kind_ == ErrorKind::StepTooLarge || kind_ == ErrorKind::NotConverged ||
           kind_ == ErrorKind::DegenerateNess;
  }

 private:
  ErrorKind kind_;
};

}  // namespace ness
