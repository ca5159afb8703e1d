#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace conelab {

enum class ErrorKind {
  DimensionTooSmall,
  Domain,
  ConvergenceFailure,
  InvalidGrid,
  ZeroFunction,
  GridMismatch,
  InvalidAlpha,
  InvalidM,
  NonpositiveG0,
  InvalidRegime,
  PastBlowup,
  InvalidQ,
  InvalidConfig,
  NonfiniteState,
  ShortTrace,
  Parse,
  Validation,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so that
/// callers (the CLI in particular) can map it to an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace conelab
