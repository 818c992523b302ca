#pragma once

#include <stdexcept>
#include <string>

namespace drslip {

enum class ErrorKind {
  validation,
  pole,
  nonconvergence,
  singular,
  degenerate_geometry,
  lift_off,
  step_exhaustion,
  nonfinite,
  consistency,
  infeasible,
  out_of_horizon,
  cap,
  io
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::pole: return "pole";
    case ErrorKind::nonconvergence: return "nonconvergence";
    case ErrorKind::singular: return "singular";
    case ErrorKind::degenerate_geometry: return "degenerate_geometry";
    case ErrorKind::lift_off: return "lift_off";
    case ErrorKind::step_exhaustion: return "step_exhaustion";
    case ErrorKind::nonfinite: return "nonfinite";
    case ErrorKind::consistency: return "consistency";
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::out_of_horizon: return "out_of_horizon";
    case ErrorKind::cap: return "cap";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

// Every failure the library reports carries a kind so callers (the CLI in
// particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace drslip
