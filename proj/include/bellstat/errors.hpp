#pragma once

#include <stdexcept>
#include <string>

namespace bellstat {

// Machine-readable failure categories.  The CLI maps `code_name()` directly
// into its structured error object, so these names are stable API.
enum class errc {
  domain,          // argument outside the documented domain
  convergence,     // iteration or bracketing failed to converge
  infeasible,      // no parameter value satisfies the constraints
  no_violation,    // the requested quantity needs an observed violation
  invalid_counts,  // strategy multiplicities inconsistent with the scenario
  too_large,       // enumeration size exceeds the configured cap
  unsupported,     // setting count outside the implemented family
  invalid_model,   // source-model parameters out of range
  no_crossover,    // crossover equation has no root
  unbounded,       // the requested bound cannot be inverted
  precondition,    // caller-declared precondition violated
  io,              // file output failure
};

inline const char* errc_name(errc code) noexcept {
  switch (code) {
    case errc::domain: return "domain_error";
    case errc::convergence: return "convergence_error";
    case errc::infeasible: return "infeasible";
    case errc::no_violation: return "no_violation";
    case errc::invalid_counts: return "invalid_counts";
    case errc::too_large: return "enumeration_too_large";
    case errc::unsupported: return "unsupported_setting_count";
    case errc::invalid_model: return "invalid_model";
    case errc::no_crossover: return "no_crossover";
    case errc::unbounded: return "unbounded";
    case errc::precondition: return "precondition_failed";
    case errc::io: return "io_error";
  }
  return "unknown_error";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& detail)
      : std::runtime_error(detail), code_(code) {}

  errc code() const noexcept { return code_; }
  const char* code_name() const noexcept { return errc_name(code_); }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& detail) {
  throw error(code, detail);
}

}  // namespace bellstat
