#pragma once

#include <stdexcept>
#include <string>

namespace moran {

enum class errc {
  invalid_dimension,
  invalid_state,
  index_out_of_range,
  ill_defined_incentive,
  unsupported,
  validation,
  parameter,
  closed_form_unavailable,
  reducible,
  convergence,
  numerical_consistency,
  not_reversible,
  schema,
  io,
};

inline const char* to_string(errc code) {
  switch (code) {
    case errc::invalid_dimension: return "invalid-dimension";
    case errc::invalid_state: return "invalid-state";
    case errc::index_out_of_range: return "index-out-of-range";
    case errc::ill_defined_incentive: return "ill-defined-incentive";
    case errc::unsupported: return "unsupported";
    case errc::validation: return "validation";
    case errc::parameter: return "parameter";
    case errc::closed_form_unavailable: return "closed-form-unavailable";
    case errc::reducible: return "reducible";
    case errc::convergence: return "convergence";
    case errc::numerical_consistency: return "numerical-consistency";
    case errc::not_reversible: return "not-reversible";
    case errc::schema: return "schema";
    case errc::io: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

  /// Non-convergence and internal consistency failures, as opposed to bad input.
  bool is_numerical() const noexcept {
    return code_ == errc::convergence || code_ == errc::numerical_consistency;
  }

 private:
  errc code_;
};

}  // namespace moran
