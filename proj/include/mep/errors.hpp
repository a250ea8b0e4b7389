#pragma once

#include <stdexcept>
#include <string>

namespace mep {

enum class Errc {
  non_power_of_two,
  degenerate_interval,
  not_hermitian,
  domain_violation,
  basis_mismatch,
  uncertainty_violation,
  minimal_uncertainty_boundary,
  truncation_insufficient,
  not_minimal,
  infeasible,
  no_convergence,
  resolution_insufficient,
  non_finite,
  grid_mismatch,
  grid_too_large,
  pauli_exclusion,
  probe_not_local,
  io_error,
  config_error,
  internal_check,
};

enum class ErrCategory { usage, physics, numerical, io };

const char* errc_name(Errc c);
ErrCategory errc_category(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg),
        code_(code) {}

  Errc code() const { return code_; }
  ErrCategory category() const { return errc_category(code_); }

 private:
  Errc code_;
};

// Process exit codes: 0 success, 2 usage/config/io, 3 physics, 4 numerical.
int exit_code_for(const Error& e);

}  // namespace mep
