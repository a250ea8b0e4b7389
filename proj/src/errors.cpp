#include "mep/errors.hpp"

namespace mep {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::non_power_of_two: return "NonPowerOfTwo";
    case Errc::degenerate_interval: return "DegenerateInterval";
    case Errc::not_hermitian: return "NotHermitian";
    case Errc::domain_violation: return "DomainViolation";
    case Errc::basis_mismatch: return "BasisMismatch";
    case Errc::uncertainty_violation: return "UncertaintyViolation";
    case Errc::minimal_uncertainty_boundary: return "MinimalUncertaintyBoundary";
    case Errc::truncation_insufficient: return "TruncationInsufficient";
    case Errc::not_minimal: return "NotMinimal";
    case Errc::infeasible: return "Infeasible";
    case Errc::no_convergence: return "NoConvergence";
    case Errc::resolution_insufficient: return "ResolutionInsufficient";
    case Errc::non_finite: return "NonFinite";
    case Errc::grid_mismatch: return "GridMismatch";
    case Errc::grid_too_large: return "GridTooLarge";
    case Errc::pauli_exclusion: return "PauliExclusion";
    case Errc::probe_not_local: return "ProbeNotLocal";
    case Errc::io_error: return "IoError";
    case Errc::config_error: return "ConfigError";
    case Errc::internal_check: return "InternalCheck";
  }
  return "UnknownError";
}

ErrCategory errc_category(Errc c) {
  switch (c) {
    case Errc::non_power_of_two:
    case Errc::degenerate_interval:
    case Errc::not_hermitian:
    case Errc::basis_mismatch:
    case Errc::grid_mismatch:
    case Errc::grid_too_large:
    case Errc::config_error:
      return ErrCategory::usage;
    case Errc::domain_violation:
    case Errc::uncertainty_violation:
    case Errc::minimal_uncertainty_boundary:
    case Errc::not_minimal:
    case Errc::infeasible:
    case Errc::pauli_exclusion:
    case Errc::probe_not_local:
      return ErrCategory::physics;
    case Errc::truncation_insufficient:
    case Errc::no_convergence:
    case Errc::resolution_insufficient:
    case Errc::non_finite:
    case Errc::internal_check:
      return ErrCategory::numerical;
    case Errc::io_error:
      return ErrCategory::io;
  }
  return ErrCategory::usage;
}

int exit_code_for(const Error& e) {
  switch (e.category()) {
    case ErrCategory::physics: return 3;
    case ErrCategory::numerical: return 4;
    case ErrCategory::usage:
    case ErrCategory::io: return 2;
  }
  return 2;
}

}  // namespace mep
