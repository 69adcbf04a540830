#include "gdwave/error.hpp"

namespace gdwave {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_degree: return "invalid-degree";
    case Errc::mesh_too_coarse: return "mesh-too-coarse";
    case Errc::out_of_range: return "out-of-range";
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::not_positive_definite: return "not-positive-definite";
    case Errc::nonpositive_coefficient: return "nonpositive-coefficient";
    case Errc::max_iterations_exceeded: return "max-iterations-exceeded";
    case Errc::preconditioner_breakdown: return "preconditioner-breakdown";
    case Errc::eigensolver_failure: return "eigensolver-failure";
    case Errc::fast_path_unavailable: return "fast-path-unavailable";
    case Errc::unknown_tag: return "unknown-tag";
    case Errc::non_finite_state: return "non-finite-state";
    case Errc::io_failure: return "io-failure";
  }
  return "unknown-error";
}

bool is_validation_error(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_degree:
    case Errc::mesh_too_coarse:
    case Errc::out_of_range:
    case Errc::invalid_argument:
    case Errc::dimension_mismatch:
    case Errc::nonpositive_coefficient:
    case Errc::fast_path_unavailable:
    case Errc::unknown_tag:
      return true;
    default:
      return false;
  }
}

}  // namespace gdwave
