#pragma once

#include <stdexcept>
#include <string>

namespace gdwave {

enum class Errc {
  invalid_degree,
  mesh_too_coarse,
  out_of_range,
  invalid_argument,
  dimension_mismatch,
  not_positive_definite,
  nonpositive_coefficient,
  max_iterations_exceeded,
  preconditioner_breakdown,
  eigensolver_failure,
  fast_path_unavailable,
  unknown_tag,
  non_finite_state,
  io_failure,
};

const char* errc_name(Errc code) noexcept;

/// Input/configuration problems map to CLI exit code 2, numerical failures
/// to exit code 3.
bool is_validation_error(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace gdwave
