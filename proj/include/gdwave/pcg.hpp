#pragma once

#include <functional>
#include <span>
#include <vector>

namespace gdwave::linalg {

/// y = A x for a symmetric positive definite action.
using LinearAction = std::function<void(std::span<const double> x, std::span<double> y)>;

struct PcgResult {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Preconditioned conjugate gradients on the true relative residual
/// ||b - A x|| / ||b||. `x` holds the initial guess on entry (warm start) and
/// the solution on exit; zero iterations are taken when the guess already
/// meets the tolerance. Throws max-iterations-exceeded or
/// preconditioner-breakdown.
PcgResult pcg_solve(const LinearAction& op, const LinearAction& precond, std::span<const double> b,
                    std::span<double> x, double rel_tol, int max_iter);

/// A + sigma m m^T for a positive semidefinite A whose nullspace is the
/// constants; the rank-one term is applied matrix-free.
class AugmentedOperator {
 public:
  AugmentedOperator(LinearAction base, std::vector<double> mean, double sigma);

  /// sigma = (trace(A)/n) / ||m||^2.
  static double default_scale(std::span<const double> diagonal, std::span<const double> mean);

  double sigma() const noexcept { return sigma_; }
  const std::vector<double>& mean() const noexcept { return mean_; }

  void apply(std::span<const double> x, std::span<double> y) const;
  LinearAction action() const;

 private:
  LinearAction base_;
  std::vector<double> mean_;
  double sigma_;
};

/// Preconditioner for an augmented operator: (P + sigma m m^T)^{-1} applied
/// by Sherman-Morrison from a base preconditioner P^{-1}.
class ShermanMorrisonPreconditioner {
 public:
  ShermanMorrisonPreconditioner(LinearAction base_inverse, std::span<const double> mean, double sigma);

  void apply(std::span<const double> r, std::span<double> z) const;

 private:
  LinearAction base_inverse_;
  std::vector<double> mean_;
  std::vector<double> base_inverse_mean_;
  double denom_;
};

}  // namespace gdwave::linalg
