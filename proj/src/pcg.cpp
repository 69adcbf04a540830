#include "gdwave/pcg.hpp"

#include <cmath>
#include <cstdio>
#include <algorithm>
#include <numeric>
#include <string>

#include "gdwave/error.hpp"

namespace gdwave::linalg {
namespace {
double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}
std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}
}  // namespace

PcgResult pcg_solve(const LinearAction& op, const LinearAction& precond, std::span<const double> b,
                    std::span<double> x, double rel_tol, int max_iter) {
  const std::size_t n = b.size();
  if (x.size() != n) throw Error(Errc::dimension_mismatch, "pcg: solution and rhs lengths differ");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw Error(Errc::invalid_argument, "pcg: rel_tol must lie in (0, 1)");

  double bmax = 0.0;
  for (double v : b) bmax = std::max(bmax, std::abs(v));
  PcgResult result;
  if (bmax == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return result;
  }
  // Rescale by a power of two (exact) so far-field right-hand sides of order
  // 1e-300 do not underflow in the inner products.
  int exponent = 0;
  std::frexp(bmax, &exponent);
  if (exponent != 0) {
    // two factors so that 2^-exponent never overflows for subnormal data
    const double s1 = std::ldexp(1.0, -exponent / 2), s2 = std::ldexp(1.0, -(exponent - exponent / 2));
    std::vector<double> bs(b.begin(), b.end());
    for (double& v : bs) v = v * s1 * s2;
    double xmax = 0.0;
    for (double v : x) xmax = std::max(xmax, std::abs(v));
    if (!(xmax * s1 * s2 < 1e100)) {
      std::fill(x.begin(), x.end(), 0.0);  // the guess is useless at this scale
    } else {
      for (double& v : x) v = v * s1 * s2;
    }
    auto restore = [&] {
      for (double& v : x) v = v / s1 / s2;
    };
    try {
      result = pcg_solve(op, precond, bs, x, rel_tol, max_iter);
    } catch (...) {
      restore();
      throw;
    }
    restore();
    return result;
  }
  const double bnorm = std::sqrt(dot(b, b));
  std::vector<double> r(n), z(n), p(n), q(n);
  op(x, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
  double rnorm = std::sqrt(dot(r, r));
  result.relative_residual = rnorm / bnorm;
  if (result.relative_residual <= rel_tol) return result;

  precond(r, z);
  double rz = dot(r, z);
  p = z;
  for (int it = 1; it <= max_iter; ++it) {
    op(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0) || !(rz > 0.0))
      throw Error(Errc::preconditioner_breakdown, "pcg: loss of positive definiteness at iteration " +
                                                      std::to_string(it) + " (p.Ap " + sci(pq) + ", r.z " + sci(rz) + ")");
    const double a = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += a * p[i];
      r[i] -= a * q[i];
    }
    rnorm = std::sqrt(dot(r, r));
    result.iterations = it;
    result.relative_residual = rnorm / bnorm;
    if (result.relative_residual <= rel_tol) return result;
    precond(r, z);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw Error(Errc::max_iterations_exceeded, "pcg: no convergence in " + std::to_string(max_iter) +
                                                 " iterations, relative residual " +
                                                 std::to_string(result.relative_residual));
}

AugmentedOperator::AugmentedOperator(LinearAction base, std::vector<double> mean, double sigma)
    : base_(std::move(base)), mean_(std::move(mean)), sigma_(sigma) {
  if (!(sigma > 0.0)) throw Error(Errc::invalid_argument, "augmentation scale must be positive");
}

double AugmentedOperator::default_scale(std::span<const double> diagonal, std::span<const double> mean) {
  const double trace = std::accumulate(diagonal.begin(), diagonal.end(), 0.0);
  return (trace / static_cast<double>(diagonal.size())) / dot(mean, mean);
}

void AugmentedOperator::apply(std::span<const double> x, std::span<double> y) const {
  base_(x, y);
  const double s = sigma_ * dot(mean_, x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * mean_[i];
}

LinearAction AugmentedOperator::action() const {
  return [this](std::span<const double> x, std::span<double> y) { apply(x, y); };
}

ShermanMorrisonPreconditioner::ShermanMorrisonPreconditioner(LinearAction base_inverse,
                                                             std::span<const double> mean, double sigma)
    : base_inverse_(std::move(base_inverse)), mean_(mean.begin(), mean.end()), base_inverse_mean_(mean.size()) {
  base_inverse_(mean_, base_inverse_mean_);
  denom_ = 1.0 / sigma + dot(mean_, base_inverse_mean_);
}

void ShermanMorrisonPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  base_inverse_(r, z);
  const double s = dot(mean_, z) / denom_;
  for (std::size_t i = 0; i < z.size(); ++i) z[i] -= s * base_inverse_mean_[i];
}

}  // namespace gdwave::linalg
