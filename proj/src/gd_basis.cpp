#include "gdwave/gd_basis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gdwave/error.hpp"

namespace gdwave {
namespace {

// Monomial coefficients of the Lagrange cardinal polynomial for node `k` of
// the integer grid `grid`.
std::vector<double> cardinal_polynomial(const std::vector<double>& grid, std::size_t k) {
  std::vector<double> poly{1.0};
  for (std::size_t m = 0; m < grid.size(); ++m) {
    if (m == k) continue;
    const double denom = grid[k] - grid[m];
    std::vector<double> next(poly.size() + 1, 0.0);
    for (std::size_t e = 0; e < poly.size(); ++e) {
      next[e + 1] += poly[e] / denom;
      next[e] -= poly[e] * grid[m] / denom;
    }
    poly = std::move(next);
  }
  return poly;
}

double horner(std::span<const double> c, double s) {
  double r = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * s + *it;
  return r;
}

double horner_derivative(std::span<const double> c, double s) {
  double r = 0.0;
  for (std::size_t e = c.size() - 1; e >= 1; --e) r = r * s + static_cast<double>(e) * c[e];
  return r;
}

}  // namespace

GdBasis::GdBasis(int degree, int cells) : degree_(degree), cells_(cells) {
  if (degree < 1 || degree % 2 == 0)
    throw Error(Errc::invalid_degree, "degree must be odd and >= 1, got " + std::to_string(degree));
  const int q = half_width();
  if (cells < 2 * q - 1)
    throw Error(Errc::mesh_too_coarse, "need N >= " + std::to_string(2 * q - 1) + " cells for p = " +
                                           std::to_string(degree) + ", got " + std::to_string(cells));
  const int p = degree;
  const int w = p + 1;

  std::vector<double> boundary_grid(w);
  for (int m = 0; m < w; ++m) boundary_grid[m] = m;
  extrapolation_.assign(q - 1, std::vector<double>(w));
  for (int g = 0; g < q - 1; ++g) {
    const double x = -1.0 - g;
    for (int m = 0; m < w; ++m) {
      double l = 1.0;
      for (int j = 0; j < w; ++j)
        if (j != m) l *= (x - j) / static_cast<double>(m - j);
      extrapolation_[g][m] = l;
    }
  }

  std::vector<double> stencil(w);
  for (int k = 0; k < w; ++k) stencil[k] = k - q + 1;
  interior_.assign(static_cast<std::size_t>(w) * w, 0.0);
  for (int k = 0; k < w; ++k) {
    const auto poly = cardinal_polynomial(stencil, k);
    std::copy(poly.begin(), poly.end(), interior_.begin() + static_cast<std::ptrdiff_t>(k) * w);
  }

  first_.resize(cells);
  table_.assign(static_cast<std::size_t>(cells) * w * w, 0.0);
  for (int c = 0; c < cells; ++c) {
    const int first = std::clamp(c - q + 1, 0, cells - p);
    first_[c] = first;
    double* cell_table = table_.data() + static_cast<std::size_t>(c) * w * w;
    auto add = [&](int node, double weight, int k) {
      double* dst = cell_table + static_cast<std::ptrdiff_t>(node - first) * w;
      const double* src = interior_.data() + static_cast<std::ptrdiff_t>(k) * w;
      for (int e = 0; e < w; ++e) dst[e] += weight * src[e];
    };
    for (int k = 0; k < w; ++k) {
      const int node = c - q + 1 + k;
      if (node < 0) {
        const auto& row = extrapolation_[-1 - node];
        for (int m = 0; m < w; ++m) add(m, row[m], k);
      } else if (node > cells) {
        const auto& row = extrapolation_[node - cells - 1];
        for (int m = 0; m < w; ++m) add(cells - m, row[m], k);
      } else {
        add(node, 1.0, k);
      }
    }
  }
}

double GdBasis::generating(double offset) const {
  const int q = half_width();
  if (offset <= -q || offset >= q) return 0.0;
  // Phi_p(x) on [r, r+1) is the stencil cardinal function with local index q-1-r.
  const int r = static_cast<int>(std::floor(offset));
  const int k = q - 1 - r;
  const std::span<const double> c(interior_.data() + static_cast<std::ptrdiff_t>(k) * (degree_ + 1),
                                  degree_ + 1);
  return horner(c, offset - r);
}

int GdBasis::cell_of(double x, Side side) const {
  const double t = x * cells_;
  int c = static_cast<int>(std::floor(t));
  if (side == Side::left && t == std::floor(t)) --c;
  return std::clamp(c, 0, cells_ - 1);
}

std::span<const double> GdBasis::coefficients(int cell, int local) const noexcept {
  const int w = degree_ + 1;
  return {table_.data() + (static_cast<std::size_t>(cell) * w + local) * w, static_cast<std::size_t>(w)};
}

void GdBasis::check_args(int i, double x) const {
  if (i < 0 || i > cells_)
    throw Error(Errc::out_of_range, "basis index " + std::to_string(i) + " outside [0, N]");
  if (!(x >= -1e-14 && x <= 1.0 + 1e-14))
    throw Error(Errc::out_of_range, "coordinate " + std::to_string(x) + " outside [0, 1]");
}

double GdBasis::value(int i, double x, Side side) const {
  check_args(i, x);
  const int c = cell_of(x, side);
  const int local = i - first_[c];
  if (local < 0 || local > degree_) return 0.0;
  return horner(coefficients(c, local), x * cells_ - c);
}

double GdBasis::derivative(int i, double x, Side side) const {
  check_args(i, x);
  const int c = cell_of(x, side);
  const int local = i - first_[c];
  if (local < 0 || local > degree_) return 0.0;
  return horner_derivative(coefficients(c, local), x * cells_ - c) * cells_;
}

void GdBasis::evaluate_cell(int cell, double s, std::span<double> values,
                            std::span<double> derivatives) const {
  for (int k = 0; k <= degree_; ++k) {
    const auto c = coefficients(cell, k);
    if (!values.empty()) values[k] = horner(c, s);
    if (!derivatives.empty()) derivatives[k] = horner_derivative(c, s) * cells_;
  }
}

}  // namespace gdwave
