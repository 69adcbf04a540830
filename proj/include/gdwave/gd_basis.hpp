#pragma once

#include <span>
#include <vector>

namespace gdwave {

/// Which of the two cells sharing a grid node an evaluation uses. Element
/// endpoints (x = 0, x = 1) always resolve to the interior cell.
enum class Side { left, right };

/// Degree-p Galerkin difference basis on the N+1 equidistant nodes of the
/// unit interval, with the extrapolation closure at both ends.
///
/// On every cell the expansion is a single degree-p polynomial that
/// interpolates a block of p+1 consecutive nodes; for interior cells the
/// block is centred on the cell, near the ends the ghost values are eliminated
/// by order-(p+1) extrapolation from nodes 0..p (resp. N-p..N). Each cell
/// stores monomial coefficients in the local coordinate s = x/h - cell.
class GdBasis {
 public:
  GdBasis(int degree, int cells);

  int degree() const noexcept { return degree_; }
  int half_width() const noexcept { return (degree_ + 1) / 2; }
  int cells() const noexcept { return cells_; }
  int nodes() const noexcept { return cells_ + 1; }
  double spacing() const noexcept { return 1.0 / cells_; }

  /// Row g gives u_{-1-g} = sum_m w[g][m] u_m (left end); the right end is
  /// the mirror image.
  const std::vector<std::vector<double>>& extrapolation_weights() const noexcept {
    return extrapolation_;
  }

  /// Generating function Phi_p, argument measured in cell widths.
  double generating(double offset) const;

  int cell_of(double x, Side side = Side::right) const;
  /// First node of the p+1 node block active on `cell`.
  int first_active(int cell) const noexcept { return first_[cell]; }
  /// Monomial coefficients (ascending powers of s) of local function `local`
  /// on `cell`.
  std::span<const double> coefficients(int cell, int local) const noexcept;

  double value(int i, double x, Side side = Side::right) const;
  /// d/dx in reference units (unit interval).
  double derivative(int i, double x, Side side = Side::right) const;

  /// Values and reference-unit derivatives of the p+1 active functions at
  /// local coordinate s of `cell`. Either span may be empty.
  void evaluate_cell(int cell, double s, std::span<double> values,
                     std::span<double> derivatives) const;

 private:
  void check_args(int i, double x) const;

  int degree_;
  int cells_;
  std::vector<std::vector<double>> extrapolation_;
  std::vector<double> interior_;  // (p+1)x(p+1), stencil cardinal polynomials
  std::vector<int> first_;
  std::vector<double> table_;  // cells x (p+1) x (p+1)
};

}  // namespace gdwave
