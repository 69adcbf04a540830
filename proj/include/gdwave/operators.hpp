#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gdwave/banded.hpp"
#include "gdwave/gd_basis.hpp"
#include "gdwave/sparse.hpp"

namespace gdwave {

enum class Endpoint { left, right };

/// Values phi_k(X) and physical derivatives phi_k'(X) at one element end.
struct TraceVectors {
  std::vector<double> value;
  std::vector<double> derivative;
};

enum class SurfaceKind { B, C, D, E };

/// One-dimensional element operators of a GD basis on an element of physical
/// length H. The surface matrices are kept as their trace vectors:
///   B^{XY} = b_X b_Y^T, D^{XY} = d_X b_Y^T, E^{XY} = b_X d_Y^T, C^{XY} = d_X d_Y^T.
struct ElementOps1d {
  int degree = 0;
  double length = 0.0;
  linalg::SymmetricBandedMatrix mass;
  linalg::SymmetricBandedMatrix stiffness;
  TraceVectors left;
  TraceVectors right;
  std::vector<double> mean;  // m_k = integral of phi_k

  int size() const noexcept { return mass.size(); }
  const TraceVectors& trace(Endpoint x) const noexcept { return x == Endpoint::left ? left : right; }
  /// Dense surface matrix; for tests and small analyses only.
  Eigen::MatrixXd surface(SurfaceKind kind, Endpoint x, Endpoint y) const;
};

/// Operators on the reference element, rescaled to `element_length`.
ElementOps1d assemble_ops_1d(const GdBasis& basis, double element_length);

/// Scalar coefficient on physical coordinates of a d-dimensional element.
using PointFunction = std::function<double(std::span<const double> x)>;

/// Geometry of a tensor-product element: physical origin and edge lengths.
struct ElementBox {
  std::vector<double> origin;
  std::vector<double> lengths;
  int dims() const noexcept { return static_cast<int>(lengths.size()); }
};

/// Sparse d-dimensional operators sum_q w c2 grad(phi_k).grad(phi_l) and
/// sum_q w c2 phi_k phi_l by Gauss quadrature with `points` per cell and
/// axis. Rows and columns follow the tensor layout with axis 0 fastest.
/// Throws nonpositive-coefficient when c2 <= 0 at a quadrature node.
linalg::CsrMatrix assemble_weighted_stiffness(const GdBasis& basis, const ElementBox& box,
                                              const PointFunction& c2, int points);
linalg::CsrMatrix assemble_weighted_mass(const GdBasis& basis, const ElementBox& box,
                                         const PointFunction& weight, int points);

/// Load vector sum_q w f phi_k.
std::vector<double> assemble_load(const GdBasis& basis, const ElementBox& box, const PointFunction& f,
                                  int points);

/// sum_j (M_1 x .. x S_j x .. x M_d) and M_1 x .. x M_d,
/// assembled sparse. Axis 0 is fastest.
linalg::CsrMatrix kronecker_stiffness(const std::vector<const ElementOps1d*>& axes);
linalg::CsrMatrix kronecker_mass(const std::vector<const ElementOps1d*>& axes);

}  // namespace gdwave
