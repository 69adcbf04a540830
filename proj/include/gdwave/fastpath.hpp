#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gdwave/operators.hpp"
#include "gdwave/tensor.hpp"

namespace gdwave {

/// Symmetric eigen-decomposition a = V diag(values) V^T by cyclic Jacobi
/// rotations; values ascending, columns of V matching.
void jacobi_eigen(const Eigen::MatrixXd& a, Eigen::VectorXd& values, Eigen::MatrixXd& vectors);

/// Dense generalized problem S psi = lambda M psi for SPD M via Cholesky
/// and Jacobi; columns of psi are M-orthonormal, values ascending.
void solve_pencil(const Eigen::MatrixXd& mass, const Eigen::MatrixXd& stiff, Eigen::VectorXd& values,
                  Eigen::MatrixXd& psi);

/// Simultaneous diagonalization of the 1-D pencil (S, M):
/// S psi_k = lambda_k M psi_k, psi_k^T M psi_k = 1. Index 0 is the constant
/// mode (lambda_0 = 0); the remaining eigenvalues are ascending.
struct DiagonalBasis {
  Eigen::MatrixXd psi;
  std::vector<double> eigenvalues;
  std::vector<double> psi_rows;        // psi, row-major
  std::vector<double> to_modal_rows;   // psi^T M, row-major
  TraceVectors left;                   // psi^T b_L, psi^T d_L
  TraceVectors right;
  int zero_index = 0;

  int size() const noexcept { return static_cast<int>(eigenvalues.size()); }
  const TraceVectors& trace(Endpoint x) const noexcept { return x == Endpoint::left ? left : right; }
};

DiagonalBasis diagonalize(const ElementOps1d& ops);

/// Modal coefficients of a nodal tensor: (x_j psi_j^T M_j) applied per axis.
std::vector<double> to_modal(const std::vector<const DiagonalBasis*>& axes, std::span<const double> nodal);
std::vector<double> from_modal(const std::vector<const DiagonalBasis*>& axes, std::span<const double> modal);

/// y = (sum_j Lambda_j) x, the transformed stiffness; returns the flop count.
std::uint64_t apply_transformed_volume(const std::vector<const DiagonalBasis*>& axes,
                                       std::span<const double> x, std::span<double> y);

/// y += scale * Psi^T K_j^{X,Y} Psi x for a surface matrix of kind K on
/// `axis`. The action is rank one along the axis: the neighbour (or own)
/// modal state is contracted with the transformed Y-trace, the resulting face
/// array is spread with the transformed X-trace. Returns the flop count.
std::uint64_t apply_transformed_lift(SurfaceKind kind, int axis, Endpoint x_end, Endpoint y_end,
                                     const std::vector<const DiagonalBasis*>& axes,
                                     std::span<const double> x, double scale, std::span<double> y);

}  // namespace gdwave
