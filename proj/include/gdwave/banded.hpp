#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gdwave/tensor.hpp"

namespace gdwave::linalg {

/// Symmetric matrix with half-bandwidth `band`, lower band stored row-wise.
class SymmetricBandedMatrix {
 public:
  SymmetricBandedMatrix() = default;
  SymmetricBandedMatrix(int size, int band);

  int size() const noexcept { return size_; }
  int band() const noexcept { return band_; }

  /// Entry (i, j); zero outside the band.
  double operator()(int i, int j) const noexcept;
  /// Reference to the stored entry (i, j), |i - j| <= band.
  double& at(int i, int j) noexcept;

  void multiply(std::span<const double> x, std::span<double> y) const;
  /// y = (I x ... x A x ... x I) x along `axis`.
  void apply_along_axis(const TensorShape& shape, int axis, std::span<const double> x,
                        std::span<double> y) const;

  SymmetricBandedMatrix scaled(double factor) const;
  /// Largest |i - j| with |a_ij| > tol * max|a|.
  int effective_band(double tol = 0.0) const;
  Eigen::MatrixXd to_dense() const;

 private:
  int size_ = 0;
  int band_ = 0;
  std::vector<double> data_;  // row i holds a(i, i-band .. i)
};

/// Banded Cholesky A = L L^T with the band of A preserved in L.
class BandedCholesky {
 public:
  explicit BandedCholesky(const SymmetricBandedMatrix& a);

  int size() const noexcept { return factor_.size(); }
  const SymmetricBandedMatrix& factor() const noexcept { return factor_; }

  /// In-place solve of A x = b. Adds the multiply-add count to `flops` when given.
  void solve(std::span<double> x, std::uint64_t* flops = nullptr) const;
  /// In-place solve along one axis of a tensor.
  void solve_along_axis(const TensorShape& shape, int axis, std::span<double> x,
                        std::uint64_t* flops = nullptr) const;

 private:
  void solve_strided(double* x, std::size_t stride) const;
  SymmetricBandedMatrix factor_;  // lower factor stored in the band
};

/// Banded Cholesky factors of the 1-D mass matrices of a tensor-product
/// mass matrix M = M_d x ... x M_1 (axis 0 fastest). Solves are applied axis
/// by axis.
class KroneckerFactorization {
 public:
  explicit KroneckerFactorization(const std::vector<SymmetricBandedMatrix>& factors);

  int dims() const noexcept { return static_cast<int>(factors_.size()); }
  const TensorShape& shape() const noexcept { return shape_; }

  void solve(std::span<double> x, std::uint64_t* flops = nullptr) const;
  std::vector<double> solved(std::span<const double> b) const;

 private:
  std::vector<BandedCholesky> factors_;
  TensorShape shape_;
};

/// Applies (M_d x ... x M_1) along every axis; `work` must have the tensor size.
void apply_kronecker(const std::vector<SymmetricBandedMatrix>& factors, const TensorShape& shape,
                     std::span<const double> x, std::span<double> y, std::span<double> work);

}  // namespace gdwave::linalg
