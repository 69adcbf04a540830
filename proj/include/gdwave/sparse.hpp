#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gdwave::linalg {

/// Compressed-row matrix. Symmetric operators are stored with both
/// triangles; columns are sorted within each row.
class CsrMatrix {
 public:
  struct Triplet {
    int row, col;
    double value;
  };

  CsrMatrix() = default;
  /// Duplicate (row, col) entries are summed.
  CsrMatrix(int rows, int cols, std::vector<Triplet> triplets);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t nonzeros() const noexcept { return values_.size(); }

  std::span<const int> row_ptr() const noexcept { return row_ptr_; }
  std::span<const int> col_idx() const noexcept { return col_idx_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double coeff(int i, int j) const noexcept;
  std::vector<double> diagonal() const;

  void multiply(std::span<const double> x, std::span<double> y) const;
  Eigen::MatrixXd to_dense() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

/// Zero fill-in incomplete Cholesky factor L (pattern of the lower triangle
/// of A). On a nonpositive pivot the factorization restarts on
/// A + delta*diag(A) with delta = 1e-3, 2e-3, 4e-3, ...
class IncompleteCholesky {
 public:
  explicit IncompleteCholesky(const CsrMatrix& a, double initial_shift = 0.0);

  int size() const noexcept { return n_; }
  /// Relative diagonal shift used by the successful factorization.
  double shift() const noexcept { return shift_; }

  /// z = (L L^T)^{-1} r.
  void apply(std::span<const double> r, std::span<double> z) const;
  /// Multiply-add count of one application.
  std::uint64_t apply_flops() const noexcept { return 2 * static_cast<std::uint64_t>(values_.size()); }

 private:
  bool try_factor(const CsrMatrix& a, double shift);

  int n_ = 0;
  double shift_ = 0.0;
  std::vector<int> row_ptr_;  // lower triangle incl. diagonal (last in each row)
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

}  // namespace gdwave::linalg
