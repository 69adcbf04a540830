#include "gdwave/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gdwave/error.hpp"

namespace gdwave::linalg {

CsrMatrix::CsrMatrix(int rows, int cols, std::vector<Triplet> triplets) : rows_(rows), cols_(cols) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  row_ptr_.assign(rows + 1, 0);
  for (std::size_t k = 0; k < triplets.size();) {
    const auto& t = triplets[k];
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
      throw Error(Errc::out_of_range, "triplet outside matrix bounds");
    double v = 0.0;
    std::size_t e = k;
    while (e < triplets.size() && triplets[e].row == t.row && triplets[e].col == t.col) v += triplets[e++].value;
    col_idx_.push_back(t.col);
    values_.push_back(v);
    ++row_ptr_[t.row + 1];
    k = e;
  }
  for (int i = 0; i < rows; ++i) row_ptr_[i + 1] += row_ptr_[i];
}

double CsrMatrix::coeff(int i, int j) const noexcept {
  const auto b = col_idx_.begin() + row_ptr_[i];
  const auto e = col_idx_.begin() + row_ptr_[i + 1];
  const auto it = std::lower_bound(b, e, j);
  return (it != e && *it == j) ? values_[it - col_idx_.begin()] : 0.0;
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(std::min(rows_, cols_));
  for (int i = 0; i < static_cast<int>(d.size()); ++i) d[i] = coeff(i, i);
  return d;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[col_idx_[k]];
    y[i] = s;
  }
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) a(i, col_idx_[k]) = values_[k];
  return a;
}

IncompleteCholesky::IncompleteCholesky(const CsrMatrix& a, double initial_shift) {
  if (a.rows() != a.cols()) throw Error(Errc::dimension_mismatch, "IC(0) needs a square matrix");
  n_ = a.rows();
  for (double d : a.diagonal())
    if (!(d > 0.0)) throw Error(Errc::preconditioner_breakdown, "IC(0) needs a positive diagonal");
  double shift = initial_shift;
  if (try_factor(a, shift)) return;
  for (shift = std::max(1e-3, 2.0 * initial_shift); shift < 1e3; shift *= 2.0)
    if (try_factor(a, shift)) return;
  throw Error(Errc::preconditioner_breakdown, "IC(0) failed for every diagonal shift");
}

bool IncompleteCholesky::try_factor(const CsrMatrix& a, double shift) {
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto av = a.values();
  row_ptr_.assign(n_ + 1, 0);
  col_idx_.clear();
  values_.clear();
  for (int i = 0; i < n_; ++i) {
    for (int k = rp[i]; k < rp[i + 1] && ci[k] <= i; ++k) {
      col_idx_.push_back(ci[k]);
      values_.push_back(ci[k] == i ? av[k] * (1.0 + shift) : av[k]);
    }
    row_ptr_[i + 1] = static_cast<int>(col_idx_.size());
    if (col_idx_.empty() || col_idx_.back() != i) return false;
  }
  // Row-oriented IC(0): l_ij = (a_ij - sum_k l_ik l_jk) / l_jj over the pattern.
  for (int i = 0; i < n_; ++i) {
    const int bi = row_ptr_[i], ei = row_ptr_[i + 1];
    for (int kk = bi; kk < ei; ++kk) {
      const int j = col_idx_[kk];
      double s = values_[kk];
      // sparse dot of rows i and j over columns < j
      int p = bi, q = row_ptr_[j];
      const int qe = row_ptr_[j + 1] - 1;  // skip diagonal of row j
      while (p < kk && q < qe) {
        if (col_idx_[p] == col_idx_[q]) s -= values_[p++] * values_[q++];
        else if (col_idx_[p] < col_idx_[q]) ++p;
        else ++q;
      }
      if (j == i) {
        if (!(s > 0.0)) return false;
        values_[kk] = std::sqrt(s);
      } else {
        values_[kk] = s / values_[row_ptr_[j + 1] - 1];
      }
    }
  }
  shift_ = shift;
  return true;
}

void IncompleteCholesky::apply(std::span<const double> r, std::span<double> z) const {
  for (int i = 0; i < n_; ++i) {
    double s = r[i];
    const int e = row_ptr_[i + 1] - 1;
    for (int k = row_ptr_[i]; k < e; ++k) s -= values_[k] * z[col_idx_[k]];
    z[i] = s / values_[e];
  }
  for (int i = n_ - 1; i >= 0; --i) {
    const int e = row_ptr_[i + 1] - 1;
    z[i] /= values_[e];
    const double zi = z[i];
    for (int k = row_ptr_[i]; k < e; ++k) z[col_idx_[k]] -= values_[k] * zi;
  }
}

}  // namespace gdwave::linalg
