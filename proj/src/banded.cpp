#include "gdwave/banded.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gdwave/error.hpp"

namespace gdwave::linalg {

SymmetricBandedMatrix::SymmetricBandedMatrix(int size, int band)
    : size_(size), band_(std::min(band, std::max(size - 1, 0))),
      data_(static_cast<std::size_t>(size) * (band_ + 1), 0.0) {}

double SymmetricBandedMatrix::operator()(int i, int j) const noexcept {
  if (j > i) std::swap(i, j);
  if (i - j > band_) return 0.0;
  return data_[static_cast<std::size_t>(i) * (band_ + 1) + (band_ - (i - j))];
}

double& SymmetricBandedMatrix::at(int i, int j) noexcept {
  if (j > i) std::swap(i, j);
  return data_[static_cast<std::size_t>(i) * (band_ + 1) + (band_ - (i - j))];
}

void SymmetricBandedMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (int i = 0; i < size_; ++i) {
    const int lo = std::max(0, i - band_);
    const int hi = std::min(size_ - 1, i + band_);
    double s = 0.0;
    for (int j = lo; j <= hi; ++j) s += (*this)(i, j) * x[j];
    y[i] = s;
  }
}

void SymmetricBandedMatrix::apply_along_axis(const TensorShape& shape, int axis,
                                             std::span<const double> x, std::span<double> y) const {
  for_each_fibre(shape, axis, [&](std::size_t offset, std::size_t stride) {
    for (int i = 0; i < size_; ++i) {
      const int lo = std::max(0, i - band_);
      const int hi = std::min(size_ - 1, i + band_);
      double s = 0.0;
      for (int j = lo; j <= hi; ++j) s += (*this)(i, j) * x[offset + j * stride];
      y[offset + i * stride] = s;
    }
  });
}

SymmetricBandedMatrix SymmetricBandedMatrix::scaled(double factor) const {
  SymmetricBandedMatrix r = *this;
  for (double& v : r.data_) v *= factor;
  return r;
}

int SymmetricBandedMatrix::effective_band(double tol) const {
  double amax = 0.0;
  for (double v : data_) amax = std::max(amax, std::abs(v));
  int b = 0;
  for (int i = 0; i < size_; ++i)
    for (int j = std::max(0, i - band_); j <= i; ++j)
      if (std::abs((*this)(i, j)) > tol * amax) b = std::max(b, i - j);
  return b;
}

Eigen::MatrixXd SymmetricBandedMatrix::to_dense() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size_, size_);
  for (int i = 0; i < size_; ++i)
    for (int j = std::max(0, i - band_); j <= std::min(size_ - 1, i + band_); ++j) a(i, j) = (*this)(i, j);
  return a;
}

BandedCholesky::BandedCholesky(const SymmetricBandedMatrix& a) : factor_(a) {
  const int n = a.size();
  const int w = a.band();
  SymmetricBandedMatrix& l = factor_;
  for (int j = 0; j < n; ++j) {
    double d = l.at(j, j);
    for (int k = std::max(0, j - w); k < j; ++k) d -= l.at(j, k) * l.at(j, k);
    if (!(d > 0.0))
      throw Error(Errc::not_positive_definite, "nonpositive pivot at row " + std::to_string(j));
    d = std::sqrt(d);
    l.at(j, j) = d;
    for (int i = j + 1; i <= std::min(n - 1, j + w); ++i) {
      double s = l.at(i, j);
      for (int k = std::max(0, i - w); k < j; ++k) s -= l.at(i, k) * l.at(j, k);
      l.at(i, j) = s / d;
    }
  }
}

void BandedCholesky::solve_strided(double* x, std::size_t stride) const {
  const int n = factor_.size();
  const int w = factor_.band();
  for (int i = 0; i < n; ++i) {
    double s = x[i * stride];
    for (int k = std::max(0, i - w); k < i; ++k) s -= factor_(i, k) * x[k * stride];
    x[i * stride] = s / factor_(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i * stride];
    for (int k = i + 1; k <= std::min(n - 1, i + w); ++k) s -= factor_(k, i) * x[k * stride];
    x[i * stride] = s / factor_(i, i);
  }
}

namespace {
std::uint64_t banded_solve_flops(int n, int w) {
  std::uint64_t f = 0;
  for (int i = 0; i < n; ++i) f += 2 * static_cast<std::uint64_t>(std::min(i, w)) + 2;
  return f;
}
}  // namespace

void BandedCholesky::solve(std::span<double> x, std::uint64_t* flops) const {
  if (static_cast<int>(x.size()) != size())
    throw Error(Errc::dimension_mismatch, "banded solve: vector length " + std::to_string(x.size()) +
                                              " vs matrix size " + std::to_string(size()));
  solve_strided(x.data(), 1);
  if (flops) *flops += banded_solve_flops(size(), factor_.band());
}

void BandedCholesky::solve_along_axis(const TensorShape& shape, int axis, std::span<double> x,
                                      std::uint64_t* flops) const {
  std::size_t fibres = 0;
  for_each_fibre(shape, axis, [&](std::size_t offset, std::size_t stride) {
    solve_strided(x.data() + offset, stride);
    ++fibres;
  });
  if (flops) *flops += fibres * banded_solve_flops(size(), factor_.band());
}

KroneckerFactorization::KroneckerFactorization(const std::vector<SymmetricBandedMatrix>& factors) {
  std::vector<int> extents;
  for (const auto& m : factors) {
    factors_.emplace_back(m);
    extents.push_back(m.size());
  }
  shape_ = TensorShape(std::move(extents));
}

void KroneckerFactorization::solve(std::span<double> x, std::uint64_t* flops) const {
  if (x.size() != shape_.size())
    throw Error(Errc::dimension_mismatch, "kronecker solve: vector length " + std::to_string(x.size()) +
                                              " vs " + std::to_string(shape_.size()));
  for (int a = 0; a < dims(); ++a) factors_[a].solve_along_axis(shape_, a, x, flops);
}

std::vector<double> KroneckerFactorization::solved(std::span<const double> b) const {
  std::vector<double> x(b.begin(), b.end());
  solve(std::span<double>(x));
  return x;
}

void apply_kronecker(const std::vector<SymmetricBandedMatrix>& factors, const TensorShape& shape,
                     std::span<const double> x, std::span<double> y, std::span<double> work) {
  const int d = static_cast<int>(factors.size());
  if (d == 0) {
    std::copy(x.begin(), x.end(), y.begin());
    return;
  }
  // Ping-pong between y and work so the last application lands in y.
  std::span<double> bufs[2] = {y, work};
  int cur = (d % 2 == 1) ? 0 : 1;
  factors[0].apply_along_axis(shape, 0, x, bufs[cur]);
  for (int a = 1; a < d; ++a) {
    factors[a].apply_along_axis(shape, a, bufs[cur], bufs[1 - cur]);
    cur = 1 - cur;
  }
}

}  // namespace gdwave::linalg
