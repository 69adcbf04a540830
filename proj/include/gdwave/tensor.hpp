#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gdwave::linalg {

/// Extents of a dense d-dimensional array stored with axis 0 fastest.
class TensorShape {
 public:
  TensorShape() = default;
  explicit TensorShape(std::vector<int> extents);
  TensorShape(int dims, int extent) : TensorShape(std::vector<int>(dims, extent)) {}

  int dims() const noexcept { return static_cast<int>(extents_.size()); }
  int extent(int axis) const noexcept { return extents_[axis]; }
  const std::vector<int>& extents() const noexcept { return extents_; }
  std::size_t size() const noexcept { return size_; }
  std::size_t stride(int axis) const noexcept { return strides_[axis]; }
  /// The shape with `axis` removed (a face of the box). A 1-D shape yields
  /// the zero-dimensional shape of size 1.
  TensorShape without(int axis) const;

  bool operator==(const TensorShape& o) const noexcept { return extents_ == o.extents_; }

 private:
  std::vector<int> extents_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 1;
};

/// Visits every 1-D fibre along `axis`: f(offset, stride) where the fibre's
/// entries are at offset + k*stride, k < extent(axis).
template <typename F>
void for_each_fibre(const TensorShape& shape, int axis, F&& f) {
  const std::size_t inner = shape.stride(axis);
  const std::size_t n = static_cast<std::size_t>(shape.extent(axis));
  const std::size_t outer = shape.size() / (inner * n);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < inner; ++i) f(o * n * inner + i, inner);
}

/// face[j] = sum_k vec[k] * x[fibre j, k] for the fibres along `axis`.
void contract_axis(const TensorShape& shape, int axis, std::span<const double> vec,
                   std::span<const double> x, std::span<double> face);

/// y[fibre j, k] += scale * vec[k] * face[j].
void outer_axis_add(const TensorShape& shape, int axis, std::span<const double> vec,
                    std::span<const double> face, double scale, std::span<double> y);

/// y = (I x ... x A x ... x I) x with the dense row-major square `matrix`
/// acting along `axis`; x and y must not alias.
void apply_dense_along_axis(const TensorShape& shape, int axis, std::span<const double> matrix,
                            std::span<const double> x, std::span<double> y);

}  // namespace gdwave::linalg
