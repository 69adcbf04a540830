#include "gdwave/tensor.hpp"

#include <algorithm>

namespace gdwave::linalg {

TensorShape::TensorShape(std::vector<int> extents) : extents_(std::move(extents)) {
  strides_.resize(extents_.size());
  size_ = 1;
  for (std::size_t a = 0; a < extents_.size(); ++a) {
    strides_[a] = size_;
    size_ *= static_cast<std::size_t>(extents_[a]);
  }
}

TensorShape TensorShape::without(int axis) const {
  std::vector<int> e;
  for (int a = 0; a < dims(); ++a)
    if (a != axis) e.push_back(extents_[a]);
  return TensorShape(std::move(e));
}

void contract_axis(const TensorShape& shape, int axis, std::span<const double> vec,
                   std::span<const double> x, std::span<double> face) {
  const int n = shape.extent(axis);
  std::size_t j = 0;
  for_each_fibre(shape, axis, [&](std::size_t offset, std::size_t stride) {
    double s = 0.0;
    for (int k = 0; k < n; ++k)
      if (vec[k] != 0.0) s += vec[k] * x[offset + k * stride];
    face[j++] = s;
  });
}

void outer_axis_add(const TensorShape& shape, int axis, std::span<const double> vec,
                    std::span<const double> face, double scale, std::span<double> y) {
  const int n = shape.extent(axis);
  std::size_t j = 0;
  for_each_fibre(shape, axis, [&](std::size_t offset, std::size_t stride) {
    const double f = scale * face[j++];
    if (f == 0.0) return;
    for (int k = 0; k < n; ++k) y[offset + k * stride] += vec[k] * f;
  });
}

void apply_dense_along_axis(const TensorShape& shape, int axis, std::span<const double> matrix,
                            std::span<const double> x, std::span<double> y) {
  const int n = shape.extent(axis);
  std::vector<double> line(n);
  for_each_fibre(shape, axis, [&](std::size_t offset, std::size_t stride) {
    for (int k = 0; k < n; ++k) line[k] = x[offset + k * stride];
    for (int r = 0; r < n; ++r) {
      const double* row = matrix.data() + static_cast<std::size_t>(r) * n;
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += row[k] * line[k];
      y[offset + r * stride] = s;
    }
  });
}

}  // namespace gdwave::linalg
