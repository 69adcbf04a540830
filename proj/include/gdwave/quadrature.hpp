#pragma once

#include <vector>

namespace gdwave {

/// Gauss-Legendre rule mapped to [0, 1]; exact for polynomials of degree 2n-1.
struct GaussRule {
  std::vector<double> points;
  std::vector<double> weights;
};

GaussRule gauss_legendre_unit(int n);

}  // namespace gdwave
