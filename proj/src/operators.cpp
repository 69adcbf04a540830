#include "gdwave/operators.hpp"

#include <cmath>
#include <string>

#include "gdwave/error.hpp"
#include "gdwave/quadrature.hpp"

namespace gdwave {

Eigen::MatrixXd ElementOps1d::surface(SurfaceKind kind, Endpoint x, Endpoint y) const {
  const auto& tx = trace(x);
  const auto& ty = trace(y);
  const auto& a = (kind == SurfaceKind::C || kind == SurfaceKind::D) ? tx.derivative : tx.value;
  const auto& b = (kind == SurfaceKind::C || kind == SurfaceKind::E) ? ty.derivative : ty.value;
  const int n = size();
  Eigen::MatrixXd s(n, n);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) s(k, l) = a[k] * b[l];
  return s;
}

ElementOps1d assemble_ops_1d(const GdBasis& basis, double element_length) {
  if (!(element_length > 0.0)) throw Error(Errc::invalid_argument, "element length must be positive");
  const int p = basis.degree();
  const int n = basis.nodes();
  const double h = basis.spacing();
  const GaussRule rule = gauss_legendre_unit(p + 1);

  ElementOps1d ops;
  ops.degree = p;
  ops.length = element_length;
  ops.mass = linalg::SymmetricBandedMatrix(n, p);
  ops.stiffness = linalg::SymmetricBandedMatrix(n, p);
  ops.mean.assign(n, 0.0);

  std::vector<double> val(p + 1), der(p + 1);
  for (int c = 0; c < basis.cells(); ++c) {
    const int first = basis.first_active(c);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      basis.evaluate_cell(c, rule.points[q], val, der);
      const double w = rule.weights[q] * h;
      for (int k = 0; k <= p; ++k) {
        ops.mean[first + k] += w * val[k] * element_length;
        for (int l = 0; l <= k; ++l) {
          ops.mass.at(first + k, first + l) += w * val[k] * val[l] * element_length;
          ops.stiffness.at(first + k, first + l) += w * der[k] * der[l] / element_length;
        }
      }
    }
  }

  auto endpoint = [&](int cell, double s) {
    TraceVectors t{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    basis.evaluate_cell(cell, s, val, der);
    const int first = basis.first_active(cell);
    for (int k = 0; k <= p; ++k) {
      t.value[first + k] = val[k];
      t.derivative[first + k] = der[k] / element_length;
    }
    return t;
  };
  ops.left = endpoint(0, 0.0);
  ops.right = endpoint(basis.cells() - 1, 1.0);
  return ops;
}

namespace {

// Per-axis tables of active-function values and physical derivatives at the
// quadrature points of every cell.
struct AxisTables {
  int p1 = 0;
  int nq = 0;
  std::vector<double> val;  // [cell][q][k]
  std::vector<double> der;
  std::vector<double> x;    // physical coordinate [cell][q]
  std::vector<double> w;    // physical weight [cell][q]
};

AxisTables make_tables(const GdBasis& basis, double origin, double length, const GaussRule& rule) {
  AxisTables t;
  t.p1 = basis.degree() + 1;
  t.nq = static_cast<int>(rule.points.size());
  const int nc = basis.cells();
  t.val.resize(static_cast<std::size_t>(nc) * t.nq * t.p1);
  t.der.resize(t.val.size());
  t.x.resize(static_cast<std::size_t>(nc) * t.nq);
  t.w.resize(t.x.size());
  const double h = basis.spacing();
  for (int c = 0; c < nc; ++c)
    for (int q = 0; q < t.nq; ++q) {
      const std::size_t cq = static_cast<std::size_t>(c) * t.nq + q;
      std::span<double> v(t.val.data() + cq * t.p1, t.p1), d(t.der.data() + cq * t.p1, t.p1);
      basis.evaluate_cell(c, rule.points[q], v, d);
      for (double& e : d) e /= length;
      t.x[cq] = origin + length * h * (c + rule.points[q]);
      t.w[cq] = rule.weights[q] * h * length;
    }
  return t;
}

// Visits every (cell multi-index, quadrature multi-index) of a tensor element
// and hands the kernel the per-axis (cell, point) pairs.
template <typename Kernel>
void for_each_quadrature_point(int dims, int cells, int nq, Kernel&& kernel) {
  std::vector<int> cell(dims, 0), q(dims, 0);
  const long total_cells = static_cast<long>(std::pow(cells, dims));
  const long total_q = static_cast<long>(std::pow(nq, dims));
  for (long ci = 0; ci < total_cells; ++ci) {
    long r = ci;
    for (int a = 0; a < dims; ++a) {
      cell[a] = static_cast<int>(r % cells);
      r /= cells;
    }
    for (long qi = 0; qi < total_q; ++qi) {
      long s = qi;
      for (int a = 0; a < dims; ++a) {
        q[a] = static_cast<int>(s % nq);
        s /= nq;
      }
      kernel(cell, q, qi == 0, qi == total_q - 1);
    }
  }
}

enum class Form { mass, stiffness };

linalg::CsrMatrix assemble_weighted(const GdBasis& basis, const ElementBox& box, const PointFunction& coef,
                                    int points, Form form) {
  const int d = box.dims();
  const int p1 = basis.degree() + 1;
  const GaussRule rule = gauss_legendre_unit(points);
  std::vector<AxisTables> tables;
  for (int a = 0; a < d; ++a) tables.push_back(make_tables(basis, box.origin[a], box.lengths[a], rule));

  int local_size = 1;
  for (int a = 0; a < d; ++a) local_size *= p1;
  std::vector<double> local(static_cast<std::size_t>(local_size) * local_size);
  std::vector<double> phi(local_size);
  std::vector<double> grad(static_cast<std::size_t>(local_size) * d);
  std::vector<double> x(d);
  std::vector<int> global(local_size);
  std::vector<linalg::CsrMatrix::Triplet> triplets;
  const int n = basis.nodes();

  for_each_quadrature_point(d, basis.cells(), rule.points.size(), [&](const std::vector<int>& cell,
                                                                       const std::vector<int>& q, bool first,
                                                                       bool last) {
    if (first) std::fill(local.begin(), local.end(), 0.0);
    double w = 1.0;
    for (int a = 0; a < d; ++a) {
      const std::size_t cq = static_cast<std::size_t>(cell[a]) * tables[a].nq + q[a];
      x[a] = tables[a].x[cq];
      w *= tables[a].w[cq];
    }
    const double c = coef(x);
    if (form == Form::stiffness && !(c > 0.0))
      throw Error(Errc::nonpositive_coefficient, "coefficient " + std::to_string(c) + " at a quadrature node");
    for (int li = 0; li < local_size; ++li) {
      int r = li;
      double v = 1.0;
      for (int a = 0; a < d; ++a) {
        const int k = r % p1;
        r /= p1;
        const std::size_t cq = static_cast<std::size_t>(cell[a]) * tables[a].nq + q[a];
        v *= tables[a].val[cq * p1 + k];
      }
      phi[li] = v;
      if (form == Form::stiffness) {
        for (int g = 0; g < d; ++g) {
          int rr = li;
          double gv = 1.0;
          for (int a = 0; a < d; ++a) {
            const int k = rr % p1;
            rr /= p1;
            const std::size_t cq = static_cast<std::size_t>(cell[a]) * tables[a].nq + q[a];
            gv *= (a == g ? tables[a].der[cq * p1 + k] : tables[a].val[cq * p1 + k]);
          }
          grad[static_cast<std::size_t>(li) * d + g] = gv;
        }
      }
    }
    const double wc = w * c;
    for (int i = 0; i < local_size; ++i)
      for (int j = 0; j < local_size; ++j) {
        double v;
        if (form == Form::mass) {
          v = phi[i] * phi[j];
        } else {
          v = 0.0;
          for (int g = 0; g < d; ++g) v += grad[static_cast<std::size_t>(i) * d + g] * grad[static_cast<std::size_t>(j) * d + g];
        }
        local[static_cast<std::size_t>(i) * local_size + j] += wc * v;
      }
    if (last) {
      for (int li = 0; li < local_size; ++li) {
        int r = li, stride = 1, g = 0;
        for (int a = 0; a < d; ++a) {
          g += (basis.first_active(cell[a]) + r % p1) * stride;
          r /= p1;
          stride *= n;
        }
        global[li] = g;
      }
      for (int i = 0; i < local_size; ++i)
        for (int j = 0; j < local_size; ++j)
          triplets.push_back({global[i], global[j], local[static_cast<std::size_t>(i) * local_size + j]});
    }
  });
  int total = 1;
  for (int a = 0; a < d; ++a) total *= n;
  return linalg::CsrMatrix(total, total, std::move(triplets));
}

}  // namespace

linalg::CsrMatrix assemble_weighted_stiffness(const GdBasis& basis, const ElementBox& box,
                                              const PointFunction& c2, int points) {
  return assemble_weighted(basis, box, c2, points, Form::stiffness);
}

linalg::CsrMatrix assemble_weighted_mass(const GdBasis& basis, const ElementBox& box,
                                         const PointFunction& weight, int points) {
  return assemble_weighted(basis, box, weight, points, Form::mass);
}

std::vector<double> assemble_load(const GdBasis& basis, const ElementBox& box, const PointFunction& f,
                                  int points) {
  const int d = box.dims();
  const int p1 = basis.degree() + 1;
  const int n = basis.nodes();
  const GaussRule rule = gauss_legendre_unit(points);
  std::vector<AxisTables> tables;
  for (int a = 0; a < d; ++a) tables.push_back(make_tables(basis, box.origin[a], box.lengths[a], rule));
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= n;
  std::vector<double> load(total, 0.0);
  std::vector<double> x(d);
  int local_size = 1;
  for (int a = 0; a < d; ++a) local_size *= p1;

  for_each_quadrature_point(d, basis.cells(), rule.points.size(), [&](const std::vector<int>& cell,
                                                                       const std::vector<int>& q, bool, bool) {
    double w = 1.0;
    for (int a = 0; a < d; ++a) {
      const std::size_t cq = static_cast<std::size_t>(cell[a]) * tables[a].nq + q[a];
      x[a] = tables[a].x[cq];
      w *= tables[a].w[cq];
    }
    const double fw = f(x) * w;
    if (fw == 0.0) return;
    for (int li = 0; li < local_size; ++li) {
      int r = li, stride = 1, g = 0;
      double v = 1.0;
      for (int a = 0; a < d; ++a) {
        const int k = r % p1;
        r /= p1;
        const std::size_t cq = static_cast<std::size_t>(cell[a]) * tables[a].nq + q[a];
        v *= tables[a].val[cq * p1 + k];
        g += (basis.first_active(cell[a]) + k) * stride;
        stride *= n;
      }
      load[g] += fw * v;
    }
  });
  return load;
}

namespace {
linalg::CsrMatrix kronecker_sum(const std::vector<const ElementOps1d*>& axes, bool with_stiffness) {
  const int d = static_cast<int>(axes.size());
  std::vector<int> extents;
  for (auto* a : axes) extents.push_back(a->size());
  const linalg::TensorShape shape(extents);
  std::vector<linalg::CsrMatrix::Triplet> triplets;
  std::vector<int> i(d), j(d);
  const std::size_t total = shape.size();
  for (std::size_t row = 0; row < total; ++row) {
    std::size_t r = row;
    for (int a = 0; a < d; ++a) {
      i[a] = static_cast<int>(r % extents[a]);
      r /= extents[a];
    }
    // Enumerate columns within the tensor band.
    std::vector<int> lo(d), hi(d);
    for (int a = 0; a < d; ++a) {
      lo[a] = std::max(0, i[a] - axes[a]->mass.band());
      hi[a] = std::min(extents[a] - 1, i[a] + axes[a]->mass.band());
      j[a] = lo[a];
    }
    while (true) {
      double v = 0.0;
      if (with_stiffness) {
        for (int g = 0; g < d; ++g) {
          double t = 1.0;
          for (int a = 0; a < d; ++a) t *= (a == g ? axes[a]->stiffness(i[a], j[a]) : axes[a]->mass(i[a], j[a]));
          v += t;
        }
      } else {
        v = 1.0;
        for (int a = 0; a < d; ++a) v *= axes[a]->mass(i[a], j[a]);
      }
      std::size_t col = 0;
      for (int a = d - 1; a >= 0; --a) col = col * extents[a] + j[a];
      triplets.push_back({static_cast<int>(row), static_cast<int>(col), v});
      int a = 0;
      while (a < d && ++j[a] > hi[a]) {
        j[a] = lo[a];
        ++a;
      }
      if (a == d) break;
    }
  }
  return linalg::CsrMatrix(static_cast<int>(total), static_cast<int>(total), std::move(triplets));
}
}  // namespace

linalg::CsrMatrix kronecker_stiffness(const std::vector<const ElementOps1d*>& axes) {
  return kronecker_sum(axes, true);
}

linalg::CsrMatrix kronecker_mass(const std::vector<const ElementOps1d*>& axes) {
  return kronecker_sum(axes, false);
}

}  // namespace gdwave
