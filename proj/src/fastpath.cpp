#include "gdwave/fastpath.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gdwave/error.hpp"

namespace gdwave {

void jacobi_eigen(const Eigen::MatrixXd& input, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  const int n = static_cast<int>(input.rows());
  Eigen::MatrixXd a = 0.5 * (input + input.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double scale = std::max(a.norm(), 1e-300);
  bool converged = false;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-16 * scale) {
      converged = true;
      break;
    }
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }
  if (!converged) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) > 1e-12 * scale) throw Error(Errc::eigensolver_failure, "Jacobi sweeps did not converge");
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });
  values.resize(n);
  vectors.resize(n, n);
  for (int k = 0; k < n; ++k) {
    values(k) = a(order[k], order[k]);
    vectors.col(k) = v.col(order[k]);
  }
}

void solve_pencil(const Eigen::MatrixXd& mass, const Eigen::MatrixXd& stiff, Eigen::VectorXd& values,
                  Eigen::MatrixXd& psi) {
  Eigen::LLT<Eigen::MatrixXd> llt(mass);
  if (llt.info() != Eigen::Success) throw Error(Errc::not_positive_definite, "pencil mass is not SPD");
  const Eigen::MatrixXd l = llt.matrixL();
  // A = L^{-1} S L^{-T}
  const Eigen::MatrixXd tmp = l.triangularView<Eigen::Lower>().solve(stiff);
  const Eigen::MatrixXd a = l.triangularView<Eigen::Lower>().solve(tmp.transpose()).transpose();
  Eigen::MatrixXd y;
  jacobi_eigen(a, values, y);
  psi = l.transpose().triangularView<Eigen::Upper>().solve(y);
}

DiagonalBasis diagonalize(const ElementOps1d& ops) {
  const int n = ops.size();
  const Eigen::MatrixXd mass = ops.mass.to_dense();
  const Eigen::MatrixXd stiff = ops.stiffness.to_dense();
  Eigen::VectorXd values;
  Eigen::MatrixXd psi;
  solve_pencil(mass, stiff, values, psi);

  const double lmax = values.cwiseAbs().maxCoeff();
  int zeros = 0;
  for (int k = 0; k < n; ++k)
    if (values(k) < 1e-8 * lmax) ++zeros;
  if (zeros != 1) throw Error(Errc::eigensolver_failure, "stiffness pencil must have exactly one null mode");

  // The null mode is exactly the constant vector; pin it and re-orthogonalize.
  const double total = std::accumulate(ops.mean.begin(), ops.mean.end(), 0.0);
  psi.col(0).setConstant(1.0 / std::sqrt(total));
  values(0) = 0.0;
  for (int k = 1; k < n; ++k) {
    const double proj = psi.col(0).dot(mass * psi.col(k));
    psi.col(k) -= proj * psi.col(0);
  }
  for (int k = 0; k < n; ++k) {
    psi.col(k) /= std::sqrt(psi.col(k).dot(mass * psi.col(k)));
    Eigen::Index imax = 0;
    psi.col(k).cwiseAbs().maxCoeff(&imax);
    if (psi(imax, k) < 0.0) psi.col(k) *= -1.0;
  }

  DiagonalBasis db;
  db.psi = psi;
  db.eigenvalues.assign(values.data(), values.data() + n);
  db.psi_rows.resize(static_cast<std::size_t>(n) * n);
  db.to_modal_rows.resize(db.psi_rows.size());
  const Eigen::MatrixXd to_modal = psi.transpose() * mass;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      db.psi_rows[static_cast<std::size_t>(i) * n + j] = psi(i, j);
      db.to_modal_rows[static_cast<std::size_t>(i) * n + j] = to_modal(i, j);
    }
  auto transform = [&](const TraceVectors& t) {
    TraceVectors r{std::vector<double>(n), std::vector<double>(n)};
    const Eigen::Map<const Eigen::VectorXd> b(t.value.data(), n), d(t.derivative.data(), n);
    Eigen::Map<Eigen::VectorXd>(r.value.data(), n) = psi.transpose() * b;
    Eigen::Map<Eigen::VectorXd>(r.derivative.data(), n) = psi.transpose() * d;
    return r;
  };
  db.left = transform(ops.left);
  db.right = transform(ops.right);
  db.zero_index = 0;
  return db;
}

namespace {
linalg::TensorShape shape_of(const std::vector<const DiagonalBasis*>& axes) {
  std::vector<int> e;
  for (auto* a : axes) e.push_back(a->size());
  return linalg::TensorShape(std::move(e));
}

std::vector<double> transform(const std::vector<const DiagonalBasis*>& axes, std::span<const double> x,
                              bool forward) {
  const auto shape = shape_of(axes);
  if (x.size() != shape.size()) throw Error(Errc::dimension_mismatch, "modal transform: shape mismatch");
  std::vector<double> a(x.begin(), x.end()), b(x.size());
  for (int j = 0; j < shape.dims(); ++j) {
    const auto& m = forward ? axes[j]->to_modal_rows : axes[j]->psi_rows;
    linalg::apply_dense_along_axis(shape, j, m, a, b);
    std::swap(a, b);
  }
  return a;
}
}  // namespace

std::vector<double> to_modal(const std::vector<const DiagonalBasis*>& axes, std::span<const double> nodal) {
  return transform(axes, nodal, true);
}

std::vector<double> from_modal(const std::vector<const DiagonalBasis*>& axes, std::span<const double> modal) {
  return transform(axes, modal, false);
}

std::uint64_t apply_transformed_volume(const std::vector<const DiagonalBasis*>& axes,
                                       std::span<const double> x, std::span<double> y) {
  const auto shape = shape_of(axes);
  const int d = shape.dims();
  const std::size_t total = shape.size();
  std::vector<int> idx(d, 0);
  for (std::size_t i = 0; i < total; ++i) {
    double lam = 0.0;
    for (int a = 0; a < d; ++a) lam += axes[a]->eigenvalues[idx[a]];
    y[i] = lam * x[i];
    for (int a = 0; a < d && ++idx[a] == shape.extent(a); ++a) idx[a] = 0;
  }
  return total * static_cast<std::uint64_t>(d + 1);
}

std::uint64_t apply_transformed_lift(SurfaceKind kind, int axis, Endpoint x_end, Endpoint y_end,
                                     const std::vector<const DiagonalBasis*>& axes,
                                     std::span<const double> x, double scale, std::span<double> y) {
  const auto shape = shape_of(axes);
  const auto& tx = axes[axis]->trace(x_end);
  const auto& ty = axes[axis]->trace(y_end);
  const bool row_derivative = kind == SurfaceKind::C || kind == SurfaceKind::D;
  const bool col_derivative = kind == SurfaceKind::C || kind == SurfaceKind::E;
  const auto& spread = row_derivative ? tx.derivative : tx.value;
  const auto& gather = col_derivative ? ty.derivative : ty.value;
  std::vector<double> face(shape.without(axis).size());
  linalg::contract_axis(shape, axis, gather, x, face);
  linalg::outer_axis_add(shape, axis, spread, face, scale, y);
  return 2 * static_cast<std::uint64_t>(shape.size()) + face.size();
}

}  // namespace gdwave
