#include "gdwave/analysis.hpp"

#include <cmath>

#include "gdwave/error.hpp"

namespace gdwave {

Eigen::MatrixXd global_operator(Semidiscretization& sd) {
  const std::size_t n = sd.state_size();
  Eigen::MatrixXd l(2 * n, 2 * n);
  FieldState z = sd.zero_state(), out;
  for (std::size_t j = 0; j < 2 * n; ++j) {
    double& entry = j < n ? z.u[j] : z.v[j - n];
    entry = 1.0;
    sd.rhs(z, out);
    entry = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      l(i, j) = out.u[i];
      l(n + i, j) = out.v[i];
    }
  }
  return l;
}

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kAliasTolerance = 1e-2;
constexpr double kAliasCorrelation = 0.99;

// Blocks of the middle cell of a periodic mesh of three cells.
struct BlochBlocks {
  Eigen::MatrixXd self, plus, minus;
  int size = 0;  // unknowns of u (or v) in one cell
};

BlochBlocks bloch_blocks(int degree, int cells, const FluxScheme& scheme, int m) {
  Mesh mesh = Mesh::uniform(1, 3 * m, cells, 0.0, 3.0 * m, BcKind::periodic);
  SemidiscOptions opt;
  opt.degree = degree;
  opt.flux = scheme;
  opt.path = SolverPath::direct;
  opt.threads = 1;
  Semidiscretization sd(mesh, Medium::uniform(1.0), opt);
  const Eigen::MatrixXd l = global_operator(sd);
  const int es = static_cast<int>(sd.element_size());
  const int cs = es * m;        // per field in one cell
  const int n = 3 * cs;         // per field in the mesh
  BlochBlocks b;
  b.size = cs;
  auto block = [&](int row_cell, int col_cell) {
    Eigen::MatrixXd r(2 * cs, 2 * cs);
    for (int fr = 0; fr < 2; ++fr)
      for (int fc = 0; fc < 2; ++fc)
        r.block(fr * cs, fc * cs, cs, cs) = l.block(fr * n + row_cell * cs, fc * n + col_cell * cs, cs, cs);
    return r;
  };
  b.self = block(1, 1);
  b.plus = block(1, 2);
  b.minus = block(1, 0);
  return b;
}

// Eigen decomposition that splits off the constant-state block when present.
// With (1, 0) in the null space and L (0, 1) = (1, 0), zero is a defective
// double eigenvalue; a plain QR iteration then scatters it by sqrt(eps).
struct Spectrum {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;  // empty unless requested
};

Spectrum eigen_deflated(const Eigen::MatrixXcd& a, bool want_vectors) {
  using C = std::complex<double>;
  const int n2 = static_cast<int>(a.rows());
  const int n = n2 / 2;
  Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(n2, 2);
  z.col(0).head(n).setConstant(1.0 / std::sqrt(double(n)));
  z.col(1).tail(n).setConstant(1.0 / std::sqrt(double(n)));
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  const Eigen::VectorXcd a0 = a * z.col(0), a1 = a * z.col(1);
  const C g = z.col(0).dot(a1);
  const bool invariant = a0.norm() <= 1e-10 * scale && (a1 - g * z.col(0)).norm() <= 1e-10 * scale;

  Spectrum s;
  if (!invariant) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(a, want_vectors);
    if (es.info() != Eigen::Success) throw Error(Errc::eigensolver_failure, "eigenproblem failed");
    s.values = es.eigenvalues();
    if (want_vectors) s.vectors = es.eigenvectors();
    return s;
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(n2, n2);
  const Eigen::MatrixXcd t = q.adjoint() * a * q;
  const int m = n2 - 2;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(t.bottomRightCorner(m, m), want_vectors);
  if (es.info() != Eigen::Success) throw Error(Errc::eigensolver_failure, "eigenproblem failed");
  s.values.resize(n2);
  s.values << C(0.0), C(0.0), es.eigenvalues();
  if (want_vectors) {
    s.vectors.resize(n2, n2);
    s.vectors.col(0) = z.col(0);
    s.vectors.col(1) = z.col(0);
    const Eigen::Matrix2cd t11 = t.topLeftCorner(2, 2);
    for (int i = 0; i < m; ++i) {
      const C mu = es.eigenvalues()(i);
      const Eigen::VectorXcd y = es.eigenvectors().col(i);
      Eigen::VectorXcd full(n2);
      full.head(2) = (mu * Eigen::Matrix2cd::Identity() - t11).inverse() * (t.topRightCorner(2, m) * y);
      full.tail(m) = y;
      s.vectors.col(2 + i) = (q * full).normalized();
    }
  }
  return s;
}

Eigen::MatrixXcd assemble(const BlochBlocks& b, double phase) {
  const std::complex<double> ep = std::polar(1.0, phase), em = std::polar(1.0, -phase);
  return b.self.cast<std::complex<double>>() + ep * b.plus.cast<std::complex<double>>() +
         em * b.minus.cast<std::complex<double>>();
}

}  // namespace

Eigen::MatrixXcd bloch_matrix(int degree, int cells, const FluxScheme& scheme, double K, int m) {
  if (m < 1) throw Error(Errc::invalid_argument, "cell needs at least one element");
  return assemble(bloch_blocks(degree, cells, scheme, m), m * K);
}

DispersionResult dispersion_sweep(int degree, int cells, const FluxScheme& scheme, const std::vector<double>& K,
                                  int m) {
  if (m < 1) throw Error(Errc::invalid_argument, "cell needs at least one element");
  const BlochBlocks b = bloch_blocks(degree, cells, scheme, m);
  const int cs = b.size;
  const int es = cs / m;
  DispersionResult res;
  res.K = K;
  res.exact = K;
  for (double k : K) {
    const Spectrum sp = eigen_deflated(assemble(b, m * k), true);
    const auto& mu = sp.values;
    const auto& z = sp.vectors;
    std::vector<std::complex<double>> om(mu.size());
    for (int i = 0; i < mu.size(); ++i) om[i] = std::complex<double>(0.0, 1.0) * mu(i);

    // sampled plane wave exp(i q x / H) over the cell
    auto wave = [&](double q) {
      Eigen::VectorXcd w(cs);
      for (int j = 0; j < m; ++j)
        for (int l = 0; l < es; ++l) w(j * es + l) = std::polar(1.0, q * (j + double(l) / cells));
      return Eigen::VectorXcd(w.normalized());
    };
    auto correlation = [&](const Eigen::VectorXcd& w, int i) {
      const Eigen::VectorXcd u = z.col(i).head(cs);
      const double nu = u.norm();
      return nu == 0.0 ? 0.0 : std::abs(w.dot(u)) / nu;
    };
    const Eigen::VectorXcd w0 = wave(k);
    const int n = static_cast<int>(mu.size());
    int best = -1, mirror = -1;
    double best_corr = -1.0, mirror_corr = -1.0;
    for (int i = 0; i < n; ++i) {
      const double corr = correlation(w0, i);
      if (om[i].real() >= -1e-12 && corr > best_corr) {
        best_corr = corr;
        best = i;
      }
    }
    for (int i = 0; i < n; ++i) {
      if (i == best || om[i].real() > 1e-12) continue;
      const double corr = correlation(w0, i);
      if (corr > mirror_corr) {
        mirror_corr = corr;
        mirror = i;
      }
    }

    std::vector<ModeKind> kinds(n, ModeKind::spurious);
    const int jmax = m * (cells / 2 + 1);
    for (int i = 0; i < n; ++i) {
      if (i == best) {
        kinds[i] = ModeKind::physical;
      } else if (i == mirror) {
        kinds[i] = ModeKind::mirror;
      } else if (std::abs(om[i]) <= 1e-8) {
        kinds[i] = ModeKind::stationary;
      } else {
        for (int j = -jmax; j <= jmax; ++j) {
          const double q = k + 2.0 * kPi * j / m;
          if (j == 0 || std::abs(std::abs(om[i].real()) - std::abs(q)) > kAliasTolerance * std::abs(q)) continue;
          if (correlation(wave(q), i) >= kAliasCorrelation) {
            kinds[i] = ModeKind::alias;
            break;
          }
        }
      }
    }
    res.kind.push_back(std::move(kinds));
    res.mirror.push_back(mirror);
    res.omega.push_back(std::move(om));
    res.physical.push_back(best);
    res.correlation.push_back(best_corr);
  }
  return res;
}

std::vector<std::complex<double>> operator_spectrum(int degree, int cells, int elements, const FluxScheme& scheme,
                                                    BcKind left, BcKind right) {
  Mesh mesh = Mesh::uniform(1, elements, cells, 0.0, 1.0, left);
  mesh.bc[0] = {left, right};
  SemidiscOptions opt;
  opt.degree = degree;
  opt.flux = scheme;
  opt.path = SolverPath::direct;
  opt.threads = 1;
  Semidiscretization sd(mesh, Medium::uniform(1.0), opt);
  const Eigen::VectorXcd ev = eigen_deflated(global_operator(sd).cast<std::complex<double>>(), false).values;
  return {ev.data(), ev.data() + ev.size()};
}

double spectral_radius(int degree, int cells, int elements, const FluxScheme& scheme, BcKind left, BcKind right) {
  double r = 0.0;
  for (auto z : operator_spectrum(degree, cells, elements, scheme, left, right)) r = std::max(r, std::abs(z));
  return r;
}

}  // namespace gdwave
