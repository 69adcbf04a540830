#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "gdwave/banded.hpp"
#include "gdwave/error.hpp"
#include "gdwave/operators.hpp"
#include "gdwave/pcg.hpp"
#include "gdwave/sparse.hpp"

using namespace gdwave;
using namespace gdwave::linalg;

namespace {

Eigen::MatrixXd dense_kron(const std::vector<Eigen::MatrixXd>& factors) {
  // axis 0 fastest => M = M_{d-1} x ... x M_0
  Eigen::MatrixXd k = Eigen::MatrixXd::Ones(1, 1);
  for (const auto& f : factors) {
    Eigen::MatrixXd next(k.rows() * f.rows(), k.cols() * f.cols());
    for (int i = 0; i < f.rows(); ++i)
      for (int j = 0; j < f.cols(); ++j) next.block(i * k.rows(), j * k.cols(), k.rows(), k.cols()) = f(i, j) * k;
    k = next;
  }
  return k;
}

SymmetricBandedMatrix random_spd_banded(int n, int band, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SymmetricBandedMatrix a(n, band);
  for (int i = 0; i < n; ++i) {
    for (int j = std::max(0, i - band); j < i; ++j) a.at(i, j) = u(rng);
    a.at(i, i) = 2.0 * band + 1.0 + std::abs(u(rng));
  }
  return a;
}

LinearAction from_csr(const CsrMatrix& a) {
  return [&a](std::span<const double> x, std::span<double> y) { a.multiply(x, y); };
}

LinearAction identity_action() {
  return [](std::span<const double> x, std::span<double> y) { std::copy(x.begin(), x.end(), y.begin()); };
}

}  // namespace

TEST_CASE("banded Cholesky") {
  SUBCASE("identity factors to identity") {
    SymmetricBandedMatrix eye(5, 2);
    for (int i = 0; i < 5; ++i) eye.at(i, i) = 1.0;
    const BandedCholesky c(eye);
    CHECK((c.factor().to_dense() - Eigen::MatrixXd::Identity(5, 5)).norm() == 0.0);
  }
  SUBCASE("p = 1 mass matrix round trip") {
    const auto ops = assemble_ops_1d(GdBasis(1, 8), 1.0);
    std::vector<double> ones(9, 1.0), b(9);
    ops.mass.multiply(ones, b);
    const BandedCholesky c(ops.mass);
    c.solve(b);
    for (double v : b) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("singular stiffness is not positive definite") {
    const auto ops = assemble_ops_1d(GdBasis(3, 9), 1.0);
    try {
      BandedCholesky c(ops.stiffness);
      FAIL("expected not-positive-definite");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::not_positive_definite);
    }
  }
  SUBCASE("solve flop count is linear in size at fixed bandwidth") {
    std::mt19937 rng(3);
    std::vector<double> sizes, flops;
    for (int n : {100, 200, 400, 800}) {
      const BandedCholesky c(random_spd_banded(n, 3, rng));
      std::vector<double> x(n, 1.0);
      std::uint64_t f = 0;
      c.solve(x, &f);
      sizes.push_back(std::log(n));
      flops.push_back(std::log(static_cast<double>(f)));
    }
    const double slope = (flops.back() - flops.front()) / (sizes.back() - sizes.front());
    CHECK(slope == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_CASE("Kronecker solves") {
  std::mt19937 rng(11);
  SUBCASE("d = 2 mass applied to ones") {
    const auto ops = assemble_ops_1d(GdBasis(3, 9), 0.5);
    const KroneckerFactorization f({ops.mass, ops.mass});
    std::vector<double> ones(100, 1.0), b(100), work(100);
    apply_kronecker({ops.mass, ops.mass}, f.shape(), ones, b, work);
    const auto x = f.solved(b);
    for (double v : x) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("dense oracle, every dimension up to 3") {
    for (int d = 1; d <= 3; ++d) {
      std::vector<SymmetricBandedMatrix> factors;
      std::vector<Eigen::MatrixXd> dense;
      for (int a = 0; a < d; ++a) {
        factors.push_back(random_spd_banded(4 + a, 2, rng));
        dense.push_back(factors.back().to_dense());
      }
      const KroneckerFactorization f(factors);
      const Eigen::MatrixXd k = dense_kron(dense);
      Eigen::VectorXd b = Eigen::VectorXd::Random(k.rows());
      const Eigen::VectorXd oracle = k.lu().solve(b);
      const auto x = f.solved(std::span<const double>(b.data(), b.size()));
      for (int i = 0; i < k.rows(); ++i) CHECK(std::abs(x[i] - oracle(i)) <= 1e-11);
    }
  }
  SUBCASE("d = 2, 5x5 factors, 1e-12") {
    std::vector<SymmetricBandedMatrix> factors{random_spd_banded(5, 2, rng), random_spd_banded(5, 2, rng)};
    const KroneckerFactorization f(factors);
    const Eigen::MatrixXd k = dense_kron({factors[0].to_dense(), factors[1].to_dense()});
    Eigen::VectorXd b = Eigen::VectorXd::Random(25);
    const Eigen::VectorXd oracle = k.lu().solve(b);
    const auto x = f.solved(std::span<const double>(b.data(), b.size()));
    for (int i = 0; i < 25; ++i) CHECK(std::abs(x[i] - oracle(i)) <= 1e-12);
  }
  SUBCASE("d = 3, sizes (4, 5, 6) multiply then solve") {
    std::vector<SymmetricBandedMatrix> factors{random_spd_banded(4, 1, rng), random_spd_banded(5, 2, rng),
                                               random_spd_banded(6, 3, rng)};
    const KroneckerFactorization f(factors);
    std::vector<double> x0(120), b(120), work(120);
    std::uniform_real_distribution<double> u(-1, 1);
    for (double& v : x0) v = u(rng);
    apply_kronecker(factors, f.shape(), x0, b, work);
    const auto x = f.solved(b);
    for (int i = 0; i < 120; ++i) CHECK(std::abs(x[i] - x0[i]) <= 1e-12);
  }
  SUBCASE("length mismatch") {
    const KroneckerFactorization f({random_spd_banded(4, 1, rng)});
    std::vector<double> b(5, 1.0);
    CHECK_THROWS_AS(f.solve(std::span<double>(b)), Error);
  }
}

TEST_CASE("PCG") {
  SUBCASE("identity operator converges in one iteration") {
    std::vector<double> b{1, 2, 3, 4}, x(4, 0.0);
    const auto r = pcg_solve(identity_action(), identity_action(), b, x, 1e-12, 10);
    CHECK(r.iterations == 1);
    for (int i = 0; i < 4; ++i) CHECK(x[i] == doctest::Approx(b[i]));
  }
  SUBCASE("diagonal operator with exact inverse preconditioner") {
    const std::vector<double> d{1, 10, 100, 1000, 3};
    LinearAction op = [&](std::span<const double> x, std::span<double> y) {
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = d[i] * x[i];
    };
    LinearAction inv = [&](std::span<const double> x, std::span<double> y) {
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] / d[i];
    };
    std::vector<double> b{1, 1, 1, 1, 1}, x(5, 0.0);
    CHECK(pcg_solve(op, inv, b, x, 1e-12, 10).iterations == 1);
  }
  SUBCASE("warm start at the solution takes zero iterations") {
    std::vector<double> b{1, 2}, x{1, 2};
    CHECK(pcg_solve(identity_action(), identity_action(), b, x, 1e-6, 10).iterations == 0);
  }
  SUBCASE("tiny and subnormal right-hand sides are solved, not rejected") {
    const auto ops = assemble_ops_1d(GdBasis(3, 12), 1.0);
    std::vector<CsrMatrix::Triplet> t;
    for (int i = 0; i < ops.size(); ++i)
      for (int j = 0; j < ops.size(); ++j)
        if (ops.mass(i, j) != 0.0) t.push_back({i, j, ops.mass(i, j)});
    const CsrMatrix a(ops.size(), ops.size(), t);
    std::vector<double> ref(ops.size(), 0.0), b(ops.size());
    for (int i = 0; i < ops.size(); ++i) b[i] = std::cos(0.7 * i);
    pcg_solve(from_csr(a), identity_action(), b, ref, 1e-12, 200);
    for (double s : {1e-200, 1e-310}) {
      std::vector<double> bs(b), x(ops.size(), 0.5);  // stale guess far above the data
      for (double& v : bs) v *= s;
      REQUIRE_NOTHROW(pcg_solve(from_csr(a), identity_action(), bs, x, 1e-12, 200));
      for (int i = 0; i < ops.size(); ++i) CHECK(std::abs(x[i] / s - ref[i]) <= 1e-6 * std::abs(ref[i]) + 1e-6);
    }
  }
  SUBCASE("max iterations exceeded") {
    const auto ops = assemble_ops_1d(GdBasis(3, 40), 1.0);
    std::vector<CsrMatrix::Triplet> t;
    for (int i = 0; i < ops.size(); ++i)
      for (int j = 0; j < ops.size(); ++j)
        if (ops.mass(i, j) != 0.0) t.push_back({i, j, ops.mass(i, j) + ops.stiffness(i, j)});
    const CsrMatrix a(ops.size(), ops.size(), t);
    std::vector<double> b(ops.size(), 1.0), x(ops.size(), 0.0);
    b[3] = -5.0;
    try {
      pcg_solve(from_csr(a), identity_action(), b, x, 1e-14, 2);
      FAIL("expected max-iterations-exceeded");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::max_iterations_exceeded);
    }
  }
}

TEST_CASE("IC(0)") {
  SUBCASE("diagonal matrix factors exactly") {
    const CsrMatrix a(3, 3, {{0, 0, 4.0}, {1, 1, 9.0}, {2, 2, 16.0}});
    const IncompleteCholesky ic(a);
    std::vector<double> r{4, 9, 16}, z(3);
    ic.apply(r, z);
    for (double v : z) CHECK(v == doctest::Approx(1.0));
    CHECK(ic.shift() == 0.0);
  }
  SUBCASE("pattern-complete banded matrix: IC(0) is exact Cholesky, PCG takes one step") {
    // A tridiagonal SPD matrix has a bidiagonal Cholesky factor: no fill.
    const int n = 30;
    std::vector<CsrMatrix::Triplet> t;
    for (int i = 0; i < n; ++i) {
      t.push_back({i, i, 4.0 + 0.1 * i});
      if (i > 0) {
        t.push_back({i, i - 1, -1.0});
        t.push_back({i - 1, i, -1.0});
      }
    }
    const CsrMatrix a(n, n, t);
    const IncompleteCholesky ic(a);
    LinearAction pre = [&](std::span<const double> r, std::span<double> z) { ic.apply(r, z); };
    std::vector<double> b(n), x(n, 0.0);
    for (int i = 0; i < n; ++i) b[i] = std::sin(i + 1.0);
    CHECK(pcg_solve(from_csr(a), pre, b, x, 1e-12, 50).iterations == 1);
  }
  SUBCASE("Kronecker mass: IC(0) reproduces the tensor Cholesky factor") {
    const auto ops = assemble_ops_1d(GdBasis(3, 10), 0.5);
    const auto m = kronecker_mass({&ops, &ops});
    const IncompleteCholesky ic(m);
    LinearAction pre = [&](std::span<const double> r, std::span<double> z) { ic.apply(r, z); };
    std::vector<double> b(m.rows()), x(m.rows(), 0.0);
    for (int i = 0; i < m.rows(); ++i) b[i] = std::cos(0.3 * i);
    CHECK(pcg_solve(from_csr(m), pre, b, x, 1e-10, 50).iterations == 1);
  }
  SUBCASE("2-D tensor-band matrix: fewer iterations than plain CG") {
    const GdBasis basis(3, 12);
    const ElementBox box{{0.0, 0.0}, {0.5, 0.5}};
    const auto c2 = [](std::span<const double> x) { return 1.0 + x[0] * x[0] + x[1] * x[1]; };
    const auto s = assemble_weighted_stiffness(basis, box, c2, 6);
    const auto m = assemble_weighted_mass(basis, box, [](std::span<const double>) { return 1.0; }, 6);
    std::vector<CsrMatrix::Triplet> t;
    for (int i = 0; i < s.rows(); ++i)
      for (int k = s.row_ptr()[i]; k < s.row_ptr()[i + 1]; ++k)
        t.push_back({i, s.col_idx()[k], s.values()[k] + 50.0 * m.coeff(i, s.col_idx()[k])});
    const CsrMatrix a(s.rows(), s.cols(), t);
    const IncompleteCholesky ic(a);
    LinearAction pre = [&](std::span<const double> r, std::span<double> z) { ic.apply(r, z); };
    std::vector<double> b(a.rows()), x1(a.rows(), 0.0), x2(a.rows(), 0.0);
    for (int i = 0; i < a.rows(); ++i) b[i] = std::sin(0.7 * i) + 0.1;
    const int plain = pcg_solve(from_csr(a), identity_action(), b, x1, 1e-8, 5000).iterations;
    const int ic0 = pcg_solve(from_csr(a), pre, b, x2, 1e-8, 5000).iterations;
    CHECK(ic0 < plain);
  }
  SUBCASE("nonpositive pivot triggers a diagonal shift") {
    const CsrMatrix a(2, 2, {{0, 0, 1.0}, {0, 1, 2.0}, {1, 0, 2.0}, {1, 1, 1.0}});
    const IncompleteCholesky ic(a);
    CHECK(ic.shift() > 1.0);
    std::vector<double> r{1.0, -1.0}, z(2);
    ic.apply(r, z);
    CHECK(std::isfinite(z[0]));
    CHECK(std::isfinite(z[1]));
  }
}

TEST_CASE("constant-mode augmentation") {
  const auto ops = assemble_ops_1d(GdBasis(3, 9), 1.0);
  const int n = ops.size();
  LinearAction base = [&](std::span<const double> x, std::span<double> y) { ops.stiffness.multiply(x, y); };
  std::vector<double> diag(n);
  for (int i = 0; i < n; ++i) diag[i] = ops.stiffness(i, i);
  const double sigma = AugmentedOperator::default_scale(diag, ops.mean);
  const AugmentedOperator aug(base, ops.mean, sigma);
  const double msum = std::accumulate(ops.mean.begin(), ops.mean.end(), 0.0);

  std::vector<double> ones(n, 1.0), y(n);
  aug.apply(ones, y);
  for (int i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(sigma * ops.mean[i] * msum).epsilon(1e-10));

  // x orthogonal to m
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = std::sin(1.0 + i);
  const double proj = std::inner_product(x.begin(), x.end(), ops.mean.begin(), 0.0) /
                      std::inner_product(ops.mean.begin(), ops.mean.end(), ops.mean.begin(), 0.0);
  for (int i = 0; i < n; ++i) x[i] -= proj * ops.mean[i];
  std::vector<double> ax(n);
  aug.apply(x, y);
  ops.stiffness.multiply(x, ax);
  for (int i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(ax[i]).epsilon(1e-12));

  // round trip through PCG with a Sherman-Morrison preconditioner
  std::vector<double> x0(n), b(n), sol(n, 0.0);
  for (int i = 0; i < n; ++i) x0[i] = std::cos(0.4 * i) + 2.0;
  aug.apply(x0, b);
  std::vector<CsrMatrix::Triplet> t;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (std::abs(i - j) <= 3) t.push_back({i, j, ops.stiffness(i, j)});
  const IncompleteCholesky ic(CsrMatrix(n, n, t), 1e-3);
  const ShermanMorrisonPreconditioner pre(
      [&](std::span<const double> r, std::span<double> z) { ic.apply(r, z); }, ops.mean, sigma);
  pcg_solve(aug.action(), [&](std::span<const double> r, std::span<double> z) { pre.apply(r, z); }, b, sol,
            1e-13, 200);
  for (int i = 0; i < n; ++i) CHECK(sol[i] == doctest::Approx(x0[i]).epsilon(1e-9));
}
