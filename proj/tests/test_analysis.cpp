#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "doctest.h"
#include "gdwave/analysis.hpp"
#include "gdwave/fastpath.hpp"
#include "gdwave/operators.hpp"

using namespace gdwave;
using cd = std::complex<double>;

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::VectorXd vec(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }

// Bloch matrix written out from the 1-D operators and the flux formulas,
// with H = c = 1. Rows: the element; columns: its unknowns, the right
// neighbour's (phase e^{iK}) and the left neighbour's (e^{-iK}).
Eigen::MatrixXcd bloch_oracle(int p, int N, const FluxScheme& s, double K) {
  const auto ops = assemble_ops_1d(GdBasis(p, N), 1.0);
  const int n = ops.size();
  const Eigen::MatrixXd M = ops.mass.to_dense(), S = ops.stiffness.to_dense();
  const Eigen::VectorXd m = vec(ops.mean), lv = vec(ops.left.value), ld = vec(ops.left.derivative),
                        rv = vec(ops.right.value), rd = vec(ops.right.derivative);
  const cd ep = std::polar(1.0, K), em = std::polar(1.0, -K);

  // Traces as row functionals on Z = (U, V): value v, outward derivative dn.
  using Row = Eigen::RowVectorXcd;
  auto row = [&](const Eigen::VectorXd& a, bool on_v, cd phase, double sign) {
    Row r = Row::Zero(2 * n);
    (on_v ? r.tail(n) : r.head(n)) = (sign * phase) * a.transpose().cast<cd>();
    return r;
  };
  // right face: inside outward normal +1, neighbour sees it as its left face
  const Row in_v_r = row(rv, true, 1.0, 1.0), in_d_r = row(rd, false, 1.0, 1.0);
  const Row out_v_r = row(lv, true, ep, 1.0), out_d_r = row(ld, false, ep, -1.0);
  // left face: normal -1
  const Row in_v_l = row(lv, true, 1.0, 1.0), in_d_l = row(ld, false, 1.0, -1.0);
  const Row out_v_l = row(rv, true, em, 1.0), out_d_l = row(rd, false, em, 1.0);

  auto vstar = [&](double a, const Row& iv, const Row& id, const Row& ov, const Row& od) {
    return Row(a * iv + (1.0 - a) * ov - s.beta * (id + od));
  };
  auto gradn = [&](double a, const Row& iv, const Row& id, const Row& ov, const Row& od) {
    return Row((1.0 - a) * id - a * od - s.tau * (iv - ov));
  };
  const double ar = s.alpha, al = 1.0 - s.alpha;

  const double sigma = 1.0;
  const Eigen::MatrixXd saug = S + sigma * m * m.transpose();
  Eigen::MatrixXcd rhs_u = Eigen::MatrixXcd::Zero(n, 2 * n), rhs_v = Eigen::MatrixXcd::Zero(n, 2 * n);
  rhs_u.rightCols(n) = saug.cast<cd>();
  // normal derivative of the test function times (v* - v)
  rhs_u += (rd.cast<cd>() * (vstar(ar, in_v_r, in_d_r, out_v_r, out_d_r) - in_v_r));
  rhs_u += (-ld).cast<cd>() * (vstar(al, in_v_l, in_d_l, out_v_l, out_d_l) - in_v_l);
  rhs_v.leftCols(n) = (-S).cast<cd>();
  rhs_v += rv.cast<cd>() * gradn(ar, in_v_r, in_d_r, out_v_r, out_d_r);
  rhs_v += lv.cast<cd>() * gradn(al, in_v_l, in_d_l, out_v_l, out_d_l);

  Eigen::MatrixXcd a(2 * n, 2 * n);
  a.topRows(n) = saug.cast<cd>().lu().solve(rhs_u);
  a.bottomRows(n) = M.cast<cd>().lu().solve(rhs_v);
  return a;
}

std::vector<cd> sorted(std::vector<cd> v) {
  std::sort(v.begin(), v.end(), [](cd a, cd b) {
    if (std::abs(a.imag() - b.imag()) > 1e-7) return a.imag() < b.imag();
    return a.real() < b.real();
  });
  return v;
}

std::vector<double> k_grid(double lo, double hi, int n) {
  std::vector<double> k;
  for (int i = 0; i <= n; ++i) k.push_back(lo + (hi - lo) * i / n);
  return k;
}

}  // namespace

TEST_CASE("probed Bloch matrix equals the written-out operator") {
  for (int p : {1, 3, 5}) {
    for (const auto& s : {FluxScheme::central(), FluxScheme::alternating(), FluxScheme::upwind(1.0),
                          FluxScheme::upwind(0.4)}) {
      for (double K : {0.0, 0.7, -2.1, 3.0}) {
        const auto a = bloch_matrix(p, 9, s, K);
        const auto b = bloch_oracle(p, 9, s, K);
        CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-9 * b.cwiseAbs().maxCoeff());
      }
    }
  }
}

TEST_CASE("Bloch matrix phase periodicity and conjugate symmetry") {
  const auto s = FluxScheme::upwind(1.0);
  for (double K : {0.3, 1.7}) {
    const auto a = bloch_matrix(3, 9, s, K);
    CHECK((a - bloch_matrix(3, 9, s, K + 2.0 * kPi)).cwiseAbs().maxCoeff() <= 1e-12 * a.cwiseAbs().maxCoeff());
    const auto b = bloch_matrix(3, 9, s, -K);
    CHECK((a.conjugate() - b).cwiseAbs().maxCoeff() <= 1e-12 * a.cwiseAbs().maxCoeff());
  }
  const std::vector<double> ks{0.4, -0.4, 2.2, -2.2};
  for (const auto& sch : {FluxScheme::central(), FluxScheme::upwind(1.0)}) {
    auto r = dispersion_sweep(3, 9, sch, ks);
    for (int k = 0; k < 4; k += 2) {
      std::vector<cd> conj;
      for (auto w : r.omega[k + 1]) conj.push_back(-std::conj(w));  // mu -> conj(mu) means Omega -> -conj(Omega)
      auto x = sorted(r.omega[k]), y = sorted(conj);
      REQUIRE(x.size() == y.size());
      for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(x[i] - y[i]) <= 1e-8 * std::max(1.0, std::abs(x[i])));
    }
  }
}

TEST_CASE("zero wavenumber keeps the constant pair") {
  for (const auto& s : {FluxScheme::central(), FluxScheme::alternating(), FluxScheme::upwind(1.0)}) {
    auto r = dispersion_sweep(3, 9, s, {0.0});
    int zeros = 0;
    for (auto w : r.omega[0])
      if (std::abs(w) < 1e-9) ++zeros;
    CHECK(zeros >= 2);
    CHECK(std::abs(r.omega[0][r.physical[0]]) < 1e-9);
  }
}

TEST_CASE("dispersion sweep: damping signs and the physical branch") {
  const auto ks = k_grid(-kPi, kPi, 48);
  for (const auto& s : {FluxScheme::central(), FluxScheme::alternating(), FluxScheme::upwind(1.0)}) {
    auto r = dispersion_sweep(3, 9, s, ks);
    CHECK(r.exact == r.K);
    double max_im = -1.0, max_abs_im = 0.0;
    for (const auto& om : r.omega) {
      CHECK(om.size() == 20u);
      for (auto w : om) {
        max_im = std::max(max_im, w.imag());
        max_abs_im = std::max(max_abs_im, std::abs(w.imag()));
      }
    }
    CHECK(max_im <= 1e-10);
    if (s.conservative()) CHECK(max_abs_im <= 1e-9);
  }
  for (int p : {3, 5, 7}) {
    for (const auto& s : {FluxScheme::central(), FluxScheme::alternating(), FluxScheme::upwind(1.0)}) {
      auto r = dispersion_sweep(p, 9, s, {0.1});
      const cd w = r.omega[0][r.physical[0]];
      CHECK(std::abs(w.real() - 0.1) <= 1e-4 * 0.1);
      CHECK(r.correlation[0] > 0.999);
    }
  }
}

TEST_CASE("upwind damps the spurious modes") {
  const auto ks = k_grid(kPi / 4.0, 3.0 * kPi / 4.0, 16);
  auto r = dispersion_sweep(3, 9, FluxScheme::upwind(1.0), ks);
  for (std::size_t k = 0; k < ks.size(); ++k) {
    int spurious = 0;
    for (int i = 0; i < static_cast<int>(r.omega[k].size()); ++i)
      if (r.spurious(k, i)) {
        ++spurious;
        CHECK(r.omega[k][i].imag() <= -1e-3);
      }
    CHECK(spurious > 0);
  }
  // physical damping vanishes as K -> 0
  auto small = dispersion_sweep(3, 9, FluxScheme::upwind(1.0), {0.05, 0.1, 0.2, 0.4});
  double prev = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const double d = -small.omega[k][small.physical[k]].imag();
    CHECK(d >= prev - 1e-14);
    prev = d;
  }
  CHECK(-small.omega[0][small.physical[0]].imag() < 1e-10);
}

TEST_CASE("conservative fluxes leave the spurious modes undamped") {
  auto r = dispersion_sweep(3, 9, FluxScheme::alternating(), k_grid(0.1, 1.0, 5));
  for (std::size_t k = 0; k < r.K.size(); ++k)
    for (auto w : r.omega[k]) CHECK(std::abs(w.imag()) <= 1e-9);
}

TEST_CASE("one-element and two-element cells agree on the physical branch") {
  const std::vector<double> ks{0.1, 0.5, 1.0, 2.0};
  for (const auto& s : {FluxScheme::central(), FluxScheme::alternating(), FluxScheme::upwind(1.0)}) {
    auto one = dispersion_sweep(3, 9, s, ks, 1);
    auto two = dispersion_sweep(3, 9, s, ks, 2);
    for (std::size_t k = 0; k < ks.size(); ++k) {
      CHECK(two.omega[k].size() == 40u);
      CHECK(std::abs(one.omega[k][one.physical[k]] - two.omega[k][two.physical[k]]) <= 1e-8);
    }
  }
}

TEST_CASE("global operator spectrum") {
  const auto dn = std::pair{BcKind::dirichlet, BcKind::neumann};
  const auto per = std::pair{BcKind::periodic, BcKind::periodic};
  for (int N : {30, 60}) {
    for (int p : {1, 3, 5}) {
      for (auto bc : {per, dn}) {
        for (const auto& s : {FluxScheme::central(), FluxScheme::alternating(), FluxScheme::upwind(1.0)}) {
          auto sp = operator_spectrum(p, N, 1, s, bc.first, bc.second);
          CHECK(sp.size() == static_cast<std::size_t>(2 * (N + 1)));
          double max_re = -1.0;
          for (auto z : sp) max_re = std::max(max_re, z.real());
          if (s.conservative()) {
            for (auto z : sp) CHECK(std::abs(z.real()) <= 1e-8);
          } else {
            CHECK(max_re <= 1e-8);
          }
          // real operator: closed under conjugation
          std::vector<cd> c;
          for (auto z : sp) c.push_back(std::conj(z));
          auto a = sorted(sp), b = sorted(c);
          for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-7 * std::max(1.0, std::abs(a[i])));
        }
      }
    }
  }
}

TEST_CASE("central periodic radius equals the element pencil bound") {
  // one periodic element with the central flux: the face terms cancel on the
  // extreme mode, leaving sqrt of the largest eigenvalue of (S, M)
  for (int p : {1, 3, 5, 7}) {
    const auto d = diagonalize(assemble_ops_1d(GdBasis(p, 30), 1.0));
    const double bound = std::sqrt(d.eigenvalues.back());
    const double rho = spectral_radius(p, 30, 1, FluxScheme::central(), BcKind::periodic, BcKind::periodic);
    CHECK(rho == doctest::Approx(bound).epsilon(1e-8));
  }
}

TEST_CASE("spectral radius grows with p and scales with 1/h") {
  for (const auto& s : {FluxScheme::central(), FluxScheme::alternating(), FluxScheme::upwind(1.0)}) {
    double prev = 0.0;
    for (int p : {1, 3, 5, 7, 9}) {
      const double r30 = spectral_radius(p, 30, 1, s, BcKind::periodic, BcKind::periodic);
      const double r60 = spectral_radius(p, 60, 1, s, BcKind::periodic, BcKind::periodic);
      CHECK(r30 > prev);
      CHECK(r60 / r30 == doctest::Approx(2.0).epsilon(1e-2));
      prev = r30;
    }
  }
}
