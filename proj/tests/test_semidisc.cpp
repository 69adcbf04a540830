#include <cmath>
#include <cstdlib>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "gdwave/error.hpp"
#include "gdwave/harness.hpp"
#include "gdwave/semidisc.hpp"
#include "gdwave/timestep.hpp"

using namespace gdwave;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Textbook vector form in 1-D: n1 = +1, n2 = -1, grad u^k = dn_k * n_k.
FluxValues reference_flux(const FluxScheme& s, double alpha, Trace in, Trace out) {
  const double n1 = 1.0, n2 = -1.0;
  const double g1 = in.dn * n1, g2 = out.dn * n2;
  const double v_star = alpha * in.v + (1.0 - alpha) * out.v - s.beta * (g1 * n1 + g2 * n2);
  const double grad_star = (1.0 - alpha) * g1 + alpha * g2 - s.tau * (in.v - out.v) * n1;
  return {v_star, grad_star * n1};
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

SemidiscOptions opts(int p, FluxScheme flux, SolverPath path) {
  SemidiscOptions o;
  o.degree = p;
  o.flux = flux;
  o.path = path;
  o.threads = 1;
  return o;
}

double ramp(std::span<const double> x) {
  double s = 0.0;
  for (double c : x) s += std::sin(2.0 * kPi * c) + 0.3 * c;
  return s;
}

}  // namespace

TEST_CASE("flux presets") {
  auto c = FluxScheme::central();
  CHECK(c.alpha == 0.5);
  CHECK(c.conservative());
  auto a = FluxScheme::alternating();
  CHECK(a.alpha == 1.0);
  CHECK(a.conservative());
  auto u = FluxScheme::upwind(2.0);
  CHECK(u.alpha == 0.5);
  CHECK(u.beta == doctest::Approx(1.0));
  CHECK(u.tau == doctest::Approx(0.25));
  CHECK_FALSE(u.conservative());
  CHECK_THROWS_AS(FluxScheme::from_name("lax"), Error);
  CHECK_THROWS_AS(FluxScheme::upwind(0.0), Error);
}

TEST_CASE("numerical flux agrees with the vector form and is consistent") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (const auto& s : {FluxScheme::central(), FluxScheme::alternating(), FluxScheme::upwind(0.7)}) {
    for (int k = 0; k < 20; ++k) {
      Trace in{d(rng), d(rng)}, out{d(rng), d(rng)};
      for (double alpha : {s.alpha, 1.0 - s.alpha}) {
        auto f = numerical_flux(s, alpha, in, out);
        auto r = reference_flux(s, alpha, in, out);
        CHECK(f.v_star == doctest::Approx(r.v_star).epsilon(1e-14));
        CHECK(f.grad_n == doctest::Approx(r.grad_n).epsilon(1e-14));
      }
      // continuous traces
      auto f = numerical_flux(s, in, Trace{in.v, -in.dn});
      CHECK(f.v_star == doctest::Approx(in.v).epsilon(1e-14));
      CHECK(f.grad_n == doctest::Approx(in.dn).epsilon(1e-14));
    }
  }
  auto f = numerical_flux(FluxScheme::central(), {1.0, 0.0}, {0.0, 0.0});
  CHECK(f.v_star == doctest::Approx(0.5));
  auto g = numerical_flux(FluxScheme::upwind(1.0), {1.0, 1.0}, {0.0, 0.0});
  CHECK(std::abs(g.v_star) < 1e-15);
  CHECK(std::abs(g.grad_n) < 1e-15);  // 1/2 * 1 - 0 - 1/2 * (1 - 0)
}

TEST_CASE("face alpha orientation") {
  auto a = FluxScheme::alternating();
  CHECK(face_alpha(a, Endpoint::right, false) == 1.0);
  CHECK(face_alpha(a, Endpoint::left, false) == 0.0);
  CHECK(face_alpha(a, Endpoint::left, true) == 0.5);
  // both sides of a face agree on v*
  Trace lo{1.3, 0.2}, hi{-0.4, 0.9};
  auto from_lo = numerical_flux(a, face_alpha(a, Endpoint::right, false), lo, hi);
  auto from_hi = numerical_flux(a, face_alpha(a, Endpoint::left, false), hi, lo);
  CHECK(from_lo.v_star == doctest::Approx(from_hi.v_star));
  CHECK(from_lo.grad_n == doctest::Approx(-from_hi.grad_n));
}

TEST_CASE("boundary ghost traces") {
  auto d = apply_bc(BcKind::dirichlet, {3.0, 1.5}, 0.0);
  CHECK(d.v == -3.0);
  auto fc = numerical_flux(FluxScheme::central(), {3.0, 1.5}, d);
  CHECK(fc.v_star == 0.0);
  CHECK(fc.grad_n == 1.5);  // interior gradient only
  auto fd = numerical_flux(FluxScheme::central(), {3.0, 1.5}, apply_bc(BcKind::dirichlet, {3.0, 1.5}, 0.25));
  CHECK(fd.v_star == doctest::Approx(0.25));

  auto n = apply_bc(BcKind::neumann, {1.0, 2.0}, 0.0);
  CHECK(n.v == 1.0);
  CHECK(numerical_flux(FluxScheme::central(), {1.0, 2.0}, n).grad_n == 0.0);
  auto ng = apply_bc(BcKind::neumann, {1.0, 2.0}, 0.7);
  CHECK(numerical_flux(FluxScheme::central(), {1.0, 2.0}, ng).grad_n == doctest::Approx(0.7));

  auto p = apply_bc(BcKind::periodic, {1.0, 2.0}, 0.0, {5.0, 6.0});
  CHECK(p.v == 5.0);
  CHECK(p.dn == 6.0);
  CHECK(bc_from_name("neumann") == BcKind::neumann);
  CHECK_THROWS_AS(bc_from_name("robin"), Error);
}

TEST_CASE("mesh topology") {
  auto m = Mesh::uniform(2, 3, 9, 0.0, 1.0, BcKind::periodic);
  m.bc[1] = {BcKind::dirichlet, BcKind::neumann};
  CHECK(m.num_elements() == 9);
  int c[2] = {0, 2};
  const int e = m.element_index(c);
  CHECK(m.neighbour(e, 0, Endpoint::left) == m.element_index(std::vector<int>{2, 2}));
  CHECK(m.neighbour(e, 1, Endpoint::right) == -1);
  CHECK(m.neighbour(e, 1, Endpoint::left) == m.element_index(std::vector<int>{0, 1}));
  CHECK(m.cell_size(0) == doctest::Approx(1.0 / 27.0));
  m.validate(3);
  m.bc[0] = {BcKind::periodic, BcKind::dirichlet};
  CHECK_THROWS_AS(m.validate(3), Error);
  auto coarse = Mesh::uniform(1, 2, 2, 0.0, 1.0, BcKind::periodic);
  CHECK_THROWS_AS(coarse.validate(3), Error);
}

TEST_CASE("constant states are steady and V drives U") {
  for (int dim : {1, 2}) {
    for (auto path : {SolverPath::fast, SolverPath::direct, SolverPath::pcg}) {
      for (const auto& flux : {FluxScheme::central(), FluxScheme::alternating(), FluxScheme::upwind(1.0)}) {
        auto o = opts(3, flux, path);
        o.pcg_tolerance = 1e-14;
        Semidiscretization sd(Mesh::uniform(dim, 2, 5, 0.0, 1.0, BcKind::periodic), Medium::uniform(1.3), o);
        FieldState out;
        auto s = sd.interpolate([](auto) { return 2.5; }, [](auto) { return 0.0; });
        sd.rhs(s, out);
        CHECK(max_abs(out.u) < 1e-11);
        CHECK(max_abs(out.v) < 1e-10);

        auto w = sd.interpolate([](auto) { return 0.0; }, [](auto) { return -1.25; });
        sd.rhs(w, out);
        CHECK(max_diff(sd.to_nodal(out.u), sd.to_nodal(w.v)) < 1e-11);
        CHECK(max_abs(out.v) < 1e-10);
      }
    }
  }
}

TEST_CASE("semi-discrete residual of a smooth solution") {
  // Residual of the v-equation in the broken dual norm of the augmented
  // stiffness; the u-equation residual vanishes for continuous traces.
  const double t = 0.1, w = 2.0 * kPi;
  auto u = [&](std::span<const double> x) { return std::sin(w * x[0]) * std::cos(w * t); };
  auto v = [&](std::span<const double> x) { return -w * std::sin(w * x[0]) * std::sin(w * t); };
  auto a = [&](std::span<const double> x) { return -w * w * std::sin(w * x[0]) * std::cos(w * t); };
  for (const auto& flux : {FluxScheme::central(), FluxScheme::upwind(1.0)}) {
    std::vector<double> h, err;
    for (int N : {18, 36, 72, 144}) {
      auto mesh = Mesh::uniform(1, 2, N, 0.0, 1.0, BcKind::periodic);
      Semidiscretization sd(mesh, Medium::uniform(1.0), opts(3, flux, SolverPath::direct));
      Semidiscretization proj(mesh, Medium::uniform(1.0), opts(3, flux, SolverPath::direct),
                              {ForcingTerm{[](double) { return 1.0; }, a}});
      FieldState d, pd;
      auto s = sd.interpolate(u, v, t);
      sd.rhs(s, d);
      proj.rhs(proj.zero_state(t), pd);
      auto vt = sd.interpolate(v, v, t);
      CHECK(max_diff(d.u, vt.u) < 1e-12);

      const Eigen::MatrixXd M = sd.ops(0).mass.to_dense(), S = sd.ops(0).stiffness.to_dense();
      const int n = static_cast<int>(M.rows());
      const Eigen::VectorXd m = M * Eigen::VectorXd::Ones(n);
      const Eigen::LDLT<Eigen::MatrixXd> aug(S + m * m.transpose());
      double sum = 0.0;
      for (int e = 0; e < 2; ++e) {
        Eigen::VectorXd r(n);
        for (int i = 0; i < n; ++i) r(i) = d.v[e * n + i] - pd.v[e * n + i];
        const Eigen::VectorXd mr = M * r;
        sum += mr.dot(aug.solve(mr));
      }
      h.push_back(1.0 / N);
      err.push_back(std::sqrt(sum));
    }
    CHECK(regression_slope(h, err) >= 4.0 - 0.1);
  }
}

TEST_CASE("solver paths agree over ten steps") {
  auto mesh = Mesh::uniform(1, 2, 9, 0.0, 1.0, BcKind::periodic);
  auto u0 = [](std::span<const double> x) { return std::sin(2.0 * kPi * x[0]) + 0.2 * std::cos(6.0 * kPi * x[0]); };
  auto v0 = [](std::span<const double> x) { return std::cos(4.0 * kPi * x[0]); };
  for (const auto& flux : {FluxScheme::central(), FluxScheme::alternating(), FluxScheme::upwind(1.0)}) {
    std::vector<std::vector<double>> results;
    for (auto path : {SolverPath::fast, SolverPath::direct, SolverPath::pcg}) {
      auto o = opts(3, flux, path);
      o.pcg_tolerance = 1e-14;
      Semidiscretization sd(mesh, Medium::uniform(1.0), o);
      auto s = sd.interpolate(u0, v0);
      const double dt = 0.075 / (2.0 * kPi) * mesh.min_cell_size();
      for (int k = 0; k < 10; ++k) rk4_step(s, dt, [&](const FieldState& x, FieldState& y) { sd.rhs(x, y); });
      auto nodal = sd.to_nodal(s.u);
      auto nv = sd.to_nodal(s.v);
      nodal.insert(nodal.end(), nv.begin(), nv.end());
      results.push_back(nodal);
    }
    CHECK(max_diff(results[0], results[1]) <= 1e-9);
    CHECK(max_diff(results[0], results[2]) <= 1e-9);
  }
}

TEST_CASE("2-D paths agree with Dirichlet and Neumann walls") {
  auto mesh = Mesh::uniform(2, 2, 6, 0.0, 1.0, BcKind::dirichlet);
  mesh.bc[1] = {BcKind::neumann, BcKind::dirichlet};
  auto u0 = [](std::span<const double> x) { return std::sin(kPi * x[0]) * std::cos(0.5 * kPi * x[1]) + 0.1 * x[1]; };
  auto v0 = [](std::span<const double> x) { return x[0] * (1.0 - x[0]) * x[1]; };
  std::vector<std::vector<double>> results;
  for (auto path : {SolverPath::fast, SolverPath::direct, SolverPath::pcg}) {
    auto o = opts(3, FluxScheme::upwind(1.0), path);
    o.pcg_tolerance = 1e-14;
    Semidiscretization sd(mesh, Medium::uniform(1.0), o);
    FieldState s = sd.interpolate(u0, v0), out;
    sd.rhs(s, out);
    auto r = sd.to_nodal(out.u);
    auto rv = sd.to_nodal(out.v);
    r.insert(r.end(), rv.begin(), rv.end());
    results.push_back(r);
  }
  const double scale = max_abs(results[1]);
  CHECK(max_diff(results[0], results[1]) <= 1e-10 * scale);
  CHECK(max_diff(results[0], results[2]) <= 1e-10 * scale);
}

TEST_CASE("unit c^2 field on the iterative path matches constant c") {
  auto mesh = Mesh::uniform(2, 2, 5, 0.0, 1.0, BcKind::periodic);
  auto o = opts(3, FluxScheme::upwind(1.0), SolverPath::pcg);
  o.pcg_tolerance = 1e-14;
  Semidiscretization a(mesh, Medium::uniform(1.0), o);
  Semidiscretization b(mesh, Medium::field([](auto) { return 1.0; }, 1.0), o);
  auto s = a.interpolate(ramp, [](std::span<const double> x) { return x[0] * x[1]; });
  FieldState ra, rb;
  a.rhs(s, ra);
  b.rhs(s, rb);
  CHECK(max_diff(ra.u, rb.u) < 1e-9);
  CHECK(max_diff(ra.v, rb.v) < 1e-9);
}

TEST_CASE("variable speed is refused on the fast path") {
  auto mesh = Mesh::uniform(2, 1, 5, 0.0, 1.0, BcKind::periodic);
  auto med = Medium::field([](std::span<const double> x) { return 1.0 + x[0] * x[0]; }, std::sqrt(2.0));
  try {
    Semidiscretization sd(mesh, med, opts(3, FluxScheme::central(), SolverPath::fast));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::fast_path_unavailable);
  }
}

TEST_CASE("discrete energy values") {
  auto u = [](std::span<const double> x) { return std::sin(2.0 * kPi * x[0]); };
  auto v = [](std::span<const double> x) { return std::cos(2.0 * kPi * x[0]); };
  // E = 1/2 (c^2 |u_x|^2 + |v|^2) = 1/2 (2 pi^2 c^2 + 1/2)
  auto exact = [](double c) { return 0.5 * (2.0 * kPi * kPi * c * c + 0.5); };
  for (auto path : {SolverPath::fast, SolverPath::direct, SolverPath::pcg}) {
    auto mesh = Mesh::uniform(1, 2, 80, 0.0, 1.0, BcKind::periodic);
    Semidiscretization sd(mesh, Medium::uniform(1.0), opts(3, FluxScheme::central(), path));
    CHECK(sd.energy(sd.zero_state()) == 0.0);
    CHECK(std::abs(sd.energy(sd.interpolate([](auto) { return 4.0; }, [](auto) { return 0.0; }))) < 1e-10);
    CHECK(sd.energy(sd.interpolate(u, v)) == doctest::Approx(exact(1.0)).epsilon(1e-6));
    Semidiscretization sc(mesh, Medium::uniform(2.0), opts(3, FluxScheme::central(), path));
    CHECK(sc.energy(sc.interpolate(u, v)) == doctest::Approx(exact(2.0)).epsilon(1e-6));
  }
  // interpolation error in the energy falls at fourth order for p = 3
  std::vector<double> h, err;
  for (int N : {10, 20, 40, 80}) {
    Semidiscretization sd(Mesh::uniform(1, 2, N, 0.0, 1.0, BcKind::periodic), Medium::uniform(1.0),
                          opts(3, FluxScheme::central(), SolverPath::direct));
    h.push_back(1.0 / N);
    err.push_back(std::abs(sd.energy(sd.interpolate(u, v)) - exact(1.0)));
  }
  CHECK(regression_slope(h, err) >= 3.8);
}

TEST_CASE("energy conservation and dissipation over a full run") {
  auto mesh = Mesh::uniform(1, 2, 20, 0.0, 1.0, BcKind::periodic);
  auto u0 = [](std::span<const double> x) { return std::sin(8.0 * kPi * x[0]); };
  auto v0 = [](std::span<const double> x) { return -8.0 * kPi * std::cos(8.0 * kPi * x[0]); };
  TimeControls tc;
  tc.t_end = 1.075;
  tc.h = mesh.min_cell_size();
  for (const auto& flux : {FluxScheme::central(), FluxScheme::alternating()}) {
    Semidiscretization sd(mesh, Medium::uniform(1.0), opts(3, flux, SolverPath::fast));
    auto s = sd.interpolate(u0, v0);
    const double e0 = sd.energy(s);
    evolve(s, tc, [&](const FieldState& x, FieldState& y) { sd.rhs(x, y); });
    CHECK(std::abs(sd.energy(s) - e0) / e0 <= 1e-7);
  }
  for (double xi : {0.5, 1.0, 2.0}) {
    Semidiscretization sd(mesh, Medium::uniform(1.0), opts(3, FluxScheme::upwind(xi), SolverPath::fast));
    auto s = sd.interpolate(u0, v0);
    const double e0 = sd.energy(s);
    double prev = e0;
    bool monotone = true;
    evolve(s, tc, [&](const FieldState& x, FieldState& y) { sd.rhs(x, y); },
           {[&](std::size_t, const FieldState& st) {
             const double e = sd.energy(st);
             if (e > prev * (1.0 + 1e-12)) monotone = false;
             prev = e;
           }});
    CHECK(monotone);
    CHECK(prev <= e0);
    CHECK(prev > 0.5 * e0);  // dissipation stays at the truncation level
  }
}

TEST_CASE("worker threads do not change the result") {
  auto mesh = Mesh::uniform(2, 3, 6, 0.0, 1.0, BcKind::periodic);
  for (auto path : {SolverPath::fast, SolverPath::pcg}) {
    std::vector<std::vector<double>> r;
    for (int threads : {1, 3}) {
      auto o = opts(3, FluxScheme::upwind(1.0), path);
      o.threads = threads;
      Semidiscretization sd(mesh, Medium::uniform(1.0), o);
      auto s = sd.interpolate(ramp, ramp);
      FieldState out;
      sd.rhs(s, out);
      sd.rhs(s, out);
      auto x = out.u;
      x.insert(x.end(), out.v.begin(), out.v.end());
      r.push_back(x);
    }
    CHECK(max_diff(r[0], r[1]) <= 1e-12 * max_abs(r[0]));
  }
}
