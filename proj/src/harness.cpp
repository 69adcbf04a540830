#include "gdwave/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "gdwave/error.hpp"
#include "gdwave/quadrature.hpp"

namespace gdwave {

using std::numbers::pi;

PointFunction ManufacturedSolution::u_at(double t) const {
  auto f = evaluate;
  return [f, t](std::span<const double> x) { return f(x, t).u; };
}

PointFunction ManufacturedSolution::v_at(double t) const {
  auto f = evaluate;
  return [f, t](std::span<const double> x) { return f(x, t).v; };
}

ManufacturedSolution manufactured_solution(const std::string& id) {
  ManufacturedSolution m;
  m.id = id;
  if (id == "traveling-1d") {
    m.dim = 1;
    m.evaluate = [](std::span<const double> x, double t) {
      const double c = 1.0, k = 8.0 * pi;
      const double ph = k * (x[0] - c * t);
      ExactValues e;
      e.u = std::sin(ph);
      e.v = -k * c * std::cos(ph);
      e.grad[0] = k * std::cos(ph);
      return e;
    };
  } else if (id == "standing-2d") {
    m.dim = 2;
    m.bc = BcKind::dirichlet;
    m.evaluate = [](std::span<const double> x, double t) {
      const double k = 15.0 * pi, w = 15.0 * std::numbers::sqrt2 * pi;
      const double sx = std::sin(k * x[0]), sy = std::sin(k * x[1]);
      ExactValues e;
      e.u = std::cos(w * t) * sx * sy;
      e.v = -w * std::sin(w * t) * sx * sy;
      e.grad[0] = std::cos(w * t) * k * std::cos(k * x[0]) * sy;
      e.grad[1] = std::cos(w * t) * sx * k * std::cos(k * x[1]);
      return e;
    };
  } else if (id == "timing-2d") {
    m.dim = 2;
    m.evaluate = [](std::span<const double> x, double t) {
      const double k = 16.0 * pi;
      ExactValues e;
      e.u = std::sin(k * t) * std::sin(k * x[0]) + std::cos(k * t) * std::cos(k * x[1]);
      e.v = k * std::cos(k * t) * std::sin(k * x[0]) - k * std::sin(k * t) * std::cos(k * x[1]);
      e.grad[0] = std::sin(k * t) * k * std::cos(k * x[0]);
      e.grad[1] = -std::cos(k * t) * k * std::sin(k * x[1]);
      return e;
    };
  } else if (id == "variable-2d") {
    m.dim = 2;
    m.medium = Medium::field([](std::span<const double> x) { return 1.0 + x[0] * x[0] + x[1] * x[1]; },
                             std::sqrt(3.0));
    // f = u_tt - div(c^2 grad u) = sin(w t) g(x, y)
    const auto g = [](std::span<const double> x) {
      const double k = 8.0 * pi;
      const double sx = std::sin(k * x[0]), sy = std::sin(k * x[1]);
      const double cx = std::cos(k * x[0]), cy = std::cos(k * x[1]);
      return 2.0 * k * k * (x[0] * x[0] + x[1] * x[1]) * sx * sy - 2.0 * k * (x[0] * cx * sy + x[1] * sx * cy);
    };
    const double w = 8.0 * std::numbers::sqrt2 * pi;
    m.forcing.push_back({[w](double t) { return std::sin(w * t); }, g});
    m.evaluate = [g, w](std::span<const double> x, double t) {
      const double k = 8.0 * pi;
      const double sx = std::sin(k * x[0]), sy = std::sin(k * x[1]);
      ExactValues e;
      e.u = std::sin(w * t) * sx * sy;
      e.v = w * std::cos(w * t) * sx * sy;
      e.grad[0] = std::sin(w * t) * k * std::cos(k * x[0]) * sy;
      e.grad[1] = std::sin(w * t) * sx * k * std::cos(k * x[1]);
      e.forcing = std::sin(w * t) * g(x);
      return e;
    };
  } else {
    throw Error(Errc::unknown_tag, "unknown manufactured solution '" + id + "'");
  }
  return m;
}

ErrorNorms error_norms(const Semidiscretization& sd, const FieldState& state,
                       const std::function<ExactValues(std::span<const double>, double)>& exact) {
  const Mesh& mesh = sd.mesh();
  const GdBasis& basis = sd.basis();
  const int d = mesh.dim;
  const int p = basis.degree();
  const int n1 = basis.nodes();
  const int ncell = basis.cells();
  const GaussRule rule = gauss_legendre_unit(p + 3);
  const int nq = static_cast<int>(rule.points.size());
  const auto u = sd.to_nodal(state.u);
  const auto v = sd.to_nodal(state.v);

  // per axis, per cell, per quadrature point: p+1 values and derivatives
  std::vector<double> val(static_cast<std::size_t>(ncell) * nq * (p + 1));
  std::vector<double> der(val.size());
  for (int c = 0; c < ncell; ++c)
    for (int q = 0; q < nq; ++q) {
      const std::size_t o = (static_cast<std::size_t>(c) * nq + q) * (p + 1);
      basis.evaluate_cell(c, rule.points[q], std::span<double>(val.data() + o, p + 1),
                          std::span<double>(der.data() + o, p + 1));
    }

  double l2 = 0.0, en = 0.0;
  std::vector<int> cell(d), quad(d), loc(d);
  std::vector<double> x(d);
  const int cells_total = static_cast<int>(std::pow(ncell, d));
  const int quad_total = static_cast<int>(std::pow(nq, d));
  const int local_total = static_cast<int>(std::pow(p + 1, d));
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const ElementBox box = mesh.box(e);
    const std::size_t off = static_cast<std::size_t>(e) * sd.element_size();
    for (int ci = 0; ci < cells_total; ++ci) {
      for (int a = 0, r = ci; a < d; ++a, r /= ncell) cell[a] = r % ncell;
      for (int qi = 0; qi < quad_total; ++qi) {
        double w = 1.0;
        for (int a = 0, r = qi; a < d; ++a, r /= nq) {
          quad[a] = r % nq;
          const double hcell = box.lengths[a] / ncell;
          x[a] = box.origin[a] + (cell[a] + rule.points[quad[a]]) * hcell;
          w *= rule.weights[quad[a]] * hcell;
        }
        double uh = 0.0, vh = 0.0;
        std::array<double, 3> gh{};
        for (int li = 0; li < local_total; ++li) {
          std::size_t node = 0, stride = 1;
          double phi = 1.0;
          std::array<double, 3> dphi{1.0, 1.0, 1.0};
          for (int a = 0, r = li; a < d; ++a, r /= (p + 1)) {
            loc[a] = r % (p + 1);
            const std::size_t o = (static_cast<std::size_t>(cell[a]) * nq + quad[a]) * (p + 1) + loc[a];
            for (int b = 0; b < d; ++b) dphi[b] *= (a == b) ? der[o] / box.lengths[a] : val[o];
            phi *= val[o];
            node += static_cast<std::size_t>(basis.first_active(cell[a]) + loc[a]) * stride;
            stride *= n1;
          }
          uh += u[off + node] * phi;
          vh += v[off + node] * phi;
          for (int b = 0; b < d; ++b) gh[b] += u[off + node] * dphi[b];
        }
        const ExactValues ex = exact(x, state.t);
        l2 += w * (ex.u - uh) * (ex.u - uh);
        double g2 = 0.0;
        for (int b = 0; b < d; ++b) g2 += (ex.grad[b] - gh[b]) * (ex.grad[b] - gh[b]);
        en += w * (g2 + (ex.v - vh) * (ex.v - vh));
      }
    }
  }
  return {std::sqrt(l2), std::sqrt(en)};
}

double regression_slope(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size() || h.size() < 2)
    throw Error(Errc::invalid_argument, "regression needs at least two matching points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0) || !(err[i] > 0.0)) throw Error(Errc::invalid_argument, "regression needs positive data");
    const double lx = std::log(h[i]), ly = std::log(err[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergeReport run_converge(const ConvergeConfig& cfg) {
  const ManufacturedSolution ms = manufactured_solution(cfg.solution);
  ConvergeReport rep;
  std::vector<double> hs, l2s, ens;
  double tol = cfg.tolerance_base;
  for (const LadderPoint& lp : cfg.ladder) {
    ConvergeRow row;
    row.n = lp.n;
    row.N = lp.N;
    try {
      Mesh mesh = Mesh::uniform(ms.dim, lp.n, lp.N, ms.lower, ms.upper, cfg.override_bc ? cfg.bc : ms.bc);
      SemidiscOptions opt;
      opt.degree = cfg.degree;
      opt.flux = cfg.flux;
      opt.path = cfg.path;
      opt.pcg_tolerance = tol;
      Semidiscretization sd(mesh, ms.medium, opt, ms.forcing);
      row.h = mesh.min_cell_size();
      FieldState s = sd.interpolate(ms.u_at(0.0), ms.v_at(0.0), 0.0);
      TimeControls tc;
      tc.cfl = cfg.cfl;
      tc.t_end = cfg.t_end;
      tc.h = row.h;
      tc.c_max = ms.medium.c_max;
      const RhsFunction f = [&sd](const FieldState& a, FieldState& b) { sd.rhs(a, b); };
      const EvolveReport er = evolve(s, tc, f);
      row.steps = er.steps;
      row.err = error_norms(sd, s, ms.evaluate);
      row.u_iterations = sd.pcg_counters().u_mean();
      row.v_iterations = sd.pcg_counters().v_mean();
      hs.push_back(row.h);
      l2s.push_back(row.err.l2);
      ens.push_back(row.err.energy);
    } catch (const Error& e) {
      row.failure = e.what();
    }
    rep.rows.push_back(row);
    tol /= cfg.tolerance_ratio;
  }
  if (hs.size() >= 2) {
    rep.l2_slope = regression_slope(hs, l2s);
    rep.energy_slope = regression_slope(hs, ens);
  }
  return rep;
}

namespace {
std::ofstream open_output(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_failure, "cannot open '" + path + "' for writing");
  out << std::setprecision(10);
  return out;
}
}  // namespace

void write_converge_csv(const ConvergeReport& rep, const std::string& path) {
  auto out = open_output(path);
  out << "n,N,h,l2_error,energy_error,steps,pcg_u_mean,pcg_v_mean,status\n";
  for (const auto& r : rep.rows)
    out << r.n << ',' << r.N << ',' << r.h << ',' << r.err.l2 << ',' << r.err.energy << ',' << r.steps << ','
        << r.u_iterations << ',' << r.v_iterations << ',' << (r.failure.empty() ? "ok" : "failed") << '\n';
  out << "# l2_slope," << rep.l2_slope << "\n# energy_slope," << rep.energy_slope << '\n';
  if (!out) throw Error(Errc::io_failure, "write failed: " + path);
}

TimingReport run_timing(const TimingConfig& cfg) {
  const ManufacturedSolution ms = manufactured_solution("timing-2d");
  TimingReport rep;
  std::vector<double> dofs, walls, flops;
  for (int N : cfg.cells) {
    Mesh mesh = Mesh::uniform(2, cfg.elements, N, 0.0, 1.0, BcKind::periodic);
    SemidiscOptions opt;
    opt.degree = cfg.degree;
    opt.flux = cfg.flux;
    opt.path = SolverPath::fast;
    Semidiscretization sd(mesh, ms.medium, opt);
    const FieldState init = sd.interpolate(ms.u_at(0.0), ms.v_at(0.0), 0.0);
    TimeControls tc;
    tc.h = mesh.min_cell_size();
    tc.t_end = cfg.steps * tc.dt();
    std::uint64_t rhs_flops = 0;
    const RhsFunction f = [&](const FieldState& a, FieldState& b) {
      sd.rhs(a, b);
      rhs_flops += sd.last_rhs_flops();
    };
    double elapsed = 0.0;
    std::size_t steps = 0;
    while (elapsed < cfg.min_seconds || steps == 0) {
      FieldState s = init;
      const auto t0 = std::chrono::steady_clock::now();
      const EvolveReport er = evolve(s, tc, f);
      elapsed += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      steps += er.steps;
    }
    TimingRow row;
    row.N = N;
    row.dof = sd.state_size();
    row.seconds_per_step = elapsed / static_cast<double>(steps);
    row.flops_per_step = static_cast<double>(rhs_flops) / static_cast<double>(steps);
    rep.rows.push_back(row);
    dofs.push_back(static_cast<double>(row.dof));
    walls.push_back(row.seconds_per_step);
    flops.push_back(row.flops_per_step);
  }
  if (dofs.size() >= 2) {
    rep.wall_slope = regression_slope(dofs, walls);
    rep.flop_slope = regression_slope(dofs, flops);
  }
  return rep;
}

void write_timing_csv(const TimingReport& rep, const std::string& path) {
  auto out = open_output(path);
  out << "N,dof,seconds_per_step,flops_per_step\n";
  for (const auto& r : rep.rows) out << r.N << ',' << r.dof << ',' << r.seconds_per_step << ',' << r.flops_per_step << '\n';
  out << "# wall_slope," << rep.wall_slope << "\n# flop_slope," << rep.flop_slope << '\n';
  if (!out) throw Error(Errc::io_failure, "write failed: " + path);
}

double ocean_sound_speed(double depth) {
  return 1450.0 + 50.0 * (100.0 / (depth + 40.0) + std::tanh((depth - 300.0) / 50.0));
}

void write_snapshot(const Semidiscretization& sd, const FieldState& state, const std::string& path) {
  const Mesh& mesh = sd.mesh();
  if (mesh.dim != 2) throw Error(Errc::invalid_argument, "snapshots are two-dimensional");
  const int N = mesh.cells;
  const int nx = mesh.elements[0] * N + 1, ny = mesh.elements[1] * N + 1;
  const double dx = mesh.cell_size(0), dy = mesh.cell_size(1);
  const auto u = sd.to_nodal(state.u);
  auto out = open_output(path);
  out << nx << ' ' << ny << ' ' << mesh.lower[0] << ' ' << mesh.lower[1] << ' ' << dx << ' ' << dy << '\n';
  out << std::setprecision(8);
  for (int j = 0; j < ny; ++j) {
    const int ey = std::min(j / N, mesh.elements[1] - 1), ly = j - ey * N;
    for (int i = 0; i < nx; ++i) {
      const int ex = std::min(i / N, mesh.elements[0] - 1), lx = i - ex * N;
      const int coords[2] = {ex, ey};
      const int e = mesh.element_index(coords);
      out << u[static_cast<std::size_t>(e) * sd.element_size() + lx + static_cast<std::size_t>(ly) * (N + 1)]
          << (i + 1 < nx ? ' ' : '\n');
    }
  }
  if (!out) throw Error(Errc::io_failure, "write failed: " + path);
}

OceanReport run_solve_ocean(const OceanConfig& cfg) {
  Mesh mesh;
  mesh.dim = 2;
  mesh.elements = cfg.elements;
  mesh.cells = cfg.cells;
  mesh.lower = {0.0, -2000.0};
  mesh.upper = {4000.0, 0.0};
  // free surface on top, reflecting walls elsewhere
  mesh.bc = {{BcKind::neumann, BcKind::neumann}, {BcKind::neumann, BcKind::dirichlet}};
  double c_max = 0.0;
  for (int k = 0; k <= 2000; ++k) c_max = std::max(c_max, ocean_sound_speed(static_cast<double>(k)));
  const Medium medium = Medium::field(
      [](std::span<const double> x) {
        const double c = ocean_sound_speed(-x[1]);
        return c * c;
      },
      c_max);
  const double sigma = 2.0 * mesh.min_cell_size();
  const double x0 = cfg.source_x, y0 = -cfg.source_depth, amp = cfg.source_amplitude;
  const double cutoff = cfg.source_cutoff;
  std::vector<ForcingTerm> forcing;
  if (amp != 0.0)
    forcing.push_back({[cutoff](double t) { return t < cutoff ? std::sin(400.0 * pi * t) : 0.0; },
                       [=](std::span<const double> x) {
                         const double r2 = (x[0] - x0) * (x[0] - x0) + (x[1] - y0) * (x[1] - y0);
                         return amp * std::exp(-0.5 * r2 / (sigma * sigma));
                       }});
  SemidiscOptions opt;
  opt.degree = cfg.degree;
  opt.flux = FluxScheme::upwind(cfg.xi);
  opt.path = SolverPath::pcg;
  opt.pcg_tolerance = cfg.pcg_tolerance;
  Semidiscretization sd(mesh, medium, opt, forcing);

  FieldState s = sd.zero_state();
  TimeControls tc;
  tc.cfl = cfg.cfl;
  tc.h = mesh.min_cell_size();
  tc.c_max = c_max;
  tc.t_end = cfg.t_end;

  OceanReport rep;
  std::vector<double> pending = cfg.snapshot_times;
  std::sort(pending.begin(), pending.end());
  std::size_t next = 0;
  double prev_e = 0.0;
  const double dt = tc.dt();
  auto observer = [&](std::size_t step, const FieldState& st) {
    const double e = sd.energy(st);
    rep.energy.emplace_back(st.t, e);
    if (step > 0 && st.t - dt > cutoff && e > prev_e * (1.0 + 1e-12)) rep.monotone_after_cutoff = false;
    prev_e = e;
    while (next < pending.size() && st.t >= pending[next] - 0.5 * dt) {
      std::ostringstream name;
      name << cfg.out_dir << "/snapshot_t" << std::fixed << std::setprecision(4) << pending[next] << ".txt";
      write_snapshot(sd, st, name.str());
      rep.snapshots.push_back(name.str());
      ++next;
    }
  };
  const RhsFunction f = [&sd](const FieldState& a, FieldState& b) { sd.rhs(a, b); };
  const EvolveReport er = evolve(s, tc, f, {observer});
  rep.steps = er.steps;
  rep.u_iterations = sd.pcg_counters().u_mean();
  rep.v_iterations = sd.pcg_counters().v_mean();

  auto out = open_output(cfg.out_dir + "/energy.csv");
  out << "t,energy\n";
  for (auto& [t, e] : rep.energy) out << t << ',' << e << '\n';
  return rep;
}

}  // namespace gdwave
