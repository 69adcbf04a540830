// gdwave: experiment driver (converge | dispersion | specrad | timing | solve).
//
// Exit codes: 0 success, 2 invalid input, 3 solver failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gdwave/analysis.hpp"
#include "gdwave/error.hpp"
#include "gdwave/harness.hpp"

using nlohmann::json;
using namespace gdwave;

namespace {

constexpr int kSchemaVersion = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitSolver = 3;

struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::string config;
  std::optional<int> p, N, n;
  std::optional<std::string> flux;
  std::optional<double> xi, cfl, t_end;
  std::optional<std::string> out;
};

json load_config(const std::string& command, const Flags& f) {
  json cfg = json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw InvalidInput("cannot read config '" + f.config + "'");
    try {
      cfg = json::parse(in);
    } catch (const json::exception& e) {
      throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
    }
    if (!cfg.is_object()) throw InvalidInput("config must be a JSON object");
    if (!cfg.contains("schema_version")) throw InvalidInput("config lacks schema_version");
    if (cfg["schema_version"] != kSchemaVersion)
      throw InvalidInput("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
    if (cfg.contains("command") && cfg["command"] != command)
      throw InvalidInput("config is for command '" + cfg["command"].get<std::string>() + "'");
  }
  // flags win over the file
  if (f.p) cfg["p"] = *f.p;
  if (f.N) cfg["N"] = *f.N;
  if (f.n) cfg["n"] = *f.n;
  if (f.flux) cfg["flux"] = *f.flux;
  if (f.xi) cfg["xi"] = *f.xi;
  if (f.cfl) cfg["cfl"] = *f.cfl;
  if (f.t_end) cfg["t_end"] = *f.t_end;
  if (f.out) cfg["out"] = *f.out;
  return cfg;
}

template <class T>
T get(const json& cfg, const char* key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidInput(std::string("config field '") + key + "' has the wrong type");
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidInput(what);
}

void require_degree(int p) { require(p >= 1 && p % 2 == 1, "p must be odd and positive"); }

std::string out_dir(const json& cfg) {
  const auto dir = get<std::string>(cfg, "out", ".");
  std::filesystem::create_directories(dir);
  return dir;
}

const double kDefaultCfl = 0.075 / (2.0 * 3.14159265358979323846);

// ---------------------------------------------------------------- converge

int cmd_converge(const json& cfg) {
  ConvergeConfig cc;
  cc.solution = get<std::string>(cfg, "solution", "traveling-1d");
  const ManufacturedSolution ms = manufactured_solution(cc.solution);
  cc.degree = get(cfg, "p", 3);
  require_degree(cc.degree);
  cc.flux = FluxScheme::from_name(get<std::string>(cfg, "flux", "upwind"), get(cfg, "xi", 1.0));
  cc.path = path_from_name(get<std::string>(cfg, "path", ms.medium.constant ? "fast" : "pcg"));
  cc.cfl = get(cfg, "cfl", kDefaultCfl);
  cc.t_end = get(cfg, "t_end", ms.dim == 1 ? 1.075 : 0.2);
  cc.tolerance_base = get(cfg, "tolerance_base", 1e-10);
  cc.tolerance_ratio = get(cfg, "tolerance_ratio", 1.0);
  if (cfg.contains("bc")) {
    cc.bc = bc_from_name(get<std::string>(cfg, "bc", "periodic"));
    cc.override_bc = true;
  }
  const auto mode = get<std::string>(cfg, "refinement", "fix-N");
  require(mode == "fix-N" || mode == "fix-n", "refinement must be fix-N or fix-n");
  const auto ladder = get<std::vector<int>>(cfg, "ladder", mode == "fix-N" ? std::vector<int>{10, 14, 20, 28, 40}
                                                                              : std::vector<int>{10, 14, 20, 28});
  require(ladder.size() >= 2, "ladder needs at least two points");
  for (std::size_t i = 1; i < ladder.size(); ++i) require(ladder[i] > ladder[i - 1], "ladder must be increasing");
  const int fixed = mode == "fix-N" ? get(cfg, "N", 10) : get(cfg, "n", 1);
  for (int v : ladder) {
    const LadderPoint lp = mode == "fix-N" ? LadderPoint{v, fixed} : LadderPoint{fixed, v};
    require(lp.n >= 1, "element counts must be positive");
    require(lp.N >= cc.degree, "N must be at least p");
    cc.ladder.push_back(lp);
  }

  const auto rep = run_converge(cc);
  const auto path = out_dir(cfg) + "/converge.csv";
  write_converge_csv(rep, path);
  std::printf("%-6s %-6s %-12s %-12s %-12s\n", "n", "N", "h", "l2", "energy");
  bool failed = false;
  for (const auto& r : rep.rows) {
    if (!r.failure.empty()) {
      std::fprintf(stderr, "ladder point n=%d N=%d failed: %s\n", r.n, r.N, r.failure.c_str());
      failed = true;
      continue;
    }
    std::printf("%-6d %-6d %-12.4e %-12.4e %-12.4e\n", r.n, r.N, r.h, r.err.l2, r.err.energy);
  }
  std::printf("l2 slope %.3f, energy slope %.3f -> %s\n", rep.l2_slope, rep.energy_slope, path.c_str());
  return failed ? kExitSolver : 0;
}

// ---------------------------------------------------------------- dispersion

const char* kind_name(ModeKind k) {
  switch (k) {
    case ModeKind::physical: return "physical";
    case ModeKind::mirror: return "mirror";
    case ModeKind::stationary: return "stationary";
    case ModeKind::alias: return "alias";
    case ModeKind::spurious: return "spurious";
  }
  return "?";
}

int cmd_dispersion(const json& cfg) {
  const int p = get(cfg, "p", 3), N = get(cfg, "N", 9), m = get(cfg, "n", 1);
  require_degree(p);
  require(N >= p, "N must be at least p");
  require(m >= 1, "n must be positive");
  const auto flux = FluxScheme::from_name(get<std::string>(cfg, "flux", "upwind"), get(cfg, "xi", 1.0));
  const double kmin = get(cfg, "k_min", 0.0), kmax = get(cfg, "k_max", 3.14159265358979323846);
  const int points = get(cfg, "k_points", 65);
  require(points >= 1, "k_points must be positive");
  std::vector<double> ks;
  for (int i = 0; i < points; ++i) ks.push_back(points == 1 ? kmin : kmin + (kmax - kmin) * i / (points - 1));

  const auto res = dispersion_sweep(p, N, flux, ks, m);
  const auto path = out_dir(cfg) + "/dispersion.csv";
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_failure, "cannot write " + path);
  out << std::setprecision(12) << "K,exact,mode,omega_r,omega_i,kind\n";
  double worst_phys = 0.0;
  for (std::size_t k = 0; k < ks.size(); ++k) {
    for (std::size_t i = 0; i < res.omega[k].size(); ++i)
      out << ks[k] << ',' << res.exact[k] << ',' << i << ',' << res.omega[k][i].real() << ','
          << res.omega[k][i].imag() << ',' << kind_name(res.kind[k][i]) << '\n';
    worst_phys = std::max(worst_phys, std::abs(res.omega[k][res.physical[k]].real() - ks[k]));
  }
  std::printf("%zu wavenumbers, %zu modes each; max |Omega_r - K| on the physical branch %.3e -> %s\n", ks.size(),
              res.omega.front().size(), worst_phys, path.c_str());
  return 0;
}

// ---------------------------------------------------------------- specrad

int cmd_specrad(const json& cfg) {
  std::vector<int> degrees = get<std::vector<int>>(cfg, "degrees", {1, 3, 5, 7, 9, 11});
  if (cfg.contains("p")) degrees = {get(cfg, "p", 3)};
  std::vector<int> cells = get<std::vector<int>>(cfg, "cells", {30, 60, 120});
  if (cfg.contains("N")) cells = {get(cfg, "N", 30)};
  std::vector<std::string> fluxes = get<std::vector<std::string>>(cfg, "fluxes", {"central", "alternating", "upwind"});
  if (cfg.contains("flux")) fluxes = {get<std::string>(cfg, "flux", "central")};
  const int n = get(cfg, "n", 1);
  const double xi = get(cfg, "xi", 1.0);
  const auto bc = get<std::string>(cfg, "bc", "periodic");
  require(bc == "periodic" || bc == "dirichlet-neumann", "bc must be periodic or dirichlet-neumann");
  const BcKind left = bc == "periodic" ? BcKind::periodic : BcKind::dirichlet;
  const BcKind right = bc == "periodic" ? BcKind::periodic : BcKind::neumann;
  require(n >= 1, "n must be positive");
  for (int p : degrees) require_degree(p);
  for (int N : cells)
    for (int p : degrees) require(N >= p, "every N must be at least every p");

  const auto path = out_dir(cfg) + "/specrad.csv";
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_failure, "cannot write " + path);
  out << std::setprecision(12) << "flux,bc,N,n,p,rho,max_abs_real\n";
  std::vector<std::string> slopes;
  for (const auto& fname : fluxes) {
    const auto flux = FluxScheme::from_name(fname, xi);
    for (int N : cells) {
      std::vector<double> ps, rhos;
      for (int p : degrees) {
        const auto sp = operator_spectrum(p, N, n, flux, left, right);
        double rho = 0.0, re = 0.0;
        for (auto z : sp) {
          rho = std::max(rho, std::abs(z));
          re = std::max(re, std::abs(z.real()));
        }
        out << fname << ',' << bc << ',' << N << ',' << n << ',' << p << ',' << rho << ',' << re << '\n';
        ps.push_back(p);
        rhos.push_back(rho);
      }
      if (ps.size() >= 2) {
        const double s = regression_slope(ps, rhos);
        std::ostringstream line;
        line << "# slope," << fname << ',' << N << ',' << std::setprecision(6) << s;
        slopes.push_back(line.str());
        std::printf("%-12s N=%-4d log-log slope of rho vs p: %.3f\n", fname.c_str(), N, s);
      }
    }
  }
  for (const auto& s : slopes) out << s << '\n';
  std::printf("-> %s\n", path.c_str());
  return 0;
}

// ---------------------------------------------------------------- timing

int cmd_timing(const json& cfg) {
  TimingConfig tc;
  tc.degree = get(cfg, "p", 3);
  tc.cells = get<std::vector<int>>(cfg, "cells", tc.cells);
  if (cfg.contains("N")) tc.cells = {get(cfg, "N", 9)};
  tc.elements = get(cfg, "n", 1);
  tc.steps = get(cfg, "steps", 10);
  tc.min_seconds = get(cfg, "min_seconds", tc.min_seconds);
  tc.flux = FluxScheme::from_name(get<std::string>(cfg, "flux", "central"), get(cfg, "xi", 1.0));
  require_degree(tc.degree);
  require(tc.elements >= 1, "n must be positive");
  require(tc.steps >= 1, "steps must be positive");
  for (int N : tc.cells) require(N >= tc.degree, "N must be at least p");
  const auto rep = run_timing(tc);
  const auto path = out_dir(cfg) + "/timing.csv";
  write_timing_csv(rep, path);
  for (const auto& r : rep.rows)
    std::printf("N=%-4d dof=%-8zu %.4e s/step %.4e flops/step\n", r.N, r.dof, r.seconds_per_step, r.flops_per_step);
  std::printf("wall slope %.3f, flop slope %.3f -> %s\n", rep.wall_slope, rep.flop_slope, path.c_str());
  return 0;
}

// ---------------------------------------------------------------- solve

int cmd_solve(const json& cfg) {
  const auto problem = get<std::string>(cfg, "problem", "ocean");
  require(problem == "ocean", "solve supports problem 'ocean'");
  OceanConfig oc;
  oc.elements = get<std::vector<int>>(cfg, "elements", oc.elements);
  if (cfg.contains("n")) oc.elements = {2 * get(cfg, "n", 1), get(cfg, "n", 1)};
  require(oc.elements.size() == 2 && oc.elements[0] >= 1 && oc.elements[1] >= 1, "elements must be [nx, ny]");
  oc.cells = get(cfg, "N", oc.cells);
  oc.degree = get(cfg, "p", oc.degree);
  require_degree(oc.degree);
  require(oc.cells >= oc.degree, "N must be at least p");
  oc.xi = get(cfg, "xi", oc.xi);
  oc.cfl = get(cfg, "cfl", oc.cfl);
  oc.t_end = get(cfg, "t_end", oc.t_end);
  oc.source_x = get(cfg, "source_x", oc.source_x);
  oc.source_depth = get(cfg, "source_depth", oc.source_depth);
  oc.source_cutoff = get(cfg, "source_cutoff", oc.source_cutoff);
  oc.source_amplitude = get(cfg, "source_amplitude", oc.source_amplitude);
  oc.pcg_tolerance = get(cfg, "pcg_tolerance", oc.pcg_tolerance);
  oc.snapshot_times = get<std::vector<double>>(cfg, "snapshot_times", oc.snapshot_times);
  if (cfg.contains("flux")) require(get<std::string>(cfg, "flux", "") == "upwind", "solve uses the upwind flux");
  require(oc.t_end >= 0.0 && oc.cfl > 0.0 && oc.xi > 0.0, "t_end, cfl and xi must be positive");
  oc.out_dir = out_dir(cfg);
  const auto rep = run_solve_ocean(oc);
  std::printf("%zu steps, %zu snapshots, mean PCG iterations u %.2f v %.2f, energy %s after the source cutoff\n",
              rep.steps, rep.snapshots.size(), rep.u_iterations, rep.v_iterations,
              rep.monotone_after_cutoff ? "non-increasing" : "INCREASING");
  for (const auto& s : rep.snapshots) std::printf("  %s\n", s.c_str());
  return rep.monotone_after_cutoff ? 0 : kExitSolver;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-based DG wave solver with Galerkin difference elements"};
  app.require_subcommand(1);
  Flags flags;
  struct Command {
    const char* name;
    const char* help;
    int (*run)(const json&);
  };
  const Command commands[] = {
      {"converge", "convergence study on a manufactured solution", cmd_converge},
      {"dispersion", "Bloch dispersion and dissipation sweep", cmd_dispersion},
      {"specrad", "spectral radius of the 1-D operator", cmd_specrad},
      {"timing", "fast-path cost per step against degrees of freedom", cmd_timing},
      {"solve", "forced ocean-channel run with snapshots", cmd_solve},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", flags.config, "JSON configuration file");
    sub->add_option("--p", flags.p, "polynomial degree (odd)");
    sub->add_option("--N", flags.N, "cells per element and axis");
    sub->add_option("--n", flags.n, "elements per axis");
    sub->add_option("--flux", flags.flux, "central | alternating | upwind");
    sub->add_option("--xi", flags.xi, "upwind splitting parameter");
    sub->add_option("--cfl", flags.cfl, "time step = cfl * h / c_max");
    sub->add_option("--t-end", flags.t_end, "final time");
    sub->add_option("--out", flags.out, "output directory");
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInvalid;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      return commands[i].run(load_config(commands[i].name, flags));
    } catch (const InvalidInput& e) {
      std::fprintf(stderr, "gdwave: %s\n", e.what());
      return kExitInvalid;
    } catch (const Error& e) {
      std::fprintf(stderr, "gdwave: %s\n", e.what());
      return is_validation_error(e.code()) ? kExitInvalid : kExitSolver;
    } catch (const std::filesystem::filesystem_error& e) {
      std::fprintf(stderr, "gdwave: %s\n", e.what());
      return kExitSolver;
    }
  }
  return kExitInvalid;
}
