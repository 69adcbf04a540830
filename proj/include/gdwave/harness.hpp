#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "gdwave/semidisc.hpp"
#include "gdwave/timestep.hpp"

namespace gdwave {

struct ExactValues {
  double u = 0.0;
  double v = 0.0;
  std::array<double, 3> grad{};
  double forcing = 0.0;
};

/// Analytic solution with the medium, domain and forcing it is built for.
struct ManufacturedSolution {
  std::string id;
  int dim = 1;
  double lower = 0.0, upper = 1.0;
  BcKind bc = BcKind::periodic;
  Medium medium = Medium::uniform(1.0);
  std::function<ExactValues(std::span<const double> x, double t)> evaluate;
  std::vector<ForcingTerm> forcing;  // separable form of `forcing`

  PointFunction u_at(double t) const;
  PointFunction v_at(double t) const;
};

/// traveling-1d | standing-2d | timing-2d | variable-2d.
ManufacturedSolution manufactured_solution(const std::string& id);

struct ErrorNorms {
  double l2 = 0.0;
  double energy = 0.0;  // (|grad(u - u^h)|^2 + |v - v^h|^2)^(1/2)
};

/// Gauss quadrature with p + 3 points per cell and axis.
ErrorNorms error_norms(const Semidiscretization& sd, const FieldState& state,
                       const std::function<ExactValues(std::span<const double>, double)>& exact);

/// Least-squares slope of log(error) against log(h).
double regression_slope(const std::vector<double>& h, const std::vector<double>& error);

struct LadderPoint {
  int n = 1;
  int N = 10;
};

struct ConvergeConfig {
  std::string solution = "traveling-1d";
  int degree = 3;
  FluxScheme flux = FluxScheme::central();
  SolverPath path = SolverPath::fast;
  std::vector<LadderPoint> ladder;
  double cfl = 0.075 / (2.0 * 3.14159265358979323846);
  double t_end = 1.075;
  BcKind bc = BcKind::periodic;
  bool override_bc = false;
  /// PCG tolerance per ladder point (tolerance_base / tolerance_ratio^k).
  double tolerance_base = 1e-10;
  double tolerance_ratio = 1.0;
};

struct ConvergeRow {
  int n = 0, N = 0;
  double h = 0.0;
  ErrorNorms err;
  double u_iterations = 0.0, v_iterations = 0.0;
  std::size_t steps = 0;
  std::string failure;  // empty on success
};

struct ConvergeReport {
  std::vector<ConvergeRow> rows;
  double l2_slope = 0.0;
  double energy_slope = 0.0;
};

ConvergeReport run_converge(const ConvergeConfig& config);
void write_converge_csv(const ConvergeReport& report, const std::string& path);

struct TimingConfig {
  int degree = 3;
  std::vector<int> cells{9, 13, 17, 21, 25, 29, 33, 37, 41};
  int elements = 1;
  int steps = 10;
  double min_seconds = 0.2;  // repeat the 10-step run until this much time elapsed
  FluxScheme flux = FluxScheme::central();
};

struct TimingRow {
  int N = 0;
  std::size_t dof = 0;
  double seconds_per_step = 0.0;
  double flops_per_step = 0.0;
};

struct TimingReport {
  std::vector<TimingRow> rows;
  double wall_slope = 0.0;
  double flop_slope = 0.0;
};

TimingReport run_timing(const TimingConfig& config);
void write_timing_csv(const TimingReport& report, const std::string& path);

/// c(D) = 1450 + 50 (100/(D + 40) + tanh((D - 300)/50)), D depth in metres.
double ocean_sound_speed(double depth);

struct OceanConfig {
  std::vector<int> elements{25, 13};
  int cells = 10;
  int degree = 3;
  double xi = 1500.0;
  double cfl = 0.075 / (2.0 * 3.14159265358979323846);
  double t_end = 0.1;
  double source_x = 200.0;
  double source_depth = 100.0;
  double source_cutoff = 0.02;
  double source_amplitude = 1.0;
  double pcg_tolerance = 1e-8;
  std::vector<double> snapshot_times{0.025, 0.05, 0.075, 0.1};
  std::string out_dir = ".";
};

struct OceanReport {
  std::vector<std::string> snapshots;
  std::vector<std::pair<double, double>> energy;  // (t, E) per step
  std::size_t steps = 0;
  bool monotone_after_cutoff = true;
  double u_iterations = 0.0, v_iterations = 0.0;
};

OceanReport run_solve_ocean(const OceanConfig& config);

/// Plain-text grid: "nx ny x0 y0 dx dy" then ny rows of nx values, row y0
/// first. Samples the nodal values on the uniform grid of all element nodes.
void write_snapshot(const Semidiscretization& sd, const FieldState& state, const std::string& path);

}  // namespace gdwave
