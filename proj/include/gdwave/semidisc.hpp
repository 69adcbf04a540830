#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gdwave/operators.hpp"

namespace gdwave {

/// Flux parameters. alpha weights the value trace of the element on the
/// lower-coordinate side of a face (see `face_alpha`).
struct FluxScheme {
  double alpha = 0.5;
  double beta = 0.0;
  double tau = 0.0;
  double xi = 1.0;

  static FluxScheme central() { return {0.5, 0.0, 0.0, 1.0}; }
  static FluxScheme alternating() { return {1.0, 0.0, 0.0, 1.0}; }
  static FluxScheme upwind(double xi = 1.0);
  /// "central" | "alternating" | "upwind".
  static FluxScheme from_name(const std::string& name, double xi = 1.0);
  bool conservative() const noexcept { return beta == 0.0 && tau == 0.0; }
};

/// One-sided face data: value trace and normal derivative along the side's
/// own outward normal.
struct Trace {
  double v = 0.0;
  double dn = 0.0;
};

struct FluxValues {
  double v_star = 0.0;
  double grad_n = 0.0;  // (grad u)* . n1
};

/// Fluxes seen from side 1 with weight `alpha` on the side-1 value trace.
FluxValues numerical_flux(const FluxScheme& scheme, double alpha, Trace inside, Trace outside);
/// Same with the scheme's own alpha.
inline FluxValues numerical_flux(const FluxScheme& scheme, Trace inside, Trace outside) {
  return numerical_flux(scheme, scheme.alpha, inside, outside);
}

/// Weight of the element's own value trace on one of its faces. The alpha
/// of the scheme belongs to the element on the lower side of the face, so an
/// element sees alpha on its right faces and 1 - alpha on its left faces.
/// Boundary faces always use 1/2.
double face_alpha(const FluxScheme& scheme, Endpoint side, bool boundary) noexcept;

enum class BcKind { periodic, dirichlet, neumann };
BcKind bc_from_name(const std::string& name);
const char* bc_name(BcKind kind) noexcept;

/// Exterior ghost trace. `g` is dg/dt of the Dirichlet datum or the
/// Neumann datum; `opposite` is the trace across a periodic seam.
Trace apply_bc(BcKind kind, Trace interior, double g, Trace opposite = {});

/// Uniform Cartesian mesh of n_1 x ... x n_d elements with N cells per
/// element and axis.
struct Mesh {
  int dim = 1;
  std::vector<int> elements;
  int cells = 10;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::array<BcKind, 2>> bc;  // per axis: left, right

  static Mesh uniform(int dim, int elements, int cells, double lower, double upper, BcKind bc);
  void validate(int degree) const;
  int num_elements() const;
  double element_length(int axis) const { return (upper[axis] - lower[axis]) / elements[axis]; }
  double cell_size(int axis) const { return element_length(axis) / cells; }
  double min_cell_size() const;
  std::vector<int> element_coords(int e) const;
  int element_index(std::span<const int> coords) const;
  /// Neighbour across the face, or -1 on a non-periodic boundary.
  int neighbour(int e, int axis, Endpoint side) const;
  ElementBox box(int e) const;
};

/// Sound speed description: constant c, or a pointwise c^2 field.
struct Medium {
  bool constant = true;
  double c = 1.0;
  PointFunction c2;
  double c_max = 1.0;

  static Medium uniform(double c);
  static Medium field(PointFunction c2, double c_max);
  double c2_at(std::span<const double> x) const { return constant ? c * c : c2(x); }
};

/// Separable forcing sum_i theta_i(t) g_i(x) in the v-equation.
struct ForcingTerm {
  std::function<double(double)> time;
  PointFunction space;
};

enum class SolverPath { fast, direct, pcg };
SolverPath path_from_name(const std::string& name);

struct SemidiscOptions {
  int degree = 3;
  FluxScheme flux = FluxScheme::central();
  SolverPath path = SolverPath::fast;
  double pcg_tolerance = 1e-10;
  int pcg_max_iterations = 500;
  int quadrature_points = 0;  // per cell and axis; 0 selects degree + 3
  int threads = 0;            // 0 reads GDWAVE_THREADS, default 1
};

/// U, V for every element, concatenated element by element. The fast path
/// stores modal coefficients, the other paths nodal values.
struct FieldState {
  double t = 0.0;
  std::vector<double> u;
  std::vector<double> v;
};

struct PcgCounters {
  std::uint64_t u_calls = 0, u_iterations = 0;
  std::uint64_t v_calls = 0, v_iterations = 0;
  double u_mean() const { return u_calls ? double(u_iterations) / double(u_calls) : 0.0; }
  double v_mean() const { return v_calls ? double(v_iterations) / double(v_calls) : 0.0; }
};

/// Number of worker threads from GDWAVE_THREADS (at least 1).
int worker_count_from_env();

class Semidiscretization {
 public:
  Semidiscretization(Mesh mesh, Medium medium, SemidiscOptions options, std::vector<ForcingTerm> forcing = {});
  ~Semidiscretization();
  Semidiscretization(const Semidiscretization&) = delete;
  Semidiscretization& operator=(const Semidiscretization&) = delete;

  const Mesh& mesh() const noexcept { return mesh_; }
  const Medium& medium() const noexcept { return medium_; }
  const SemidiscOptions& options() const noexcept { return options_; }
  const GdBasis& basis() const noexcept { return basis_; }
  bool modal() const noexcept { return options_.path == SolverPath::fast; }
  std::size_t element_size() const noexcept { return element_size_; }
  std::size_t state_size() const noexcept { return element_size_ * mesh_.num_elements(); }

  /// Nodal interpolants of u0, v0, converted to the path's representation.
  FieldState interpolate(const PointFunction& u0, const PointFunction& v0, double t = 0.0) const;
  FieldState zero_state(double t = 0.0) const;
  /// Nodal values of a stored field (identity unless modal).
  std::vector<double> to_nodal(std::span<const double> field) const;
  std::vector<double> from_nodal(std::span<const double> nodal) const;

  /// Time derivatives at state.t. `out` is resized as needed.
  void rhs(const FieldState& state, FieldState& out);
  /// 1/2 sum_k (V^T M V + U^T S_{c^2} U).
  double energy(const FieldState& state) const;

  /// Multiply-add count of the last rhs call (fast path only).
  std::uint64_t last_rhs_flops() const noexcept { return last_flops_; }
  const PcgCounters& pcg_counters() const noexcept { return pcg_; }
  void reset_pcg_counters() { pcg_ = {}; }

  /// 1-D operators of one axis (element length of that axis).
  const ElementOps1d& ops(int axis) const { return ops_[axis]; }

 private:
  struct Impl;
  void build_face_traces(const FieldState& s);
  void element_lifts(int e, int worker);

  Mesh mesh_;
  Medium medium_;
  SemidiscOptions options_;
  GdBasis basis_;
  std::vector<ElementOps1d> ops_;
  std::size_t element_size_ = 0;
  std::uint64_t last_flops_ = 0;
  PcgCounters pcg_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gdwave
