#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "gdwave/semidisc.hpp"

namespace gdwave {

using RhsFunction = std::function<void(const FieldState& state, FieldState& derivative)>;

/// dt = cfl * h / c_max, the last step shortened to land on t_end.
struct TimeControls {
  double cfl = 0.075 / (2.0 * 3.14159265358979323846);
  double t_end = 0.0;
  double h = 1.0;
  double c_max = 1.0;
  std::size_t max_steps = static_cast<std::size_t>(-1);

  double dt() const { return cfl * h / c_max; }
  std::size_t steps() const;
};

/// Stage buffers reused across steps.
struct Rk4Workspace {
  FieldState k, stage, acc;
};

/// Classic four-stage Runge-Kutta step; exactly four rhs evaluations.
void rk4_step(FieldState& state, double dt, const RhsFunction& rhs, Rk4Workspace& ws);
void rk4_step(FieldState& state, double dt, const RhsFunction& rhs);

/// Called after every step (and once before the first with step 0).
using StepObserver = std::function<void(std::size_t step, const FieldState& state)>;

struct EvolveReport {
  std::size_t steps = 0;
  double dt = 0.0;
  double wall_seconds = 0.0;
};

/// Steps until t_end. Throws non-finite-state with the step index when the
/// state stops being finite.
EvolveReport evolve(FieldState& state, const TimeControls& controls, const RhsFunction& rhs,
                    const std::vector<StepObserver>& observers = {});

}  // namespace gdwave
