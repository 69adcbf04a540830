#include "gdwave/timestep.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "gdwave/error.hpp"

namespace gdwave {

std::size_t TimeControls::steps() const {
  const double d = dt();
  if (!(d > 0.0) || !std::isfinite(d)) throw Error(Errc::invalid_argument, "time step must be positive");
  if (!(t_end >= 0.0)) throw Error(Errc::invalid_argument, "t_end must be non-negative");
  const double n = std::ceil(t_end / d - 1e-12);
  return static_cast<std::size_t>(std::max(0.0, n));
}

namespace {
void axpy(std::vector<double>& y, double a, const std::vector<double>& x, const std::vector<double>& base) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = base[i] + a * x[i];
}
void accumulate(std::vector<double>& acc, double w, const std::vector<double>& k) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * k[i];
}
bool finite(const std::vector<double>& x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}
}  // namespace

void rk4_step(FieldState& s, double dt, const RhsFunction& rhs, Rk4Workspace& ws) {
  if (!(dt > 0.0)) throw Error(Errc::invalid_argument, "rk4: dt must be positive");
  ws.stage.u.resize(s.u.size());
  ws.stage.v.resize(s.v.size());
  ws.acc.u.assign(s.u.size(), 0.0);
  ws.acc.v.assign(s.v.size(), 0.0);
  const double c[4] = {0.0, 0.5, 0.5, 1.0};
  const double w[4] = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0};
  for (int i = 0; i < 4; ++i) {
    const FieldState* in = &s;
    if (i > 0) {
      axpy(ws.stage.u, c[i] * dt, ws.k.u, s.u);
      axpy(ws.stage.v, c[i] * dt, ws.k.v, s.v);
      ws.stage.t = s.t + c[i] * dt;
      in = &ws.stage;
    }
    rhs(*in, ws.k);
    accumulate(ws.acc.u, w[i] * dt, ws.k.u);
    accumulate(ws.acc.v, w[i] * dt, ws.k.v);
  }
  for (std::size_t i = 0; i < s.u.size(); ++i) s.u[i] += ws.acc.u[i];
  for (std::size_t i = 0; i < s.v.size(); ++i) s.v[i] += ws.acc.v[i];
  s.t += dt;
}

void rk4_step(FieldState& s, double dt, const RhsFunction& rhs) {
  Rk4Workspace ws;
  rk4_step(s, dt, rhs, ws);
}

EvolveReport evolve(FieldState& s, const TimeControls& tc, const RhsFunction& rhs,
                    const std::vector<StepObserver>& observers) {
  EvolveReport rep;
  rep.dt = tc.dt();
  const std::size_t n = tc.steps();
  if (n > tc.max_steps)
    throw Error(Errc::invalid_argument, "run needs " + std::to_string(n) + " steps, cap is " +
                                            std::to_string(tc.max_steps));
  for (auto& o : observers) o(0, s);
  const double t0 = s.t;
  Rk4Workspace ws;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t k = 1; k <= n; ++k) {
    // land exactly on t_end
    const double target = k == n ? t0 + tc.t_end : t0 + static_cast<double>(k) * rep.dt;
    rk4_step(s, target - s.t, rhs, ws);
    s.t = target;
    if (!finite(s.u) || !finite(s.v))
      throw Error(Errc::non_finite_state, "state became non-finite at step " + std::to_string(k) +
                                              " (t = " + std::to_string(s.t) + ")");
    rep.steps = k;
    for (auto& o : observers) o(k, s);
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace gdwave
