#pragma once

#include <cmath>
#include <string>

#include "fbflow/core.hpp"
#include "fbflow/problem.hpp"
#include "fbflow/trace.hpp"

namespace fbflow {

enum class IntegrationMethod { explicit_euler, rk4 };

[[nodiscard]] constexpr const char* to_string(IntegrationMethod m) {
  switch (m) {
    case IntegrationMethod::explicit_euler: return "explicit-euler";
    case IntegrationMethod::rk4: return "rk4";
  }
  return "unknown";
}

struct FlowConfig {
  double dt = 1e-2;
  double horizon = 10.0;
  IntegrationMethod method = IntegrationMethod::rk4;
  int record_every = 1;
};

namespace detail {

inline void validate_flow_config(const FlowConfig& cfg) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) {
    throw ParameterError("FlowConfig: dt=" + fmt_double(cfg.dt) +
                         " out of range: requires dt > 0");
  }
  if (!(cfg.horizon >= cfg.dt)) {
    throw ParameterError("FlowConfig: horizon=" + fmt_double(cfg.horizon) +
                         " out of range: requires horizon >= dt");
  }
  if (cfg.record_every < 1) {
    throw ParameterError("FlowConfig: record_every must be >= 1");
  }
}

template <class F>
Vector euler_step(const F& f, const Vector& y, double dt) {
  return y + dt * f(y);
}

template <class F>
Vector rk4_step(const F& f, const Vector& y, double dt) {
  const Vector k1 = f(y);
  const Vector k2 = f(y + (0.5 * dt) * k1);
  const Vector k3 = f(y + (0.5 * dt) * k2);
  const Vector k4 = f(y + dt * k3);
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Integrates the autonomous system y' = f(y) over [0, horizon] with uniform
/// steps (the final step is shortened to land exactly on the horizon) and
/// calls observe(t, y) at t=0, at every record_every-th step, and at the end.
template <class F, class Obs>
void integrate(const F& f, Vector y, const FlowConfig& cfg, Obs&& observe) {
  validate_flow_config(cfg);
  const long n = std::max<long>(1, static_cast<long>(std::ceil(
                                       cfg.horizon / cfg.dt - 1e-9)));
  observe(0.0, y);
  for (long k = 0; k < n; ++k) {
    const bool last = k + 1 == n;
    const double step = last ? cfg.horizon - cfg.dt * static_cast<double>(k)
                             : cfg.dt;
    y = cfg.method == IntegrationMethod::rk4 ? rk4_step(f, y, step)
                                             : euler_step(f, y, step);
    if (last || (k + 1) % cfg.record_every == 0) {
      observe(last ? cfg.horizon : cfg.dt * static_cast<double>(k + 1), y);
    }
  }
}

}  // namespace detail

/// Regularized Newton flow in its governing formulation
///
///   y' = -(y - prox(mu, y)) - mu * B(prox(mu, y)),
///   x  = prox(mu, y),   v = (y - x) / mu,
///
/// integrated from y0 = x0 + mu*v0. The pair (x(t), v(t)) then satisfies
/// v(t) in dPhi(x(t)) identically. Requires v0 in dPhi(x0).
///
/// Trace: states = x, duals = v, ys = y, series residual (probe mu) and
/// step_norm_sq (squared gap between consecutive recorded states).
inline Trace newton_flow(const InclusionProblem& p, double mu,
                         const Vector& x0, const Vector& v0,
                         const FlowConfig& cfg) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ParameterError("newton_flow: mu=" + fmt_double(mu) +
                         " out of range: requires mu > 0");
  }
  require_dim(p.dim(), x0.size(), "newton_flow");
  require_dim(p.dim(), v0.size(), "newton_flow");
  {
    const double r = (x0 - p.phi.prox(mu, x0 + mu * v0)).norm();
    if (!(r <= kDualTol)) {
      throw InvalidInitialError(
          "newton_flow: v0 fails the subgradient identity "
          "x0 = prox(mu, x0 + mu*v0): residual=" + fmt_double(r));
    }
  }
  auto f = [&p, mu](const Vector& y) -> Vector {
    const Vector x = p.phi.prox(mu, y);
    return -(y - x) - mu * p.b(x);
  };
  Trace trace;
  auto& res = trace.add_series("residual");
  auto& stepsq = trace.add_series("step_norm_sq");
  detail::integrate(f, Vector(x0 + mu * v0), cfg,
                    [&](double t, const Vector& y) {
                      const Vector x = p.phi.prox(mu, y);
                      trace.index.push_back(t);
                      trace.states.push_back(x);
                      trace.duals.push_back((y - x) / mu);
                      trace.ys.push_back(y);
                      res.push_back(residual(p, mu, x));
                      detail::push_step_norm(stepsq, trace.states);
                    });
  return trace;
}

/// Convenience form: treats y0 as the governing state and derives the
/// admissible initial pair x0 = prox(mu, y0), v0 = (y0 - x0)/mu.
inline Trace newton_flow(const InclusionProblem& p, double mu,
                         const Vector& y0, const FlowConfig& cfg) {
  require_dim(p.dim(), y0.size(), "newton_flow");
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ParameterError("newton_flow: mu=" + fmt_double(mu) +
                         " out of range: requires mu > 0");
  }
  const Vector x0 = p.phi.prox(mu, y0);
  return newton_flow(p, mu, x0, Vector((y0 - x0) / mu), cfg);
}

/// Semigroup generated by the inclusion x' + dPhi(x) + B(x) ni 0,
/// discretized by the implicit-explicit scheme
///
///   x_{k+1} = prox(dt, x_k - dt * B(x_k)),   0 < dt < 2*beta.
///
/// cfg.method is ignored: the scheme itself is the discretization. The
/// recorded dual at a sample x is (x - dt*B(x) - prox(dt, x - dt*B(x)))/dt,
/// the subgradient realized by the step leaving x (it lies in dPhi of the
/// next state). Series: residual (probe dt) and step_norm_sq.
inline Trace semigroup_flow(const InclusionProblem& p, const Vector& x0,
                            const FlowConfig& cfg) {
  detail::validate_flow_config(cfg);
  require_dim(p.dim(), x0.size(), "semigroup_flow");
  if (!(cfg.dt < 2.0 * p.beta())) {
    throw ParameterError("semigroup_flow: dt=" + fmt_double(cfg.dt) +
                         " out of range: requires 0 < dt < 2*beta=" +
                         fmt_double(2.0 * p.beta()));
  }
  if (!std::isfinite(p.phi.value(p.phi.prox(1e-6, x0)))) {
    throw InvalidInitialError(
        "semigroup_flow: x0 is not in the closure of dom Phi");
  }
  Trace trace;
  trace.duals_at_states = false;  // (w - next)/dt certifies next, not x
  auto& res = trace.add_series("residual");
  auto& stepsq = trace.add_series("step_norm_sq");
  const double dt = cfg.dt;
  auto record = [&](double t, const Vector& x) {
    const Vector w = x - dt * p.b(x);
    const Vector next = p.phi.prox(dt, w);
    trace.index.push_back(t);
    trace.states.push_back(x);
    trace.duals.push_back((w - next) / dt);
    res.push_back((x - next).norm());
    detail::push_step_norm(stepsq, trace.states);
  };
  const long n = std::max<long>(
      1, static_cast<long>(std::ceil(cfg.horizon / dt - 1e-9)));
  Vector x = x0;
  record(0.0, x);
  for (long k = 0; k < n; ++k) {
    x = p.phi.prox(dt, Vector(x - dt * p.b(x)));
    if (k + 1 == n || (k + 1) % cfg.record_every == 0) {
      record(dt * static_cast<double>(k + 1), x);
    }
  }
  return trace;
}

/// Prox-gradient flow
///
///   x' = -x + prox(mu, x - mu * B(x)),
///
/// whose trajectories solve the inclusion in the limit. Guaranteed regime:
/// 0 < mu < 4*beta for general B; any mu > 0 when B is a potential.
/// Passing allow_large_mu runs an inadmissible mu anyway and records a
/// warning on the trace. Note ||x'|| equals the fixed-point residual at x.
///
/// Trace: states = x (no duals), series residual (probe mu), step_norm_sq.
inline Trace prox_grad_flow(const InclusionProblem& p, double mu,
                            const Vector& x0, const FlowConfig& cfg,
                            bool allow_large_mu = false) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ParameterError("prox_grad_flow: mu=" + fmt_double(mu) +
                         " out of range: requires mu > 0");
  }
  require_dim(p.dim(), x0.size(), "prox_grad_flow");
  std::string warning;
  if (!p.b.potential() && !(mu < 4.0 * p.beta())) {
    if (!allow_large_mu) {
      throw ParameterError(
          "prox_grad_flow: mu=" + fmt_double(mu) +
          " out of range: requires 0 < mu < 4*beta=" +
          fmt_double(4.0 * p.beta()) +
          " for a non-potential operator (override to run anyway)");
    }
    warning = "mu=" + fmt_double(mu) + " >= 4*beta=" +
              fmt_double(4.0 * p.beta()) +
              " with a non-potential operator: outside the guaranteed "
              "convergence regime";
  }
  auto f = [&p, mu](const Vector& x) -> Vector {
    return -x + p.phi.prox(mu, Vector(x - mu * p.b(x)));
  };
  Trace trace;
  if (!warning.empty()) trace.warnings.push_back(warning);
  auto& res = trace.add_series("residual");
  auto& stepsq = trace.add_series("step_norm_sq");
  detail::integrate(f, x0, cfg, [&](double t, const Vector& x) {
    trace.index.push_back(t);
    trace.states.push_back(x);
    res.push_back(residual(p, mu, x));
    detail::push_step_norm(stepsq, trace.states);
  });
  return trace;
}

}  // namespace fbflow
