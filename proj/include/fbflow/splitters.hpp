#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "fbflow/core.hpp"
#include "fbflow/lyapunov.hpp"
#include "fbflow/problem.hpp"
#include "fbflow/trace.hpp"

namespace fbflow {

enum class Scheme { fbn, fb_classical, fb_relaxed };

[[nodiscard]] constexpr const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::fbn: return "fbn";
    case Scheme::fb_classical: return "fb-classical";
    case Scheme::fb_relaxed: return "fb-relaxed";
  }
  return "unknown";
}

/// Validated step parameters for one splitting scheme. Factories reject
/// inadmissible parameters at construction; `unchecked` skips validation for
/// experiments, and runs built from an unchecked policy carry a warning.
///
/// Admissible ranges:
///   fbn          0 < mu < 2*beta,  0 < h < delta = 1/2 + min(1, beta/mu)
///   fb-classical 0 < h < 2*beta
///   fb-relaxed   0 < mu < 2*beta,  0 < h <= 1
class StepPolicy {
 public:
  using Schedule = std::function<double(long)>;

  static StepPolicy fbn(double h, double mu, double beta) {
    const double delta = admissible_relaxation(mu, beta, "fbn");
    if (!(h > 0.0) || !(h < delta)) {
      throw ParameterError("fbn: h=" + fmt_double(h) +
                           " out of range: requires 0 < h < delta=" +
                           fmt_double(delta) +
                           " (delta = 1/2 + min(1, beta/mu))");
    }
    StepPolicy p(Scheme::fbn, h, mu, true);
    p.delta_ = delta;
    return p;
  }

  /// fbn with an iteration-dependent relaxation h_k. Every h_k must stay in
  /// the band [band_eps, delta - band_eps]; violations throw at the step
  /// that encounters them.
  static StepPolicy fbn_schedule(Schedule h_of_k, double band_eps, double mu,
                                 double beta) {
    const double delta = admissible_relaxation(mu, beta, "fbn_schedule");
    if (!(band_eps > 0.0) || !(band_eps < 0.5 * delta)) {
      throw ParameterError("fbn_schedule: band_eps=" + fmt_double(band_eps) +
                           " out of range: requires 0 < band_eps < delta/2");
    }
    StepPolicy p(Scheme::fbn, kNaN, mu, true);
    p.delta_ = delta;
    p.schedule_ = std::move(h_of_k);
    p.band_eps_ = band_eps;
    return p;
  }

  static StepPolicy fb_classical(double h, double beta) {
    require_beta(beta, "fb_classical");
    if (!(h > 0.0) || !(h < 2.0 * beta)) {
      throw ParameterError("fb_classical: h=" + fmt_double(h) +
                           " out of range: requires 0 < h < 2*beta=" +
                           fmt_double(2.0 * beta));
    }
    return StepPolicy(Scheme::fb_classical, h, h, true);
  }

  static StepPolicy fb_relaxed(double h, double mu, double beta) {
    require_beta(beta, "fb_relaxed");
    if (!(mu > 0.0) || !(mu < 2.0 * beta)) {
      throw ParameterError("fb_relaxed: mu=" + fmt_double(mu) +
                           " out of range: requires 0 < mu < 2*beta=" +
                           fmt_double(2.0 * beta));
    }
    if (!(h > 0.0) || !(h <= 1.0)) {
      throw ParameterError("fb_relaxed: h=" + fmt_double(h) +
                           " out of range: requires 0 < h <= 1");
    }
    return StepPolicy(Scheme::fb_relaxed, h, mu, true);
  }

  /// Bypasses admissibility validation (h and mu must still be positive).
  static StepPolicy unchecked(Scheme scheme, double h, double mu) {
    if (!(h > 0.0) || !(mu > 0.0)) {
      throw ParameterError("StepPolicy::unchecked: h and mu must be > 0");
    }
    if (scheme == Scheme::fb_classical) mu = h;
    return StepPolicy(scheme, h, mu, false);
  }

  [[nodiscard]] Scheme scheme() const noexcept { return scheme_; }
  [[nodiscard]] double mu() const noexcept { return mu_; }
  [[nodiscard]] bool checked() const noexcept { return checked_; }

  /// Parameter passed to prox by this scheme (mu, except the classical
  /// scheme which proxes with its step h).
  [[nodiscard]] double prox_param() const noexcept { return mu_; }

  [[nodiscard]] double h_at(long k) const {
    if (!schedule_) return h_;
    const double hk = schedule_(k);
    if (!(hk >= band_eps_) || !(hk <= delta_ - band_eps_)) {
      throw ParameterError(
          "fbn_schedule: h_k=" + fmt_double(hk) + " at k=" +
          std::to_string(k) + " out of band: requires band_eps=" +
          fmt_double(band_eps_) + " <= h_k <= delta-band_eps=" +
          fmt_double(delta_ - band_eps_));
    }
    return hk;
  }

 private:
  StepPolicy(Scheme scheme, double h, double mu, bool checked)
      : scheme_(scheme), h_(h), mu_(mu), checked_(checked) {}

  static void require_beta(double beta, const char* who) {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
      throw ParameterError(std::string(who) + ": beta=" + fmt_double(beta) +
                           " out of range: requires beta > 0");
    }
  }

  static double admissible_relaxation(double mu, double beta,
                                      const char* who) {
    require_beta(beta, who);
    if (!(mu > 0.0) || !(mu < 2.0 * beta)) {
      throw ParameterError(std::string(who) + ": mu=" + fmt_double(mu) +
                           " out of range: requires 0 < mu < 2*beta=" +
                           fmt_double(2.0 * beta));
    }
    return 0.5 + std::min(1.0, beta / mu);
  }

  Scheme scheme_;
  double h_;
  double mu_;
  bool checked_;
  double delta_ = kNaN;
  Schedule schedule_;
  double band_eps_ = 0.0;
};

/// One iterate of a splitting run. y is populated for the fbn scheme only;
/// v always satisfies v in dPhi(x) except under fb-relaxed, where it is the
/// subgradient realized at the inner prox point.
struct SolverState {
  long k = 0;
  Vector x;
  Vector y;
  Vector v;
  double residual = kInf;
};

/// Canonical initial state: x0 = prox(pp, start) with pp the scheme's prox
/// parameter, v0 = (start - x0)/pp in dPhi(x0), and (for fbn) y0 = start.
/// Starting every scheme this way makes fbn(h=1, mu) and fb-classical(h=mu)
/// produce identical x-sequences from the same raw start.
inline SolverState init_state(const InclusionProblem& p,
                              const StepPolicy& policy, const Vector& start) {
  require_dim(p.dim(), start.size(), "init_state");
  require_finite(start, "init_state");
  const double pp = policy.prox_param();
  SolverState s;
  s.k = 0;
  s.x = p.phi.prox(pp, start);
  s.v = (start - s.x) / pp;
  if (policy.scheme() == Scheme::fbn) s.y = start;
  s.residual = residual(p, pp, s.x);
  return s;
}

/// Relaxed splitting step with inertial governing sequence:
///
///   x_k     = prox(mu, y_k)
///   y_{k+1} = (1 - h) y_k + h (x_k - mu * B(x_k))
///
/// with v_{k+1} = (y_{k+1} - x_{k+1})/mu in dPhi(x_{k+1}). At h = 1 the
/// x-sequence reduces to the classical scheme with step mu.
inline SolverState fbn_step(const InclusionProblem& p,
                            const StepPolicy& policy, const SolverState& s) {
  const double mu = policy.mu();
  const double h = policy.h_at(s.k);
  SolverState n;
  n.k = s.k + 1;
  n.y = (1.0 - h) * s.y + h * (s.x - mu * p.b(s.x));
  n.x = p.phi.prox(mu, n.y);
  n.v = (n.y - n.x) / mu;
  n.residual = residual(p, mu, n.x);
  return n;
}

/// Classical splitting step x_{k+1} = prox(h, x_k - h * B(x_k)), with the
/// exact dual v_{k+1} = (x_k - h*B(x_k) - x_{k+1})/h in dPhi(x_{k+1}).
inline SolverState fb_step(const InclusionProblem& p, const StepPolicy& policy,
                           const SolverState& s) {
  const double h = policy.h_at(s.k);
  const Vector w = s.x - h * p.b(s.x);
  SolverState n;
  n.k = s.k + 1;
  n.x = p.phi.prox(h, w);
  n.v = (w - n.x) / h;
  n.residual = residual(p, h, n.x);
  return n;
}

/// Relaxed classical step x_{k+1} = (1-h) x_k + h * prox(mu, x_k - mu*B(x_k)).
/// The recorded dual is the subgradient realized at the inner prox point.
inline SolverState relaxed_fb_step(const InclusionProblem& p,
                                   const StepPolicy& policy,
                                   const SolverState& s) {
  const double mu = policy.mu();
  const double h = policy.h_at(s.k);
  const Vector w = s.x - mu * p.b(s.x);
  const Vector prox_pt = p.phi.prox(mu, w);
  SolverState n;
  n.k = s.k + 1;
  n.x = (1.0 - h) * s.x + h * prox_pt;
  n.v = (w - prox_pt) / mu;
  n.residual = residual(p, mu, n.x);
  return n;
}

inline SolverState advance(const InclusionProblem& p, const StepPolicy& policy,
                           const SolverState& s) {
  switch (policy.scheme()) {
    case Scheme::fbn: return fbn_step(p, policy, s);
    case Scheme::fb_classical: return fb_step(p, policy, s);
    case Scheme::fb_relaxed: return relaxed_fb_step(p, policy, s);
  }
  throw ParameterError("advance: unknown scheme");
}

struct StopRule {
  double tol = 1e-10;
  long max_iters = 100000;
};

struct RunOptions {
  long record_every = 1;
  std::optional<Vector> reference;  // adds series b_error
  std::optional<Anchor> anchor;     // adds anchor-relative series
};

/// Runs a splitting scheme until its fixed-point residual (measured with the
/// scheme's prox parameter) drops to stop.tol or max_iters steps have been
/// taken. Non-convergence is reported through the trace flag, never as an
/// exception.
///
/// Trace: states x, duals v, ys (fbn), series residual, step_norm_sq and
/// (fbn) y_step_norm_sq between recorded samples, plus reference / anchor
/// series when requested.
inline Trace run(const InclusionProblem& p, const StepPolicy& policy,
                 const Vector& start, const StopRule& stop = {},
                 const RunOptions& opts = {}) {
  if (!(stop.tol >= 0.0)) {
    throw ParameterError("run: tol=" + fmt_double(stop.tol) +
                         " out of range: requires tol >= 0");
  }
  if (stop.max_iters < 0) {
    throw ParameterError("run: max_iters must be >= 0");
  }
  if (opts.record_every < 1) {
    throw ParameterError("run: record_every must be >= 1");
  }
  if (opts.reference) {
    require_dim(p.dim(), opts.reference->size(), "run: reference");
  }

  Trace trace;
  if (!policy.checked()) {
    trace.warnings.push_back(
        "admissibility checks were disabled for this run");
  }
  auto& res = trace.add_series("residual");
  auto& stepsq = trace.add_series("step_norm_sq");
  std::vector<double>* ystepsq =
      policy.scheme() == Scheme::fbn ? &trace.add_series("y_step_norm_sq")
                                     : nullptr;
  std::vector<double>* berr =
      opts.reference ? &trace.add_series("b_error") : nullptr;
  const Vector bref = opts.reference ? p.b(*opts.reference) : Vector();

  long last_recorded = -1;
  auto record = [&](const SolverState& s) {
    trace.index.push_back(static_cast<double>(s.k));
    trace.states.push_back(s.x);
    trace.duals.push_back(s.v);
    if (policy.scheme() == Scheme::fbn) trace.ys.push_back(s.y);
    res.push_back(s.residual);
    detail::push_step_norm(stepsq, trace.states);
    if (ystepsq != nullptr) detail::push_step_norm(*ystepsq, trace.ys);
    if (berr != nullptr) berr->push_back((p.b(s.x) - bref).norm());
    last_recorded = s.k;
  };

  SolverState s = init_state(p, policy, start);
  record(s);
  while (s.k < stop.max_iters) {
    if (s.residual <= stop.tol) {
      trace.converged = true;
      break;
    }
    s = advance(p, policy, s);
    if (s.k % opts.record_every == 0) record(s);
  }
  if (!trace.converged && s.residual <= stop.tol) trace.converged = true;
  if (last_recorded != s.k) record(s);

  if (opts.anchor) {
    annotate_with_anchor(trace, p, policy.prox_param(), *opts.anchor,
                         /*strict_duals=*/policy.scheme() != Scheme::fb_relaxed);
  }
  return trace;
}

}  // namespace fbflow
