#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fbflow/core.hpp"
#include "fbflow/problem.hpp"
#include "fbflow/trace.hpp"

namespace fbflow {

/// A candidate solution z together with the cached values B(z) and Phi(z)
/// that every descent quantity below is measured against. `certified`
/// records whether z passed the fixed-point residual test at construction.
struct Anchor {
  Vector z;
  Vector bz;
  double phi_z = 0.0;
  bool certified = false;
};

/// Builds an anchor, certifying it by residual(p, mu, z) <= cert_tol.
inline Anchor make_anchor(const InclusionProblem& p, double mu,
                          const Vector& z, double cert_tol = 1e-8) {
  require_dim(p.dim(), z.size(), "make_anchor");
  Anchor a;
  a.z = z;
  a.bz = p.b(z);
  a.phi_z = p.phi.value(z);
  if (!std::isfinite(a.phi_z)) {
    throw InputError("make_anchor: Phi(z) is not finite");
  }
  a.certified = residual(p, mu, z) <= cert_tol;
  return a;
}

/// Distance of v from dPhi(x), measured through the resolvent identity
/// v in dPhi(x)  <=>  x = prox(mu, x + mu*v).
inline double subgradient_residual(const Proximable& phi, const Vector& x,
                                   const Vector& v, double mu = 1.0) {
  return (x - phi.prox(mu, x + mu * v)).norm();
}

inline void require_subgradient(const Proximable& phi, const Vector& x,
                                const Vector& v, double mu = 1.0,
                                double tol = kDualTol) {
  const double r = subgradient_residual(phi, x, v, mu);
  if (!(r <= tol)) {
    throw InvalidDualError(
        "dual vector fails the subgradient identity x = prox(mu, x + mu*v): "
        "residual=" + fmt_double(r) + " > tol=" + fmt_double(tol));
  }
}

/// Convexity gap at the anchor,
///
///   g_z(x, v) = Phi(z) - Phi(x) - <z - x, v>,
///
/// nonnegative whenever v in dPhi(x); it vanishes iff z attains the
/// supporting affine minorant of Phi at x. With check_dual the subgradient
/// identity is enforced (tolerance kDualTol); disable it for duals that were
/// reconstructed at a neighbouring point.
inline double g_z(const Proximable& phi, const Anchor& anchor, const Vector& x,
                  const Vector& v, bool check_dual = true,
                  double check_mu = 1.0) {
  require_dim(phi.dim(), x.size(), "g_z");
  require_dim(phi.dim(), v.size(), "g_z");
  if (check_dual) require_subgradient(phi, x, v, check_mu);
  const double phi_x = phi.value(x);
  if (!std::isfinite(phi_x)) {
    throw InputError("g_z: Phi(x) is not finite");
  }
  return anchor.phi_z - phi_x - (anchor.z - x).dot(v);
}

/// Continuous-time descent quantity Gamma_z = (1/2)||x - z||^2 + mu * g_z,
/// nonincreasing along the regularized Newton flow.
inline double gamma_z(const Proximable& phi, const Anchor& anchor,
                      const Vector& x, const Vector& v, double mu,
                      bool check_dual = true) {
  return 0.5 * (x - anchor.z).squaredNorm() +
         mu * g_z(phi, anchor, x, v, check_dual, mu);
}

/// Discrete descent quantity A_k = (1/(2*mu))||x - z||^2 + g_z; equals
/// Gamma_z / mu. Along the relaxed splitting iteration it satisfies
///
///   A_{k+1} - A_k <= (1/(2*mu)) * ||y_{k+1} - y_k||^2.
inline double a_k(const Proximable& phi, const Anchor& anchor, const Vector& x,
                  const Vector& v, double mu, bool check_dual = true) {
  return 0.5 * (x - anchor.z).squaredNorm() / mu +
         g_z(phi, anchor, x, v, check_dual, mu);
}

/// Semigroup descent quantity k_z(x) = Phi(x) - Phi(z) + <B(z), x - z>,
/// nonnegative on dom Phi and +inf outside it.
inline double k_z(const Proximable& phi, const Anchor& anchor,
                  const Vector& x) {
  require_dim(phi.dim(), x.size(), "k_z");
  const double phi_x = phi.value(x);
  if (phi_x == kInf) return kInf;
  return phi_x - anchor.phi_z + anchor.bz.dot(x - anchor.z);
}

struct MonotonicityReport {
  double worst_increase = 0.0;  // largest consecutive increase, clamped at 0
  bool pass = true;
};

/// Checks that a series is nonincreasing up to a uniform slack per step.
inline MonotonicityReport check_monotone(const std::vector<double>& series,
                                         double slack = 0.0) {
  if (series.size() < 2) {
    throw InputError("check_monotone: series needs at least two entries");
  }
  MonotonicityReport rep;
  for (size_t k = 0; k + 1 < series.size(); ++k) {
    if (!std::isfinite(series[k]) || !std::isfinite(series[k + 1])) {
      throw InputError("check_monotone: entries must be finite");
    }
    const double inc = series[k + 1] - series[k];
    if (inc > rep.worst_increase) rep.worst_increase = inc;
  }
  rep.pass = rep.worst_increase <= slack;
  return rep;
}

struct SlackMonotonicityReport {
  double worst_excess = 0.0;  // largest (increase - allowed slack), >= 0
  bool pass = true;
};

/// Checks series[k+1] - series[k] <= slacks[k] for every step; slacks has
/// one entry per consecutive pair.
inline SlackMonotonicityReport check_monotone_with_slack(
    const std::vector<double>& series, const std::vector<double>& slacks) {
  if (series.size() < 2) {
    throw InputError("check_monotone_with_slack: series needs at least two "
                     "entries");
  }
  if (slacks.size() + 1 != series.size()) {
    throw InputError("check_monotone_with_slack: needs one slack entry per "
                     "consecutive pair");
  }
  SlackMonotonicityReport rep;
  for (size_t k = 0; k + 1 < series.size(); ++k) {
    if (!std::isfinite(series[k]) || !std::isfinite(series[k + 1])) {
      throw InputError("check_monotone_with_slack: entries must be finite");
    }
    const double excess = (series[k + 1] - series[k]) - slacks[k];
    if (excess > rep.worst_excess) rep.worst_excess = excess;
  }
  rep.pass = rep.worst_excess <= 0.0;
  return rep;
}

struct SquareSummabilityReport {
  std::vector<double> partial_sums;
  double total = 0.0;
  double tail_fraction = 0.0;  // mass at indices in the last decade (n/10, n]
  bool pass = true;
};

/// Heuristic certificate that a nonnegative series is summable: the partial
/// sums must have saturated, i.e. the mass carried by the last decade of
/// indices is at most tail_bound of the total.
inline SquareSummabilityReport check_square_summable(
    const std::vector<double>& series, double tail_bound = 1e-4) {
  if (series.empty()) {
    throw InputError("check_square_summable: series is empty");
  }
  SquareSummabilityReport rep;
  rep.partial_sums.reserve(series.size());
  double sum = 0.0;
  for (double v : series) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InputError("check_square_summable: entries must be finite and "
                       "nonnegative");
    }
    sum += v;
    rep.partial_sums.push_back(sum);
  }
  rep.total = sum;
  const size_t cut = series.size() / 10;  // tail = indices in (n/10, n]
  const double head = cut == 0 ? 0.0 : rep.partial_sums[cut - 1];
  rep.tail_fraction = rep.total > 0.0 ? (rep.total - head) / rep.total : 0.0;
  rep.pass = rep.tail_fraction <= tail_bound;
  return rep;
}

struct BzConstancyReport {
  double max_deviation = 0.0;  // max pairwise ||B(zi) - B(zj)||
  bool pass = true;
};

/// B takes a single value on the solution set. Verifies it over a list of
/// certified solutions; every input must pass the fixed-point residual test
/// at cert_tol or the call is rejected.
inline BzConstancyReport bz_constancy(const InclusionProblem& p, double mu,
                                      const std::vector<Vector>& solutions,
                                      double cert_tol = 1e-8,
                                      double dev_tol = 1e-8) {
  if (solutions.size() < 2) {
    throw InputError("bz_constancy: needs at least two solutions");
  }
  std::vector<Vector> images;
  images.reserve(solutions.size());
  for (const auto& z : solutions) {
    const double r = residual(p, mu, z);
    if (!(r <= cert_tol)) {
      throw InputError("bz_constancy: uncertified input (residual=" +
                       fmt_double(r) + " > tol=" + fmt_double(cert_tol) + ")");
    }
    images.push_back(p.b(z));
  }
  BzConstancyReport rep;
  for (size_t i = 0; i < images.size(); ++i) {
    for (size_t j = i + 1; j < images.size(); ++j) {
      rep.max_deviation =
          std::max(rep.max_deviation, (images[i] - images[j]).norm());
    }
  }
  rep.pass = rep.max_deviation <= dev_tol;
  return rep;
}

/// Appends anchor-relative diagnostic series to a trace:
///   h_z        (1/2)||x - z||^2
///   k_z        as above (+inf entries are stored as recorded)
///   b_error    ||B(x) - B(z)||
///   sq_b_error ||B(x) - B(z)||^2
/// and, when dual vectors are present,
///   g_z, gamma_z, a_k, v_plus_bx = ||v + B(x)||, sq_v_plus_bx,
///   big_g_z    Gamma_z + 2*beta*(Phi(x) + <x, B(z)>).
/// Duals recorded by schemes other than the y-driven ones were reconstructed
/// at a neighbouring point, so the strict subgradient check is optional.
inline void annotate_with_anchor(Trace& trace, const InclusionProblem& p,
                                 double mu, const Anchor& anchor,
                                 bool strict_duals = false) {
  auto& hz = trace.add_series("h_z");
  auto& kz = trace.add_series("k_z");
  // a run may already carry b_error against the same point; keep it
  const auto* existing = trace.find_series("b_error");
  const bool keep_berr =
      existing != nullptr && existing->size() == trace.states.size();
  auto& berr = trace.add_series("b_error");
  auto& sq_berr = trace.add_series("sq_b_error");
  const bool with_duals =
      trace.duals_at_states && trace.duals.size() == trace.states.size();
  for (size_t j = 0; j < trace.states.size(); ++j) {
    const Vector& x = trace.states[j];
    const Vector bx = p.b(x);
    hz.push_back(0.5 * (x - anchor.z).squaredNorm());
    kz.push_back(k_z(p.phi, anchor, x));
    const double be = (bx - anchor.bz).norm();
    if (!keep_berr) berr.push_back(be);
    sq_berr.push_back(be * be);
  }
  if (!with_duals) return;
  auto& gz = trace.add_series("g_z");
  auto& gam = trace.add_series("gamma_z");
  auto& ak = trace.add_series("a_k");
  auto& vpb = trace.add_series("v_plus_bx");
  auto& sq_vpb = trace.add_series("sq_v_plus_bx");
  auto& bigg = trace.add_series("big_g_z");
  for (size_t j = 0; j < trace.states.size(); ++j) {
    const Vector& x = trace.states[j];
    const Vector& v = trace.duals[j];
    const double g = g_z(p.phi, anchor, x, v, strict_duals, mu);
    const double gm = 0.5 * (x - anchor.z).squaredNorm() + mu * g;
    gz.push_back(g);
    gam.push_back(gm);
    ak.push_back(gm / mu);
    const double vn = (v + p.b(x)).norm();
    vpb.push_back(vn);
    sq_vpb.push_back(vn * vn);
    bigg.push_back(gm + 2.0 * p.beta() *
                            (p.phi.value(x) + x.dot(anchor.bz)));
  }
}

}  // namespace fbflow
