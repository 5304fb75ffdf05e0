#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fbflow/cocoercive.hpp"
#include "fbflow/core.hpp"
#include "fbflow/proximable.hpp"

namespace fbflow {

/// Averagedness constant alpha in (0,1): T = (1-alpha) I + alpha N with N
/// nonexpansive. prox maps carry alpha = 1/2; I - mu*B carries
/// alpha = mu/(2*beta) for 0 < mu < 2*beta.
struct AveragedConstant {
  double alpha;

  explicit AveragedConstant(double a) : alpha(a) {
    if (!(a > 0.0) || !(a < 1.0)) {
      throw ParameterError("AveragedConstant: alpha=" + fmt_double(a) +
                           " out of range: requires 0 < alpha < 1");
    }
  }
};

/// Composition rule for averaged maps: T1 (alpha1-averaged) composed with T2
/// (alpha2-averaged) is alpha-averaged with
///
///   alpha = 1/delta,   delta = 1/2 + (1/2) * min(1/alpha1, 1/alpha2).
inline AveragedConstant averaged_composition(const AveragedConstant& a1,
                                             const AveragedConstant& a2) {
  const double delta =
      0.5 + 0.5 * std::min(1.0 / a1.alpha, 1.0 / a2.alpha);
  return AveragedConstant(1.0 / delta);
}

/// Upper bound on the admissible relaxation of the relaxed splitting scheme:
///
///   delta = 1/2 + min(1, beta/mu),   valid for 0 < mu < 2*beta,
///
/// so admissible relaxations are 0 < h < delta. Note delta > 1 on the whole
/// admissible mu range, so overrelaxation is always available.
inline double fbn_relaxation_bound(double mu, double beta) {
  if (!(beta > 0.0)) {
    throw ParameterError("fbn_relaxation_bound: beta=" + fmt_double(beta) +
                         " out of range: requires beta > 0");
  }
  if (!(mu > 0.0) || !(mu < 2.0 * beta)) {
    throw ParameterError("fbn_relaxation_bound: mu=" + fmt_double(mu) +
                         " out of range: requires 0 < mu < 2*beta=" +
                         fmt_double(2.0 * beta));
  }
  return 0.5 + std::min(1.0, beta / mu);
}

struct FirmNonexpansivenessReport {
  double max_violation = 0.0;  // worst ||dp||^2 - <dp, dy>, clamped at 0
  bool pass = true;
};

/// Samples the firm nonexpansiveness inequality of prox(mu, .):
///
///   ||prox(y1) - prox(y2)||^2 <= <prox(y1) - prox(y2), y1 - y2>.
inline FirmNonexpansivenessReport check_firmly_nonexpansive(
    const Proximable& phi, double mu,
    const std::vector<std::pair<Vector, Vector>>& pairs,
    double tolerance = kCheckTol) {
  FirmNonexpansivenessReport rep;
  for (const auto& [y1, y2] : pairs) {
    const Vector dp = phi.prox(mu, y1) - phi.prox(mu, y2);
    const double violation = dp.squaredNorm() - dp.dot(y1 - y2);
    if (violation > rep.max_violation) rep.max_violation = violation;
  }
  rep.pass = rep.max_violation <= tolerance;
  return rep;
}

struct CocoercivityReport {
  double min_slack = 0.0;            // min <dB, dx> - beta * ||dB||^2
  double max_lipschitz_excess = 0.0; // max ||dB|| - (1/beta) * ||dx||, >= 0
  bool pass = true;
};

/// Samples the cocoercivity inequality of B at its stored modulus, together
/// with the implied (1/beta)-Lipschitz bound.
inline CocoercivityReport check_cocoercive(
    const Cocoercive& b, const std::vector<std::pair<Vector, Vector>>& pairs,
    double tolerance = kCheckTol) {
  CocoercivityReport rep;
  bool first = true;
  for (const auto& [x1, x2] : pairs) {
    const Vector dB = b(x1) - b(x2);
    const Vector dx = x1 - x2;
    const double slack = dB.dot(dx) - b.beta() * dB.squaredNorm();
    if (first || slack < rep.min_slack) rep.min_slack = slack;
    first = false;
    const double excess = dB.norm() - dx.norm() / b.beta();
    if (excess > rep.max_lipschitz_excess) rep.max_lipschitz_excess = excess;
  }
  rep.pass = rep.min_slack >= -tolerance &&
             rep.max_lipschitz_excess <= tolerance;
  return rep;
}

/// Deterministic sample pairs with entries on the grid {-w, ..., w} at
/// resolution 1e-3. Uses only the integer output of mt19937 so the samples
/// are identical across platforms.
inline std::vector<std::pair<Vector, Vector>> sample_pairs(
    Index dim, int count, double half_width = 5.0, unsigned seed = 0) {
  std::mt19937 gen(seed);
  const long steps = std::lround(2000.0 * half_width);
  auto draw = [&]() -> Vector {
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) {
      v[i] = (static_cast<double>(gen() % (steps + 1)) / 1000.0) - half_width;
    }
    return v;
  };
  std::vector<std::pair<Vector, Vector>> pairs;
  pairs.reserve(static_cast<size_t>(count));
  for (int k = 0; k < count; ++k) pairs.emplace_back(draw(), draw());
  return pairs;
}

}  // namespace fbflow
