#pragma once

#include <utility>

#include "fbflow/cocoercive.hpp"
#include "fbflow/core.hpp"
#include "fbflow/proximable.hpp"

namespace fbflow {

/// The structured inclusion 0 in dPhi(x) + B(x) with Phi convex l.s.c. and
/// B beta-cocoercive. Its solution set S is closed convex, and B is constant
/// on S.
struct InclusionProblem {
  Proximable phi;
  Cocoercive b;

  InclusionProblem(Proximable phi_, Cocoercive b_)
      : phi(std::move(phi_)), b(std::move(b_)) {
    require_dim(phi.dim(), b.dim(), "InclusionProblem");
  }

  [[nodiscard]] Index dim() const noexcept { return phi.dim(); }
  [[nodiscard]] double beta() const noexcept { return b.beta(); }
};

/// Fixed-point residual ||x - prox(mu, x - mu*B(x))||. For any mu > 0 it
/// vanishes exactly on the solution set, so it serves as the universal
/// stopping and certification quantity.
inline double residual(const InclusionProblem& p, double mu, const Vector& x) {
  return (x - p.phi.prox(mu, x - mu * p.b(x))).norm();
}

}  // namespace fbflow
