#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "fbflow/core.hpp"

namespace fbflow {

/// A convex, lower semicontinuous, proper function Phi on R^n, presented
/// through its value map (which may return +inf outside the domain) and its
/// proximal map
///
///   prox(mu, y) = argmin_w  Phi(w) + (1/(2*mu)) * ||w - y||^2,   mu > 0.
///
/// The proximal map of such a function is firmly nonexpansive; for
/// indicator functions it reduces to the metric projection.
class Proximable {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using ProxFn = std::function<Vector(double, const Vector&)>;

  Proximable(std::string name, Index dim, ValueFn value, ProxFn prox)
      : name_(std::move(name)),
        dim_(dim),
        value_(std::move(value)),
        prox_(std::move(prox)) {
    if (dim_ <= 0) throw ParameterError("Proximable: dimension must be positive");
  }

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] Index dim() const noexcept { return dim_; }

  /// Phi(x); +inf signals x outside dom Phi.
  [[nodiscard]] double value(const Vector& x) const {
    require_dim(dim_, x.size(), "Proximable::value");
    return value_(x);
  }

  /// prox(mu, y) with mu > 0. The result always lies in dom Phi.
  [[nodiscard]] Vector prox(double mu, const Vector& y) const {
    if (!(mu > 0.0) || !std::isfinite(mu)) {
      throw ParameterError("prox: mu=" + fmt_double(mu) +
                           " out of range: requires mu > 0");
    }
    require_dim(dim_, y.size(), "Proximable::prox");
    require_finite(y, "Proximable::prox");
    return prox_(mu, y);
  }

 private:
  std::string name_;
  Index dim_;
  ValueFn value_;
  ProxFn prox_;
};

/// Phi = 0. prox is the identity.
inline Proximable zero_function(Index dim) {
  return Proximable(
      "zero", dim, [](const Vector&) { return 0.0; },
      [](double, const Vector& y) { return y; });
}

/// Phi(x) = (1/2)||x||^2. prox(mu, y) = y / (1 + mu).
inline Proximable half_sqnorm(Index dim) {
  return Proximable(
      "half-sqnorm", dim,
      [](const Vector& x) { return 0.5 * x.squaredNorm(); },
      [](double mu, const Vector& y) -> Vector { return y / (1.0 + mu); });
}

/// Phi(x) = (1/2) x'Qx + q'x with Q symmetric positive semidefinite.
/// prox(mu, y) solves the SPD system (I + mu*Q) w = y - mu*q.
inline Proximable convex_quadratic(Matrix Q, Vector q) {
  const Index n = Q.rows();
  if (Q.cols() != n) throw ParameterError("convex_quadratic: Q must be square");
  require_dim(n, q.size(), "convex_quadratic");
  Matrix Qs = 0.5 * (Q + Q.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(Qs);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo < -1e-10 * std::max(1.0, hi)) {
    throw ParameterError("convex_quadratic: Q not positive semidefinite "
                         "(lambda_min=" + fmt_double(lo) + ")");
  }
  auto Qp = std::make_shared<Matrix>(std::move(Qs));
  auto qp = std::make_shared<Vector>(std::move(q));
  return Proximable(
      "quadratic", n,
      [Qp, qp](const Vector& x) {
        return 0.5 * x.dot(*Qp * x) + qp->dot(x);
      },
      [Qp, qp, n](double mu, const Vector& y) -> Vector {
        Matrix A = Matrix::Identity(n, n) + mu * (*Qp);
        return A.llt().solve(y - mu * (*qp));
      });
}

/// Phi(x) = weight * ||x||_1. prox is componentwise soft thresholding with
/// threshold mu*weight.
inline Proximable l1_norm(Index dim, double weight = 1.0) {
  if (!(weight > 0.0)) {
    throw ParameterError("l1_norm: weight=" + fmt_double(weight) +
                         " out of range: requires weight > 0");
  }
  return Proximable(
      "l1", dim,
      [weight](const Vector& x) { return weight * x.lpNorm<1>(); },
      [weight](double mu, const Vector& y) -> Vector {
        const double t = mu * weight;
        Vector out(y.size());
        for (Index i = 0; i < y.size(); ++i) {
          const double v = y[i];
          out[i] = v > t ? v - t : (v < -t ? v + t : 0.0);
        }
        return out;
      });
}

/// Indicator of the box {lo <= x <= hi} (componentwise). prox clamps.
/// Membership is tested with absolute tolerance kFeasTol so that points
/// produced by floating-point projections evaluate to 0, not +inf.
inline Proximable box_indicator(Vector lo, Vector hi) {
  const Index n = lo.size();
  require_dim(n, hi.size(), "box_indicator");
  for (Index i = 0; i < n; ++i) {
    if (!(lo[i] <= hi[i])) {
      throw ParameterError("box_indicator: lo[" + std::to_string(i) +
                           "] > hi[" + std::to_string(i) + "]");
    }
  }
  auto lp = std::make_shared<Vector>(std::move(lo));
  auto hp = std::make_shared<Vector>(std::move(hi));
  return Proximable(
      "box-indicator", n,
      [lp, hp](const Vector& x) {
        for (Index i = 0; i < x.size(); ++i) {
          if (x[i] < (*lp)[i] - kFeasTol || x[i] > (*hp)[i] + kFeasTol)
            return kInf;
        }
        return 0.0;
      },
      [lp, hp](double, const Vector& y) -> Vector {
        return y.cwiseMax(*lp).cwiseMin(*hp);
      });
}

/// Indicator of the closed ball {||x - center|| <= radius}. prox is the
/// radial projection.
inline Proximable ball_indicator(Vector center, double radius) {
  if (!(radius > 0.0)) {
    throw ParameterError("ball_indicator: radius=" + fmt_double(radius) +
                         " out of range: requires radius > 0");
  }
  auto cp = std::make_shared<Vector>(std::move(center));
  return Proximable(
      "ball-indicator", cp->size(),
      [cp, radius](const Vector& x) {
        return (x - *cp).norm() <= radius + kFeasTol * (1.0 + radius) ? 0.0
                                                                      : kInf;
      },
      [cp, radius](double, const Vector& y) -> Vector {
        const Vector d = y - *cp;
        const double r = d.norm();
        if (r <= radius) return y;
        return *cp + (radius / r) * d;
      });
}

/// Indicator of the halfspace {<a, x> <= b} with a != 0. prox is the affine
/// projection y - max(0, (<a,y> - b)) * a / ||a||^2.
inline Proximable halfspace_indicator(Vector a, double b) {
  const double nsq = a.squaredNorm();
  if (!(nsq > 0.0)) {
    throw ParameterError("halfspace_indicator: normal vector must be nonzero");
  }
  auto ap = std::make_shared<Vector>(std::move(a));
  const double scale = std::sqrt(nsq);
  return Proximable(
      "halfspace-indicator", ap->size(),
      [ap, b, scale](const Vector& x) {
        return ap->dot(x) - b <= kFeasTol * scale * (1.0 + std::abs(b)) ? 0.0
                                                                        : kInf;
      },
      [ap, b, nsq](double, const Vector& y) -> Vector {
        const double excess = ap->dot(y) - b;
        if (excess <= 0.0) return y;
        return y - (excess / nsq) * (*ap);
      });
}

}  // namespace fbflow
