#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "fbflow/core.hpp"
#include "fbflow/proximable.hpp"

namespace fbflow {

/// A beta-cocoercive operator B on R^n:
///
///   <B(x) - B(y), x - y> >= beta * ||B(x) - B(y)||^2   for all x, y,
///
/// which implies B is (1/beta)-Lipschitz and maximal monotone. The modulus
/// beta is carried alongside the operator because every admissibility bound
/// in the solvers is expressed through it.
class Cocoercive {
 public:
  using ApplyFn = std::function<Vector(const Vector&)>;

  /// Direct construction from a map and a claimed modulus. The claim is not
  /// verified here; check_cocoercive samples it.
  Cocoercive(std::string name, Index dim, ApplyFn apply, double beta,
             bool potential = false)
      : name_(std::move(name)),
        dim_(dim),
        apply_(std::move(apply)),
        beta_(beta),
        potential_(potential) {
    if (dim_ <= 0) throw ParameterError("Cocoercive: dimension must be positive");
    if (!(beta_ > 0.0) || !std::isfinite(beta_)) {
      throw ParameterError("Cocoercive: beta=" + fmt_double(beta_) +
                           " out of range: requires beta > 0");
    }
  }

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] Index dim() const noexcept { return dim_; }
  [[nodiscard]] double beta() const noexcept { return beta_; }

  /// True when B is the gradient of a convex potential. Such operators admit
  /// larger step regimes in the continuous-time solvers.
  [[nodiscard]] bool potential() const noexcept { return potential_; }

  [[nodiscard]] Vector operator()(const Vector& x) const {
    require_dim(dim_, x.size(), "Cocoercive::apply");
    return apply_(x);
  }

 private:
  std::string name_;
  Index dim_;
  ApplyFn apply_;
  double beta_;
  bool potential_;
};

namespace detail {

/// Largest cocoercivity modulus of the linear map u -> M u:
///
///   beta* = inf { <Mu, u> / ||Mu||^2 : Mu != 0 }.
///
/// Splitting R^n into ker M and its orthogonal complement shows the infimum
/// is -inf whenever the symmetric part couples the two subspaces, and is
/// otherwise the smallest eigenvalue of the whitened symmetric part on the
/// complement. Throws ParameterError when beta* <= 0 (M not cocoercive).
inline double certify_linear_beta(const Matrix& M) {
  const Index n = M.rows();
  const Matrix S = 0.5 * (M + M.transpose());
  const Matrix G = M.transpose() * M;
  Eigen::SelfAdjointEigenSolver<Matrix> es(G);
  const Vector d = es.eigenvalues();  // ascending
  const Matrix V = es.eigenvectors();
  const double dmax = d.maxCoeff();
  if (!(dmax > 0.0)) {
    throw ParameterError("linear_map: zero map has no cocoercivity modulus");
  }
  const double cut = dmax * 1e-12;
  Index r0 = 0;
  while (r0 < n && d[r0] <= cut) ++r0;  // first non-kernel index
  const Index rank = n - r0;
  const Matrix Vp = V.rightCols(rank);
  if (r0 > 0) {
    const Matrix Vk = V.leftCols(r0);
    const double coupling = (Vk.transpose() * S * Vp).cwiseAbs().maxCoeff();
    if (coupling > 1e-10 * std::sqrt(dmax)) {
      throw ParameterError(
          "linear_map: not cocoercive (symmetric part couples ker M to its "
          "complement, infimum of <Mu,u>/||Mu||^2 is -inf)");
    }
  }
  const Vector dp = d.tail(rank);
  const Matrix W = Vp * dp.cwiseSqrt().cwiseInverse().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> red(
      Matrix(0.5 * (W.transpose() * S * W +
                    (W.transpose() * S * W).transpose())));
  const double beta = red.eigenvalues().minCoeff();
  if (!(beta > 1e-12)) {
    throw ParameterError("linear_map: not cocoercive (certified beta=" +
                         fmt_double(beta) + " <= 0)");
  }
  return beta;
}

inline bool is_symmetric(const Matrix& M) {
  return (M - M.transpose()).cwiseAbs().maxCoeff() <=
         1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff());
}

}  // namespace detail

/// B(x) = M x + offset with the modulus certified by dense eigen-analysis at
/// construction; fails if the map is not cocoercive. Symmetric M is flagged
/// as a potential (B is then the gradient of a convex quadratic).
inline Cocoercive linear_map(Matrix M, Vector offset = Vector()) {
  const Index n = M.rows();
  if (M.cols() != n) throw ParameterError("linear_map: M must be square");
  if (offset.size() == 0) offset = Vector::Zero(n);
  require_dim(n, offset.size(), "linear_map");
  const double beta = detail::certify_linear_beta(M);
  const bool pot = detail::is_symmetric(M);
  auto Mp = std::make_shared<Matrix>(std::move(M));
  auto bp = std::make_shared<Vector>(std::move(offset));
  return Cocoercive(
      "linear", n,
      [Mp, bp](const Vector& x) -> Vector { return *Mp * x + *bp; }, beta,
      pot);
}

/// B = grad Psi for the convex quadratic Psi(x) = (1/2) x'Qx + q'x, i.e.
/// B(x) = Q x + q. By the Baillon-Haddad theorem beta = 1 / lambda_max(Q).
inline Cocoercive quadratic_gradient(Matrix Q, Vector q) {
  const Index n = Q.rows();
  if (Q.cols() != n) throw ParameterError("quadratic_gradient: Q must be square");
  require_dim(n, q.size(), "quadratic_gradient");
  Matrix Qs = 0.5 * (Q + Q.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(Qs);
  const double lo = es.eigenvalues().minCoeff();
  const double L = es.eigenvalues().maxCoeff();
  if (lo < -1e-10 * std::max(1.0, L)) {
    throw ParameterError("quadratic_gradient: Q not positive semidefinite "
                         "(lambda_min=" + fmt_double(lo) + ")");
  }
  if (!(L > 0.0)) {
    throw ParameterError("quadratic_gradient: zero Hessian has no "
                         "cocoercivity modulus");
  }
  auto Qp = std::make_shared<Matrix>(std::move(Qs));
  auto qp = std::make_shared<Vector>(std::move(q));
  return Cocoercive(
      "quadratic-gradient", n,
      [Qp, qp](const Vector& x) -> Vector { return *Qp * x + *qp; }, 1.0 / L,
      /*potential=*/true);
}

/// B = I - T for the nonexpansive affine map T(x) = A x + offset. Any such
/// residual is (1/2)-cocoercive, exactly. Construction verifies ||A|| <= 1.
inline Cocoercive contraction_residual(Matrix A, Vector offset = Vector()) {
  const Index n = A.rows();
  if (A.cols() != n) throw ParameterError("contraction_residual: A must be square");
  if (offset.size() == 0) offset = Vector::Zero(n);
  require_dim(n, offset.size(), "contraction_residual");
  const double opnorm = A.jacobiSvd().singularValues().maxCoeff();
  if (opnorm > 1.0 + 1e-10) {
    throw ParameterError("contraction_residual: ||A||=" + fmt_double(opnorm) +
                         " out of range: requires ||A|| <= 1");
  }
  const bool pot = detail::is_symmetric(A);
  auto Ap = std::make_shared<Matrix>(std::move(A));
  auto bp = std::make_shared<Vector>(std::move(offset));
  return Cocoercive(
      "contraction-residual", n,
      [Ap, bp](const Vector& x) -> Vector { return x - (*Ap * x + *bp); },
      0.5, pot);
}

/// Yosida regularization of the subdifferential of phi:
///
///   B(x) = (x - prox(lambda, x)) / lambda,
///
/// which is lambda-cocoercive and equals the gradient of the Moreau
/// envelope of phi (hence a potential).
inline Cocoercive yosida(const Proximable& phi, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ParameterError("yosida: lambda=" + fmt_double(lambda) +
                         " out of range: requires lambda > 0");
  }
  auto pp = std::make_shared<Proximable>(phi);
  return Cocoercive(
      "yosida(" + phi.name() + ")", phi.dim(),
      [pp, lambda](const Vector& x) -> Vector {
        return (x - pp->prox(lambda, x)) / lambda;
      },
      lambda, /*potential=*/true);
}

}  // namespace fbflow
