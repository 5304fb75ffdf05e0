#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fbflow/gallery.hpp"
#include "fbflow/lyapunov.hpp"
#include "fbflow/splitters.hpp"

using namespace fbflow;
using Catch::Approx;

namespace {

Vector vec1(double a) {
  Vector v(1);
  v << a;
  return v;
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

// Phi(x) = x^2/2 with B(x) = x: unique solution 0.
InclusionProblem scalar_problem() {
  return InclusionProblem(half_sqnorm(1),
                          quadratic_gradient(Matrix::Identity(1, 1),
                                             Vector::Zero(1)));
}

}  // namespace

TEST_CASE("convexity gap at a hand-worked point", "[lyapunov][g_z]") {
  auto p = scalar_problem();
  const Anchor anchor = make_anchor(p, 1.0, vec1(0.0));
  REQUIRE(anchor.certified);
  REQUIRE(anchor.phi_z == 0.0);
  REQUIRE(anchor.bz[0] == 0.0);

  // x=2 has dPhi(x) = {2}; g = Phi(0) - Phi(2) - <0-2, 2> = 0 - 2 + 4 = 2
  REQUIRE(g_z(p.phi, anchor, vec1(2.0), vec1(2.0)) == Approx(2.0).margin(1e-14));
  REQUIRE(gamma_z(p.phi, anchor, vec1(2.0), vec1(2.0), 1.0) ==
          Approx(4.0).margin(1e-14));

  // wrong dual is rejected by the subgradient identity
  REQUIRE_THROWS_AS(g_z(p.phi, anchor, vec1(2.0), vec1(0.0)),
                    InvalidDualError);
  // but tolerated when the check is disabled
  REQUIRE(g_z(p.phi, anchor, vec1(2.0), vec1(0.0), false) ==
          Approx(0.0 - 2.0 - 0.0).margin(1e-14));
}

TEST_CASE("discrete descent quantity at a hand-worked point",
          "[lyapunov][a_k]") {
  // Phi = 0, B = I: any v=0 is a valid dual, and a_k reduces to
  // ||x - z||^2 / (2 mu).
  InclusionProblem p(zero_function(1),
                     quadratic_gradient(Matrix::Identity(1, 1),
                                        Vector::Zero(1)));
  const Anchor anchor = make_anchor(p, 1.0, vec1(0.0));
  REQUIRE(a_k(p.phi, anchor, vec1(2.0), vec1(0.0), 1.0) ==
          Approx(2.0).margin(1e-14));
  // a_k is gamma_z / mu for any mu
  for (double mu : {0.3, 1.0, 2.0}) {
    REQUIRE(a_k(p.phi, anchor, vec1(2.0), vec1(0.0), mu) ==
            Approx(gamma_z(p.phi, anchor, vec1(2.0), vec1(0.0), mu) / mu)
                .margin(1e-13));
  }
}

TEST_CASE("semigroup descent quantity k_z", "[lyapunov][k_z]") {
  const GalleryEntry& e = *find_entry("halfspace-nonunique");
  const Anchor anchor = make_anchor(e.problem, 1.0, vec2(1.0, 0.0));
  // k_z(x) = 0 - 0 + <(1,0), (2,3)-(1,0)> = 1
  REQUIRE(k_z(e.problem.phi, anchor, vec2(2.0, 3.0)) ==
          Approx(1.0).margin(1e-14));
  // infeasible point is flagged with +inf
  REQUIRE(k_z(e.problem.phi, anchor, vec2(0.0, 0.0)) == kInf);
  // nonnegative on the domain
  REQUIRE(k_z(e.problem.phi, anchor, vec2(1.0, -5.0)) >= 0.0);
}

TEST_CASE("monotonicity checks", "[lyapunov][monotone]") {
  const auto down = check_monotone({3.0, 2.0, 1.0});
  REQUIRE(down.pass);
  REQUIRE(down.worst_increase == 0.0);

  const auto up = check_monotone({1.0, 2.0});
  REQUIRE_FALSE(up.pass);
  REQUIRE(up.worst_increase == Approx(1.0));

  REQUIRE(check_monotone({1.0, 1.05, 1.0}, 0.1).pass);
  REQUIRE_THROWS_AS(check_monotone({1.0}), InputError);
  REQUIRE_THROWS_AS(check_monotone({1.0, kNaN}), InputError);
  REQUIRE_THROWS_AS(check_monotone({1.0, kInf, 0.0}), InputError);

  const auto slacked = check_monotone_with_slack({0.0, 0.5}, {0.4});
  REQUIRE_FALSE(slacked.pass);
  REQUIRE(slacked.worst_excess == Approx(0.1));
  REQUIRE(check_monotone_with_slack({0.0, 0.5}, {0.6}).pass);
  REQUIRE_THROWS_AS(check_monotone_with_slack({0.0, 0.5}, {0.1, 0.1}),
                    InputError);
}

TEST_CASE("square summability certificate", "[lyapunov][summable]") {
  // partial sums of 1/k^2 computed directly: the last decade of a 1e6-term
  // series carries ~5.5e-6 of the mass
  std::vector<double> inv_sq;
  inv_sq.reserve(1000000);
  for (int k = 1; k <= 1000000; ++k) {
    inv_sq.push_back(1.0 / (static_cast<double>(k) * k));
  }
  const auto rep = check_square_summable(inv_sq);
  REQUIRE(rep.pass);
  REQUIRE(rep.total == Approx(1.6449330668).margin(1e-5));
  REQUIRE(rep.tail_fraction < 1e-4);
  REQUIRE(rep.tail_fraction > 1e-7);  // sanity: the tail is not empty

  // a non-summable (constant) series fails: the last decade carries 90%
  const std::vector<double> flat(100, 1.0);
  const auto bad = check_square_summable(flat);
  REQUIRE_FALSE(bad.pass);
  REQUIRE(bad.tail_fraction == Approx(0.9).margin(1e-12));

  // geometric decay passes easily
  std::vector<double> geo;
  double g = 1.0;
  for (int k = 0; k < 200; ++k) {
    geo.push_back(g);
    g *= 0.5;
  }
  REQUIRE(check_square_summable(geo).pass);

  REQUIRE_THROWS_AS(check_square_summable({1.0, -0.5}), InputError);
  REQUIRE_THROWS_AS(check_square_summable({}), InputError);
}

TEST_CASE("operator image is constant over certified solutions",
          "[lyapunov][bz]") {
  const GalleryEntry& e = *find_entry("halfspace-nonunique");
  const auto rep = bz_constancy(e.problem, 1.0, e.known_solutions);
  REQUIRE(rep.pass);
  REQUIRE(rep.max_deviation == 0.0);

  // an uncertified point is rejected, not silently averaged in
  REQUIRE_THROWS_AS(
      bz_constancy(e.problem, 1.0, {e.known_solutions[0], vec2(0.0, 0.0)}),
      InputError);
  REQUIRE_THROWS_AS(bz_constancy(e.problem, 1.0, {e.known_solutions[0]}),
                    InputError);
}

TEST_CASE("anchor certification flag", "[lyapunov][anchor]") {
  const GalleryEntry& e = *find_entry("box-quadratic");
  REQUIRE(make_anchor(e.problem, 1.0, e.reference).certified);
  REQUIRE_FALSE(make_anchor(e.problem, 1.0, vec2(0.2, 0.2)).certified);
  // anchors need a finite Phi(z)
  REQUIRE_THROWS_AS(make_anchor(e.problem, 1.0, vec2(5.0, 5.0)), InputError);
}

TEST_CASE("trace annotation pins the a_k / gamma_z identity",
          "[lyapunov][annotate]") {
  const GalleryEntry& e = *find_entry("box-quadratic");
  const double mu = e.problem.beta();
  auto policy = StepPolicy::fbn(0.9, mu, e.problem.beta());
  RunOptions opts;
  opts.anchor = make_anchor(e.problem, mu, e.reference);
  Trace t = run(e.problem, policy, vec2(-2.0, 3.0), StopRule{1e-12, 200},
                opts);
  const auto* ak = t.find_series("a_k");
  const auto* gam = t.find_series("gamma_z");
  const auto* hz = t.find_series("h_z");
  REQUIRE(ak != nullptr);
  REQUIRE(gam != nullptr);
  REQUIRE(hz != nullptr);
  REQUIRE(ak->size() == t.size());
  for (size_t j = 0; j < t.size(); ++j) {
    REQUIRE((*ak)[j] == Approx((*gam)[j] / mu).margin(1e-12));
    REQUIRE((*hz)[j] ==
            Approx(0.5 * (t.states[j] - e.reference).squaredNorm())
                .margin(1e-12));
  }
}
