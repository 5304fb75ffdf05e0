#include <catch2/catch_amalgamated.hpp>

#include "fbflow/operator_checks.hpp"

using namespace fbflow;
using Catch::Approx;

TEST_CASE("averaged composition constant", "[checks][averaged]") {
  // two prox-like maps: alpha1 = alpha2 = 1/2 gives delta = 3/2, alpha = 2/3
  const auto c = averaged_composition(AveragedConstant(0.5),
                                      AveragedConstant(0.5));
  REQUIRE(c.alpha == Approx(2.0 / 3.0).margin(1e-15));

  // asymmetric case: min(1/alpha1, 1/alpha2) rules
  const auto d = averaged_composition(AveragedConstant(0.5),
                                      AveragedConstant(0.8));
  REQUIRE(d.alpha == Approx(1.0 / (0.5 + 0.5 / 0.8)).margin(1e-15));

  REQUIRE_THROWS_AS(AveragedConstant(1.0), ParameterError);
  REQUIRE_THROWS_AS(AveragedConstant(0.0), ParameterError);
  REQUIRE_THROWS_AS(AveragedConstant(1.2), ParameterError);
}

TEST_CASE("relaxation bound delta = 1/2 + min(1, beta/mu)", "[checks]") {
  REQUIRE(fbn_relaxation_bound(1.5, 1.0) == Approx(7.0 / 6.0).margin(1e-15));
  REQUIRE(fbn_relaxation_bound(0.5, 1.0) == Approx(1.5).margin(1e-15));
  REQUIRE(fbn_relaxation_bound(1.0, 1.0) == Approx(1.5).margin(1e-15));

  // delta stays above 1 on the whole admissible range
  for (double mu : {0.01, 0.5, 1.0, 1.5, 1.99}) {
    REQUIRE(fbn_relaxation_bound(mu, 1.0) > 1.0);
  }

  REQUIRE_THROWS_AS(fbn_relaxation_bound(2.0, 1.0), ParameterError);
  REQUIRE_THROWS_AS(fbn_relaxation_bound(-0.1, 1.0), ParameterError);
  REQUIRE_THROWS_AS(fbn_relaxation_bound(1.0, 0.0), ParameterError);
  try {
    fbn_relaxation_bound(2.5, 1.0);
    FAIL("expected ParameterError");
  } catch (const ParameterError& e) {
    REQUIRE(std::string(e.what()).find("2*beta") != std::string::npos);
  }
}

TEST_CASE("cocoercivity checker flags a wrong modulus", "[checks]") {
  // identity is 1-cocoercive; claiming beta=2 must fail the sampled check
  Cocoercive claimed_too_much(
      "identity", 2, [](const Vector& x) { return x; }, 2.0);
  const auto rep = check_cocoercive(claimed_too_much,
                                    sample_pairs(2, 100, 5.0, 1));
  REQUIRE_FALSE(rep.pass);
  REQUIRE(rep.min_slack < -1e-3);

  Cocoercive honest("identity", 2, [](const Vector& x) { return x; }, 1.0);
  REQUIRE(check_cocoercive(honest, sample_pairs(2, 100, 5.0, 1)).pass);
}

TEST_CASE("firm nonexpansiveness checker flags a non-prox map", "[checks]") {
  // doubling is not a prox of any convex function
  Proximable doubling(
      "doubling", 1, [](const Vector&) { return 0.0; },
      [](double, const Vector& y) -> Vector { return 2.0 * y; });
  const auto rep = check_firmly_nonexpansive(doubling, 1.0,
                                             sample_pairs(1, 50, 5.0, 2));
  REQUIRE_FALSE(rep.pass);
}

TEST_CASE("I - mu B is nonexpansive for 0 < mu < 2 beta", "[checks]") {
  Matrix Q(3, 3);
  Q << 2.0, 0.4, 0.0, 0.4, 1.0, 0.2, 0.0, 0.2, 0.5;
  auto b = quadratic_gradient(Q, Vector::Zero(3));
  const double beta = b.beta();
  for (double f : {0.05, 0.5, 0.95}) {
    const double mu = 2.0 * beta * f;
    for (const auto& [x1, x2] : sample_pairs(3, 100, 5.0, 23)) {
      const Vector d = (x1 - mu * b(x1)) - (x2 - mu * b(x2));
      REQUIRE(d.norm() <= (x1 - x2).norm() * (1.0 + 1e-12) + 1e-12);
    }
  }
}

TEST_CASE("sampled pairs are deterministic per seed", "[checks]") {
  const auto a = sample_pairs(4, 10, 5.0, 99);
  const auto b = sample_pairs(4, 10, 5.0, 99);
  const auto c = sample_pairs(4, 10, 5.0, 100);
  REQUIRE(a.size() == 10);
  for (size_t i = 0; i < a.size(); ++i) {
    REQUIRE((a[i].first - b[i].first).norm() == 0.0);
    REQUIRE((a[i].second - b[i].second).norm() == 0.0);
  }
  bool any_diff = false;
  for (size_t i = 0; i < a.size(); ++i) {
    any_diff = any_diff || (a[i].first - c[i].first).norm() > 0.0;
  }
  REQUIRE(any_diff);
}
