#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fbflow/flows.hpp"
#include "fbflow/gallery.hpp"
#include "fbflow/lyapunov.hpp"

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

// Phi = 0, B = I: every flow reduces to y' = -mu y with known solution.
InclusionProblem decay_problem() {
  return InclusionProblem(zero_function(1),
                          quadratic_gradient(Matrix::Identity(1, 1),
                                             Vector::Zero(1)));
}

double endpoint_error(IntegrationMethod m, double dt) {
  FlowConfig cfg{dt, 1.0, m, 1000000};
  Trace t = newton_flow(decay_problem(), 1.0, vec1(1.0), cfg);
  return std::abs(t.final_state()[0] - std::exp(-1.0));
}

}  // namespace

TEST_CASE("newton flow reproduces exponential decay", "[flows][newton]") {
  // y' = -y from 1: closed-form endpoint e^{-1}
  REQUIRE(endpoint_error(IntegrationMethod::rk4, 0.01) < 1e-8);
  REQUIRE(endpoint_error(IntegrationMethod::explicit_euler, 1e-3) < 1e-3);
}

TEST_CASE("integrator orders: rk4 >= 8x per halving, euler ~2x",
          "[flows][order]") {
  const double r1 = endpoint_error(IntegrationMethod::rk4, 0.02);
  const double r2 = endpoint_error(IntegrationMethod::rk4, 0.01);
  REQUIRE(r1 / r2 >= 8.0);

  const double e1 = endpoint_error(IntegrationMethod::explicit_euler, 0.02);
  const double e2 = endpoint_error(IntegrationMethod::explicit_euler, 0.01);
  REQUIRE(e1 / e2 == Approx(2.0).margin(0.2));
}

TEST_CASE("semigroup scheme reproduces exponential decay",
          "[flows][semigroup]") {
  FlowConfig cfg{1e-3, 1.0, IntegrationMethod::rk4, 1000000};
  Trace t = semigroup_flow(decay_problem(), vec1(1.0), cfg);
  REQUIRE(std::abs(t.final_state()[0] - std::exp(-1.0)) < 1e-3);
}

TEST_CASE("prox-gradient flow with trivial prox is plain decay",
          "[flows][proxgrad]") {
  FlowConfig cfg{0.01, 1.0, IntegrationMethod::rk4, 1000000};
  Trace t = prox_grad_flow(decay_problem(), 1.0, vec1(1.0), cfg);
  REQUIRE(std::abs(t.final_state()[0] - std::exp(-1.0)) < 1e-8);
}

TEST_CASE("flows are stationary on solutions", "[flows][stationary]") {
  FlowConfig cfg{0.01, 10.0, IntegrationMethod::rk4, 10};
  SECTION("newton flow") {
    const GalleryEntry& e = *find_entry("rotation-residual");
    // z = 0 is interior to the ball, so v = 0 is the only dual there
    Trace t = newton_flow(e.problem, e.problem.beta(), e.reference,
                          Vector::Zero(2), cfg);
    double moved = 0.0;
    for (const auto& x : t.states) {
      moved = std::max(moved, (x - e.reference).norm());
    }
    REQUIRE(moved < 1e-9);
  }
  SECTION("semigroup flow") {
    const GalleryEntry& e = *find_entry("box-quadratic");
    FlowConfig sg{0.1, 10.0, IntegrationMethod::rk4, 10};
    Trace t = semigroup_flow(e.problem, e.reference, sg);
    double moved = 0.0;
    for (const auto& x : t.states) {
      moved = std::max(moved, (x - e.reference).norm());
    }
    REQUIRE(moved < 1e-9);
  }
  SECTION("prox-gradient flow") {
    const GalleryEntry& e = *find_entry("potential-largestep");
    Trace t = prox_grad_flow(e.problem, e.problem.beta(), e.reference, cfg);
    double moved = 0.0;
    for (const auto& x : t.states) {
      moved = std::max(moved, (x - e.reference).norm());
    }
    REQUIRE(moved < 1e-9);
  }
}

TEST_CASE("newton flow descent on a constrained potential",
          "[flows][newton][descent]") {
  const GalleryEntry& e = *find_entry("potential-largestep");
  const double mu = e.problem.beta();
  FlowConfig cfg{0.01, 30.0, IntegrationMethod::rk4, 10};
  Trace t = newton_flow(e.problem, mu, vec1(0.2), cfg);
  const Anchor anchor = make_anchor(e.problem, mu, e.reference);
  annotate_with_anchor(t, e.problem, mu, anchor, /*strict_duals=*/true);
  REQUIRE(check_monotone(*t.find_series("gamma_z"), 1e-9).pass);
  REQUIRE(t.final_series_value("g_z") < 1e-6);
  REQUIRE(t.final_series_value("b_error") < 1e-6);
  // v + B(x) drives to zero along the flow
  REQUIRE(t.final_series_value("v_plus_bx") < 1e-6);
}

TEST_CASE("semigroup descent: h_z and h_z + 2 beta k_z decrease",
          "[flows][semigroup][descent]") {
  const GalleryEntry& e = *find_entry("box-quadratic");
  FlowConfig cfg{0.05, 30.0, IntegrationMethod::rk4, 1};
  Trace t = semigroup_flow(e.problem, vec2(0.2, 0.9), cfg);
  const Anchor anchor = make_anchor(e.problem, cfg.dt, e.reference);
  annotate_with_anchor(t, e.problem, cfg.dt, anchor);
  const auto& hz = *t.find_series("h_z");
  const auto& kz = *t.find_series("k_z");
  REQUIRE(check_monotone(hz, 1e-12).pass);
  std::vector<double> combined(hz.size());
  for (size_t j = 0; j < hz.size(); ++j) {
    combined[j] = hz[j] + 2.0 * e.problem.beta() * kz[j];
  }
  REQUIRE(check_monotone(combined, 1e-12).pass);
  REQUIRE(t.final_series_value("b_error") < 1e-6);
  REQUIRE(t.final_series_value("k_z") < 1e-6);
}

TEST_CASE("flow admissibility and initial-condition errors",
          "[flows][errors]") {
  const GalleryEntry& rot = *find_entry("rotation-residual");
  FlowConfig cfg{0.01, 1.0, IntegrationMethod::rk4, 1};

  SECTION("newton flow rejects a vector that is no subgradient") {
    REQUIRE_THROWS_AS(newton_flow(rot.problem, 0.5, Vector::Zero(2),
                                  vec2(5.0, 5.0), cfg),
                      InvalidInitialError);
  }
  SECTION("newton flow rejects mu <= 0") {
    REQUIRE_THROWS_AS(newton_flow(rot.problem, 0.0, vec2(1.0, 1.0), cfg),
                      ParameterError);
  }
  SECTION("semigroup flow rejects dt >= 2 beta") {
    FlowConfig big{1.0, 2.0, IntegrationMethod::rk4, 1};  // 2 beta = 1
    try {
      semigroup_flow(rot.problem, vec2(0.5, 0.5), big);
      FAIL("expected ParameterError");
    } catch (const ParameterError& err) {
      REQUIRE(std::string(err.what()).find("2*beta") != std::string::npos);
    }
  }
  SECTION("prox-gradient flow rejects mu >= 4 beta for non-potentials") {
    try {
      prox_grad_flow(rot.problem, 2.0, vec2(0.5, 0.5), cfg);  // 4 beta = 2
      FAIL("expected ParameterError");
    } catch (const ParameterError& err) {
      REQUIRE(std::string(err.what()).find("4*beta") != std::string::npos);
    }
    // with the override it runs and carries a warning
    Trace t = prox_grad_flow(rot.problem, 2.0, vec2(0.5, 0.5), cfg, true);
    REQUIRE_FALSE(t.warnings.empty());
  }
  SECTION("potential operators admit any mu") {
    const GalleryEntry& pot = *find_entry("potential-largestep");
    REQUIRE_NOTHROW(prox_grad_flow(pot.problem, 8.0, vec1(0.5), cfg));
  }
  SECTION("flow config validation") {
    REQUIRE_THROWS_AS(
        prox_grad_flow(rot.problem, 0.5, vec2(0.0, 0.0),
                       FlowConfig{0.0, 1.0, IntegrationMethod::rk4, 1}),
        ParameterError);
    REQUIRE_THROWS_AS(
        prox_grad_flow(rot.problem, 0.5, vec2(0.0, 0.0),
                       FlowConfig{1.0, 0.5, IntegrationMethod::rk4, 1}),
        ParameterError);
    REQUIRE_THROWS_AS(
        prox_grad_flow(rot.problem, 0.5, vec2(0.0, 0.0),
                       FlowConfig{0.01, 1.0, IntegrationMethod::rk4, 0}),
        ParameterError);
  }
  SECTION("semigroup flow rejects a start outside the closed domain") {
    Proximable empty_domain(
        "improper", 1, [](const Vector&) { return kInf; },
        [](double, const Vector& y) { return y; });
    InclusionProblem p(empty_domain,
                       quadratic_gradient(Matrix::Identity(1, 1),
                                          Vector::Zero(1)));
    FlowConfig sg{0.1, 1.0, IntegrationMethod::rk4, 1};
    REQUIRE_THROWS_AS(semigroup_flow(p, vec1(0.0), sg), InvalidInitialError);
  }
}

TEST_CASE("record_every thins the trace but keeps the endpoint",
          "[flows][trace]") {
  FlowConfig cfg{0.01, 1.0, IntegrationMethod::rk4, 7};
  Trace t = newton_flow(decay_problem(), 1.0, vec1(1.0), cfg);
  REQUIRE(t.index.front() == 0.0);
  REQUIRE(t.index.back() == 1.0);
  // samples at multiples of 7 steps plus the endpoint
  REQUIRE(t.size() == 1 + 100 / 7 + 1);
  REQUIRE(t.states.size() == t.size());
  REQUIRE(t.duals.size() == t.size());
  REQUIRE(t.ys.size() == t.size());
  const auto* stepsq = t.find_series("step_norm_sq");
  REQUIRE(stepsq != nullptr);
  REQUIRE(std::isnan((*stepsq)[0]));
  REQUIRE((*stepsq)[1] > 0.0);
}
