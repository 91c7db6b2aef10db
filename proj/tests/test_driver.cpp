#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "driver.hpp"
#include "errors.hpp"

using namespace propermap;
using namespace propermap::driver;
namespace g = propermap::geometry;

namespace {

const double pi = std::numbers::pi;

RunConfig two_steps() {
  RunConfig c;
  c.steps = 2;
  return c;
}

// Shared N=2 run, computed once.
const RunResult& n2() {
  static RunResult r = run(two_steps());
  return r;
}

}  // namespace

TEST_CASE("budgets halve with every step") {
  RunConfig c;
  CHECK(step_budget(c, 1) == 1.0);
  CHECK(step_budget(c, 3) == 0.25);
  CHECK(part_tolerance(c, 1) == 0.25);
  c.budget_scale = 0.5;
  CHECK(step_budget(c, 2) == 0.25);
  CHECK(part_tolerance(c, 2) == 0.0625);
}

TEST_CASE("run configuration is validated") {
  auto bad = [](auto edit) {
    RunConfig c;
    edit(c);
    return c;
  };
  CHECK_NOTHROW(validate(RunConfig{}));
  CHECK_THROWS_AS(validate(bad([](RunConfig& c) { c.steps = 0; })), Error);
  CHECK_THROWS_AS(validate(bad([](RunConfig& c) { c.param_grid = {1.0, 0.0}; })), Error);
  CHECK_THROWS_AS(validate(bad([](RunConfig& c) {
                    c.param_grid = {0.0, 1.0, 2.0};
                    c.seeds = {2.0, 3.0};
                  })),
                  Error);
  CHECK_THROWS_AS(validate(bad([](RunConfig& c) { c.budget_scale = 0.0; })), Error);
  CHECK_THROWS_AS(validate(bad([](RunConfig& c) { c.budget_scale = 2.0; })), Error);
  CHECK_THROWS_AS(validate(bad([](RunConfig& c) { c.validation_density = c.fit_density; })), Error);
  CHECK_THROWS_AS(validate(bad([](RunConfig& c) { c.minorant_rho = 1.0; })), Error);
  CHECK_THROWS_AS(validate(bad([](RunConfig& c) { c.collar_target_fraction = 1.0; })), Error);
  CHECK_THROWS_AS(validate(bad([](RunConfig& c) { c.growth_cap = 0.0; })), Error);
  CHECK_THROWS_AS(validate(bad([](RunConfig& c) { c.max_degree = 4; })), Error);
}

TEST_CASE("the seed step is certified and weak seeds are refused") {
  auto s = init(RunConfig{});
  REQUIRE(s.steps.size() == 1u);
  CHECK(s.n() == 1);
  CHECK(s.current().angles[0] == std::vector<double>{0.0, pi, 2 * pi});
  const auto& pc = s.ledger[0].per_b[0];
  CHECK(pc.growth == doctest::Approx(2.0));
  CHECK(pc.arc_odd > 1.0);
  CHECK(pc.arc_even > 1.0);

  RunConfig weak;
  weak.seeds = {cplx(0.5)};
  CHECK_THROWS_AS(init(weak), Error);
  auto r = run(weak);
  CHECK_FALSE(r.ok);
  CHECK(r.state.steps.empty());
}

TEST_CASE("ramp targets run from the current value to n+2") {
  CHECK(ramp_value(cplx(1.5, 0.3), 1, 1.0) == cplx(1.5, 0.3));
  CHECK(std::abs(ramp_value(cplx(1.5, 0.3), 1, 2.0) - cplx(3.0)) < 1e-15);
  CHECK(std::abs(ramp_value(cplx(2.0), 2, 2.5) - cplx(3.0)) < 1e-15);

  auto s = init(RunConfig{});
  auto t = extend_along_segments(s);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(t[i](0, cplx(0.3, 0.2)) - 2.0) < 1e-12);
    CHECK(std::abs(t[i](0, cplx(1.5, 0.0)) - 2.5) < 1e-12);
    CHECK(std::abs(t[i](0, cplx(-2.0, 0.0)) - 3.0) < 1e-12);
    CHECK_THROWS_AS(t[i](0, cplx(0.0, 1.5)), Error);
  }
}

TEST_CASE("a two-step run meets every certificate") {
  const auto& r = n2();
  REQUIRE_MESSAGE(r.ok, r.error);
  const auto& s = r.state;
  REQUIRE(s.n() == 2);
  REQUIRE(s.ledger.size() == 2u);
  const auto& c2 = s.ledger[1];
  CHECK(c2.budget == 0.5);
  const auto& pc = c2.per_b[0];
  CHECK(pc.convergence < c2.budget);
  CHECK(pc.growth > 1.0);
  CHECK(pc.arc_odd > 2.0);
  CHECK(pc.arc_even > 2.0);
  CHECK(pc.delta > 0.0);
  CHECK(pc.delta < g::max_admissible_delta({0.0, pi, 2 * pi}));
  // refined angle array: three times as many gaps
  CHECK(s.current().angles[0].size() == 7u);
  CHECK_NOTHROW(g::validate_angle_array(s.current().angles[0]));
  REQUIRE(r.final_growth.size() == 1u);
  for (int m = 1; m <= 2; ++m) CHECK(r.final_growth[0][m - 1] > m - 2);
}

TEST_CASE("ledger numbers are reproducible from the stored polynomials") {
  const auto& s = n2().state;
  const auto& cert = s.ledger[1];
  auto again = measure(s.steps[1], &s.steps[0], 0, cert.density);
  CHECK(again.convergence == cert.per_b[0].convergence);
  CHECK(again.growth == cert.per_b[0].growth);
  CHECK(again.arc_odd == cert.per_b[0].arc_odd);
  CHECK(again.arc_even == cert.per_b[0].arc_even);
}

TEST_CASE("certificate measurements on simple maps") {
  Poly id{1.0, {0.0, 1.0}};
  Poly shifted{1.0, {0.25, 1.0}};
  CHECK(sup_difference(id, shifted, 2, 12.0) == doctest::Approx(0.25));
  Poly one = Poly::constant(1.0);
  Poly minus = Poly::constant(-1.0);
  // max(Re z, 1) over the annulus 1 <= |z| <= 2 is attained on the left half
  CHECK(growth_minimum(id, one, 2, 24.0) == doctest::Approx(1.0));
  CHECK(growth_minimum(id, minus, 2, 24.0) < -0.9);
  CHECK(arc_minimum(id, 2, {0.0, 0.5, 2 * pi}, true, 100.0) == doctest::Approx(2 * std::cos(0.5)).epsilon(1e-3));
}

TEST_CASE("evaluation reports the certified region") {
  const auto& s = n2().state;
  auto e = evaluate(s, 0, cplx(0.5, 0.5));
  CHECK(e.certified);
  CHECK(e.disk_index == 1);
  CHECK(e.tail_bound == step_budget(s.config, 2));
  auto far = evaluate(s, 0, cplx(5.0, 0.0));
  CHECK_FALSE(far.certified);
  CHECK(far.disk_index == 5);
  auto h = harmonic_map(s, 0, cplx(1.5, -0.2));
  auto e2 = evaluate(s, 0, cplx(1.5, -0.2));
  CHECK(h[0] == e2.f1.real());
  CHECK(h[1] == e2.f2.real());
  CHECK_THROWS_AS(evaluate(s, 3, cplx(0.0)), Error);
}

TEST_CASE("an aborted run keeps its certified prefix") {
  RunConfig c = two_steps();
  c.steps = 3;
  c.max_degree = 16;
  auto r = run(c);
  if (!r.ok) {
    CHECK_FALSE(r.error.empty());
    CHECK(r.state.n() >= 1);
    CHECK(r.state.n() < 3);
    CHECK(r.state.ledger.size() == r.state.steps.size());
  } else {
    CHECK(r.state.n() == 3);
  }
}
