#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "errors.hpp"
#include "serialize.hpp"
#include "verify.hpp"

using namespace propermap;
using namespace propermap::verify;
using geometry::cplx;

namespace {

const driver::InductionState& n2() {
  static driver::InductionState s = [] {
    driver::RunConfig c;
    c.steps = 2;
    auto r = driver::run(c);
    if (!r.ok) throw std::runtime_error(r.error);
    return r.state;
  }();
  return s;
}

const CheckReport& find(const VerifyResult& v, const std::string& name) {
  for (const auto& c : v.checks)
    if (c.name == name) return c;
  throw std::runtime_error("missing check " + name);
}

std::vector<cplx> probe_points() {
  std::vector<cplx> p;
  for (int k = 0; k < 16; ++k) p.push_back(std::polar(0.3 + 0.05 * k, 0.7 * k));
  return p;
}

}  // namespace

TEST_CASE("five-point Laplacian of simple functions") {
  auto sq = [](cplx z) { return z.real() * z.real(); };
  CHECK(laplacian_residual(sq, {0.3, -0.2}, 0.01) == doctest::Approx(2.0).epsilon(1e-8));
  auto saddle = [](cplx z) { return z.real() * z.real() - z.imag() * z.imag(); };
  CHECK(std::fabs(laplacian_residual(saddle, {0.3, -0.2}, 0.01)) < 1e-9);
}

TEST_CASE("harmonic probes: rounding level and second-order decay") {
  auto cubic = [](cplx z) { return (z * z * z).real(); };
  auto p3 = probe_harmonic(cubic, probe_points(), 0.01);
  CHECK(p3.rounding_level);
  CHECK(p3.pass());

  auto quintic = [](cplx z) { return std::pow(z, 5).real(); };
  auto p5 = probe_harmonic(quintic, probe_points(), 0.01);
  CHECK_FALSE(p5.rounding_level);
  CHECK(p5.ratio == doctest::Approx(4.0).epsilon(0.02));
  CHECK(p5.second_order);

  // a non-harmonic function keeps a constant residual and fails
  auto sq = [](cplx z) { return std::norm(z); };
  auto ps = probe_harmonic(sq, probe_points(), 0.01);
  CHECK_FALSE(ps.pass());
  CHECK(ps.ratio == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("a certified state passes every check") {
  auto v = verify_state(n2());
  for (const auto& c : v.checks) {
    CAPTURE(c.name);
    if (!c.advisory) CHECK(c.passed);
    if (!c.advisory) CHECK_FALSE(c.entries.empty());
  }
  CHECK(v.passed);
  CHECK(fresh_density(n2()) != n2().ledger.back().density);
  CHECK(find(v, "family_continuity").advisory);
  auto j = to_json(v);
  CHECK(j["passed"].get<bool>());
}

TEST_CASE("state round-trips through JSON exactly") {
  auto j = io::state_to_json(n2());
  auto back = io::state_from_json(j);
  CHECK(io::state_to_json(back) == j);
  CHECK(verify_state(back).passed);
  auto p = back.current().F[0].polys[0];
  auto q = n2().current().F[0].polys[0];
  REQUIRE(p.coeffs.size() == q.coeffs.size());
  for (std::size_t k = 0; k < p.coeffs.size(); ++k) CHECK(p.coeffs[k] == q.coeffs[k]);
}

TEST_CASE("every coefficient perturbation is caught") {
  const auto& s = n2();
  int tried = 0;
  for (std::size_t k = 0; k < s.steps.size(); ++k)
    for (int i = 0; i < 2; ++i)
      for (std::size_t c = 0; c < s.steps[k].F[i].polys[0].coeffs.size(); ++c) {
        for (cplx dir : {cplx(1.0), cplx(0.0, 1.0)}) {
          auto t = s;
          double e = 2.0 * driver::step_budget(s.config, s.steps[k].n);
          t.steps[k].F[i].polys[0].coeffs[c] += e * dir;
          CAPTURE(k);
          CAPTURE(i);
          CAPTURE(c);
          REQUIRE_FALSE(verify_state(t).passed);
          ++tried;
        }
      }
  CHECK(tried > 20);
}

TEST_CASE("tampered angles and ledger values are caught") {
  auto t = n2();
  t.steps[1].angles[0][1] += 1e-3;
  CHECK_FALSE(find(verify_state(t), "ledger").passed);

  auto u = n2();
  u.ledger[1].per_b[0].growth += 1e-6;
  CHECK_FALSE(verify_state(u).passed);

  auto w = n2();
  w.ledger.pop_back();
  CHECK_FALSE(verify_state(w).passed);
}

TEST_CASE("corrupt state files are rejected") {
  auto j = io::state_to_json(n2());
  auto bad = j;
  bad["steps"][1]["F1"][0]["coeffs"][0][0] = "not a number";
  CHECK_THROWS_AS(io::state_from_json(bad), Error);
  auto missing = j;
  missing.erase("ledger");
  CHECK_THROWS_AS(io::state_from_json(missing), Error);
}
