#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "errors.hpp"
#include "families.hpp"

using namespace propermap;
using namespace propermap::families;
namespace g = propermap::geometry;

namespace {
const double pi = std::numbers::pi;
ParamGrid grid3() { return ParamGrid{{-1.0, 0.0, 1.0}}; }
}  // namespace

TEST_CASE("parameter grids") {
  CHECK_NOTHROW(validate(grid3()));
  CHECK_THROWS_AS(validate(ParamGrid{}), Error);
  CHECK_THROWS_AS(validate(ParamGrid{{0.0, 0.0}}), Error);
  CHECK_THROWS_AS(validate(ParamGrid{{1.0, 0.0}}), Error);
  CHECK_THROWS_AS(validate(ParamGrid{{0.0, std::nan("")}}), Error);
  CHECK(index_of(grid3(), 0.0) == 1u);
  CHECK(index_of(grid3(), 1.0 + 1e-14) == 2u);
  CHECK_FALSE(index_of(grid3(), 0.5).has_value());
}

TEST_CASE("constant and per-parameter families") {
  auto f = constant_family(grid3(), g::disk(1));
  CHECK(f.wide);
  CHECK(f.fibers.size() == 3u);
  CHECK(is_valid_proper_family(f).valid);

  auto h = per_param_family(grid3(), {g::disk(1), std::nullopt, g::disk(2)});
  CHECK_FALSE(h.wide);
  auto rep = is_valid_proper_family(h);
  CHECK(rep.valid);
  CHECK_FALSE(rep.wide);
  CHECK_THROWS_AS(per_param_family(grid3(), {g::disk(1)}), Error);

  auto bad = per_param_family(grid3(), {g::disk(1), g::sector(1, 2.0, 1.0), g::disk(1)});
  auto br = is_valid_proper_family(bad);
  CHECK_FALSE(br.valid);
  REQUIRE(br.failing_b.size() == 1u);
  CHECK(br.failing_b[0] == 0.0);
}

TEST_CASE("union of families") {
  auto a = per_param_family(grid3(), {g::disk(1), std::nullopt, std::nullopt});
  auto b = per_param_family(grid3(), {g::sector(1, 0.0, 1.0), g::disk(2), std::nullopt});
  auto u = union_families(a, b);
  CHECK_FALSE(u.wide);
  CHECK(g::contains(*u.fibers[0], {0.5, 0.0}));
  CHECK(g::contains(*u.fibers[0], std::polar(1.5, 0.5)));
  CHECK(g::contains(*u.fibers[1], {1.5, 0.0}));
  CHECK_FALSE(u.fibers[2].has_value());
  CHECK_THROWS_AS(union_families(a, constant_family(ParamGrid{{0.0}}, g::disk(1))), Error);
}

TEST_CASE("Runge raster check separates holes from slits") {
  CHECK(runge_raster_check(g::disk(2)));
  CHECK(runge_raster_check(g::union_of({g::disk(1), g::gamma(1, {0.0, 2.0})})));
  CHECK(runge_raster_check(g::union_of({g::disk(1), g::lblock(1, 0.2, 0.5, 2.5)})));
  // a closed ring encloses the disk it surrounds
  std::vector<double> A{0.0, pi, 2 * pi};
  auto ring = g::union_of({g::odd_union(g::Kind::sector, 1, 0.0, A), g::even_union(g::Kind::sector, 1, 0.0, A)});
  CHECK_FALSE(runge_raster_check(ring));
  CHECK(runge_raster_check(g::union_of({g::disk(1), ring})));
  // the odd W pieces alone leave gaps between sectors
  CHECK(runge_raster_check(g::union_of({g::disk(1), g::odd_union(g::Kind::wblock, 1, 0.2, A)})));

  auto f = constant_family(grid3(), g::disk(1));
  certify_runge(f);
  CHECK(f.runge);
  auto h = constant_family(grid3(), ring);
  certify_runge(h);
  CHECK_FALSE(h.runge);
}

TEST_CASE("minimum over fibers") {
  auto f = constant_family(grid3(), g::disk(1));
  auto m = min_over_fibers([](std::size_t b, g::cplx z) { return 3.0 + b + z.real(); }, f, 20.0);
  REQUIRE(m.size() == 3u);
  for (std::size_t b = 0; b < 3; ++b) CHECK(m[b] == doctest::Approx(2.0 + b).epsilon(1e-9));
  CHECK_THROWS_AS(min_over_fibers([](std::size_t, g::cplx z) { return z.real(); }, f, 10.0), Error);
  auto h = per_param_family(grid3(), {g::disk(1), std::nullopt, g::disk(1)});
  CHECK_THROWS_AS(min_over_fibers([](std::size_t, g::cplx) { return 1.0; }, h, 10.0), Error);
}

TEST_CASE("continuous minorant stays strictly below the minima") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1e-6, 10.0);
  for (int t = 0; t < 200; ++t) {
    PerParamReal v(5);
    for (auto& x : v) x = u(rng);
    auto m = continuous_minorant(v);
    for (std::size_t i = 0; i < v.size(); ++i) {
      CHECK(m[i] > 0.0);
      CHECK(m[i] < v[i]);
    }
  }
  CHECK(continuous_minorant({1.0}, 0.1)[0] == doctest::Approx(0.9));
  CHECK_THROWS_AS(continuous_minorant({1.0, 0.0}), Error);
  CHECK_THROWS_AS(continuous_minorant({1.0}, 1.0), Error);
}

TEST_CASE("families round-trip through JSON") {
  auto h = per_param_family(grid3(), {g::disk(1), std::nullopt, g::lblock(2, 0.1, 0.5, 2.0)});
  auto back = family_from_json(to_json(h));
  CHECK(back.grid == h.grid);
  CHECK_FALSE(back.fibers[1].has_value());
  CHECK(g::to_json(*back.fibers[2]) == g::to_json(*h.fibers[2]));
}
