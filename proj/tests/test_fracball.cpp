#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hypercyl/fracball.hpp"
#include "hypercyl/rng.hpp"
#include "hypercyl/sampler.hpp"

using namespace hypercyl;
using namespace hypercyl::fracball;
using sampler::BallConfig;
using sampler::BallProcessSpec;
using sampler::EuclideanBall;

namespace {

Vec vec2(double x, double y) { return Vec{x, y}; }

BallProcessSpec wide_spec(double half = 5.0) {
  return BallProcessSpec(2, Box::centered(2, half), 0.2, 1.0, 3.0);
}

BallConfig config_with(std::vector<EuclideanBall> balls, double half = 5.0) {
  return BallConfig{wide_spec(half), std::move(balls)};
}

}  // namespace

TEST_CASE("annulus validation") {
  CHECK_THROWS_AS(Annulus(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Annulus(2.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(Annulus(3.0, 1.0), std::invalid_argument);
  const Annulus ok(1.0, 3.0);
  CHECK(ok.a == 1.0);
  CHECK(ok.b == 3.0);
}

TEST_CASE("point coverage is open-ball membership") {
  const auto cfg = config_with({{vec2(0, 0), 0.5}});
  CHECK(point_covered(cfg, vec2(0.4, 0)));
  CHECK(!point_covered(cfg, vec2(0.5, 0)));  // boundary excluded
  CHECK(!point_covered(cfg, vec2(0.6, 0)));
  CHECK(!point_covered(config_with({}), vec2(0, 0)));
}

TEST_CASE("crossing detects a bridging chain and respects strict overlap") {
  const Annulus ann(1.0, 3.0);

  // Three-ball chain from the inner surface to the outer one.
  const auto chain = config_with({{vec2(1.5, 0), 0.6},
                                  {vec2(2.3, 0), 0.5},
                                  {vec2(2.8, 0), 0.5}});
  CHECK(crossing(chain, ann));

  // Tangency does not connect: gap chain fails even though both ends touch.
  const auto tangent = config_with({{vec2(1.5, 0), 0.6},
                                    {vec2(2.71, 0), 0.61}});
  CHECK(!crossing(tangent, ann));

  // Two pieces touching one surface each, not linked to each other.
  const auto split = config_with({{vec2(1.2, 0), 0.4},
                                  {vec2(-2.9, 0), 0.4}});
  CHECK(!crossing(split, ann));

  CHECK(!crossing(config_with({}), ann));
}

TEST_CASE("crossing insists on an untruncated sampling window") {
  const Annulus ann(1.0, 3.0);
  BallConfig tight{BallProcessSpec(2, Box::centered(2, 3.0), 0.2, 1.0, 3.0),
                   {{vec2(1.5, 0), 0.6}}};
  CHECK_THROWS_AS(crossing(tight, ann), std::invalid_argument);
}

TEST_CASE("bounded-origin-cluster evidence from independent annuli") {
  int calls = 0;
  auto empty_gen = [&](int level) {
    ++calls;
    const double scale = std::pow(3.0, 2 * level);
    return BallConfig{
        BallProcessSpec(2, Box::centered(2, 5.0 * scale), 0.2, 1.0, 3.0), {}};
  };
  CHECK(origin_cluster_bounded(empty_gen, 3));
  CHECK(calls == 1);  // first failed crossing settles it

  auto crossing_gen = [&](int) {
    return config_with({{vec2(1.5, 0), 0.6},
                        {vec2(2.3, 0), 0.5},
                        {vec2(2.8, 0), 0.5}});
  };
  CHECK(!origin_cluster_bounded(crossing_gen, 1));
}

TEST_CASE("rescale-and-delete matches a fresh process at the critical exponent") {
  const BallProcessSpec spec(2, Box(vec2(0, 0), vec2(1, 1)), 0.1, 1.0, 3.0);
  const auto report = scale_invariance_test(0.5, 1.0 / 3.0, spec, 400, Seed{3, 0});
  CHECK(report.mapped_count > 5000);
  CHECK(report.fresh_count > 5000);
  CHECK(report.count_p > 0.01);
  CHECK(report.ks_p > 0.01);
  CHECK(report.pass);
}

TEST_CASE("rescale-and-delete rejects a non-critical exponent") {
  const BallProcessSpec off(2, Box(vec2(0, 0), vec2(1, 1)), 0.1, 1.0, 2.0);
  const auto report = scale_invariance_test(0.5, 1.0 / 3.0, off, 400, Seed{3, 0});
  CHECK(!report.pass);
}

TEST_CASE("rescale-and-delete validates its arguments") {
  const BallProcessSpec spec(2, Box(vec2(0, 0), vec2(1, 1)), 0.1, 1.0, 3.0);
  CHECK_THROWS_AS(scale_invariance_test(0.5, 1.5, spec, 10, Seed{0, 0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(scale_invariance_test(0.5, 0.0, spec, 10, Seed{0, 0}),
                  std::invalid_argument);
  const BallProcessSpec narrow(2, Box(vec2(0, 0), vec2(1, 1)), 0.2, 1.0, 3.0);
  CHECK_THROWS_AS(scale_invariance_test(0.5, 0.1, narrow, 10, Seed{0, 0}),
                  std::invalid_argument);
}

TEST_CASE("crossing scan is exactly monotone and deterministic") {
  const Annulus ann(1.0, 3.0);
  const auto spec = wide_spec();
  const std::vector<double> grid = {0.0, 0.05, 0.1, 0.15};
  const auto rows = crossing_scan(grid, ann, spec, 150, Seed{7, 0});
  REQUIRE(rows.size() == grid.size());
  CHECK(rows[0].estimate == 0.0);  // lambda 0: nothing to cross
  for (size_t g = 0; g < rows.size(); ++g) {
    CHECK(rows[g].lambda == grid[g]);
    CHECK(rows[g].replicates == 150);
    CHECK(rows[g].ci.lo <= rows[g].estimate + 1e-12);
    CHECK(rows[g].estimate <= rows[g].ci.hi + 1e-12);
    if (g > 0) CHECK(rows[g].estimate >= rows[g - 1].estimate);
  }

  const auto again = crossing_scan(grid, ann, spec, 150, Seed{7, 0});
  for (size_t g = 0; g < rows.size(); ++g)
    CHECK(rows[g].estimate == again[g].estimate);

  CHECK(crossing_scan({}, ann, spec, 10, Seed{0, 0}).empty());
  CHECK_THROWS_AS(crossing_scan({0.2, 0.1}, ann, spec, 10, Seed{0, 0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(crossing_scan({-0.1, 0.2}, ann, spec, 10, Seed{0, 0}),
                  std::invalid_argument);
}
