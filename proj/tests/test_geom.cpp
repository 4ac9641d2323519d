#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "hypercyl/geom.hpp"
#include "hypercyl/rng.hpp"
#include "oracles.hpp"

using namespace hypercyl;
using geom::BallPoint;
using geom::OrientedLine;

namespace {

const double kPi = 3.14159265358979323846;

Vec vec2(double x, double y) {
  Vec v(2);
  v[0] = x;
  v[1] = y;
  return v;
}

Vec vec3(double x, double y, double z) {
  Vec v(3);
  v[0] = x;
  v[1] = y;
  v[2] = z;
  return v;
}

Vec random_unit(int d, rng::Stream& s) {
  for (;;) {
    Vec g(d);
    for (int i = 0; i < d; ++i) g[i] = s.gauss();
    const double n = norm(g);
    if (n > 1e-8) return (1.0 / n) * g;
  }
}

// Independent root finder for the quadratic a^2 t^2 + a cosh(1)(1-t^2) = 1.
double a_by_bisection(double t) {
  auto f = [&](double a) {
    return a * a * t * t + a * std::cosh(1.0) * (1.0 - t * t) - 1.0;
  };
  double lo = 0.0, hi = 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("vec and box basics") {
  Vec v(3);
  CHECK(v.dim() == 3);
  CHECK(v[2] == 0.0);
  Vec w(3, 1.5);
  CHECK(w[0] == 1.5);
  CHECK(norm2(w) == doctest::Approx(3 * 1.5 * 1.5));
  CHECK(dist(v, w) == doctest::Approx(std::sqrt(3.0) * 1.5));

  const Box box = Box::centered(2, 2.0);
  CHECK(box.volume() == doctest::Approx(16.0));
  CHECK(box.contains(vec2(1.9, -1.9)));
  CHECK(!box.contains(vec2(2.1, 0.0)));
  CHECK_THROWS_AS(Box(vec2(1, 0), vec2(0, 1)), std::invalid_argument);
}

TEST_CASE("sphere area and ball volume") {
  CHECK(unit_sphere_area(1) == doctest::Approx(2.0));
  CHECK(unit_sphere_area(2) == doctest::Approx(2.0 * kPi));
  CHECK(unit_sphere_area(3) == doctest::Approx(4.0 * kPi));
  CHECK(unit_ball_volume(0) == doctest::Approx(1.0));
  CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
  CHECK(unit_ball_volume(2) == doctest::Approx(kPi));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * kPi / 3.0));
}

TEST_CASE("hyperbolic distance against radial closed form") {
  const BallPoint origin(Vec(2));
  for (int i = 1; i < 40; ++i) {
    const double t = i / 41.0;
    const double d = geom::hyp_dist(origin, BallPoint(vec2(t, 0)));
    CHECK(d == doctest::Approx(2.0 * std::atanh(t)).epsilon(1e-12));
  }
  // symmetric and zero on the diagonal
  const BallPoint a(vec2(0.3, -0.2)), b(vec2(-0.5, 0.1));
  CHECK(geom::hyp_dist(a, b) == doctest::Approx(geom::hyp_dist(b, a)));
  CHECK(geom::hyp_dist(a, a) == doctest::Approx(0.0));
}

TEST_CASE("lift preserves distances via the Minkowski form") {
  auto s = stream_for(Seed{31, 0}, "test.lift");
  for (int i = 0; i < 200; ++i) {
    const int d = 2 + int(s.below(3));
    Vec x = std::sqrt(s.uniform01()) * 0.95 * random_unit(d, s);
    Vec y = std::sqrt(s.uniform01()) * 0.95 * random_unit(d, s);
    const BallPoint px(x), py(y);
    const double via_form = std::acosh(std::max(
        1.0, geom::minkowski_dot(geom::lift(px).m, geom::lift(py).m)));
    CHECK(via_form == doctest::Approx(geom::hyp_dist(px, py)).epsilon(1e-9));
    // round trip
    CHECK(dist(geom::drop(geom::lift(px)).coords(), x) < 1e-12);
  }
}

TEST_CASE("gamma closed form") {
  CHECK(geom::gamma_fn(0.0) == doctest::Approx(kPi / 2).epsilon(1e-15));
  CHECK(geom::gamma_fn(0.5) == doctest::Approx(oracle::kAtan34).epsilon(1e-15));
  for (int i = 1; i < 50; ++i) {
    const double t = i / 50.0;
    CHECK(std::cos(geom::gamma_fn(t)) / std::sin(geom::gamma_fn(t)) ==
          doctest::Approx(2.0 * t / (1.0 - t * t)).epsilon(1e-12));
  }
}

TEST_CASE("a_func matches an independent bisection root") {
  for (int i = 0; i <= 60; ++i) {
    const double t = 0.001 + (0.999 - 0.001) * i / 60.0;
    CHECK(geom::a_func(t) == doctest::Approx(a_by_bisection(t)).epsilon(1e-12));
  }
  CHECK(geom::a_func(0.5) == doctest::Approx(oracle::kAHalf).epsilon(1e-14));
  CHECK(geom::a_func(1e-14) ==
        doctest::Approx(oracle::kInvCosh1).epsilon(1e-12));
}

TEST_CASE("beta values and parametrisations") {
  CHECK(geom::beta_fn(0.0) == doctest::Approx(oracle::kBetaZero).epsilon(1e-14));
  CHECK(geom::beta_fn(0.5) == doctest::Approx(oracle::kBetaHalf).epsilon(1e-14));
  CHECK(geom::beta_fn(oracle::kTanhHalf) ==
        doctest::Approx(oracle::kBetaAtTanhHalf).epsilon(1e-13));
  CHECK(geom::beta_via_h(3.0) == doctest::Approx(oracle::kBetaH3).epsilon(1e-14));
  CHECK(geom::beta_via_h(2.0) == doctest::Approx(oracle::kBetaH2).epsilon(1e-14));
  // the two parametrisations agree through t = tanh(h/2)
  for (int i = 0; i <= 40; ++i) {
    const double h = 0.05 + 3.0 * i / 40.0;
    CHECK(geom::beta_fn(std::tanh(h / 2.0)) ==
          doctest::Approx(geom::beta_via_h(h)).epsilon(1e-9));
  }
  // continuity at the piecewise switch
  CHECK(geom::beta_via_h(1.0 - 1e-9) ==
        doctest::Approx(geom::beta_via_h(1.0 + 1e-9)).epsilon(1e-7));
}

TEST_CASE("gamma_tilde inverts sinh") {
  for (int i = 0; i <= 30; ++i) {
    const double h = 0.1 + 5.0 * i / 30.0;
    const double g = geom::gamma_tilde(h);
    CHECK(std::cos(g) / std::sin(g) == doctest::Approx(std::sinh(h)).epsilon(1e-13));
  }
  CHECK(geom::gamma_tilde(2.0) ==
        doctest::Approx(oracle::kGammaTilde2).epsilon(1e-14));
  CHECK(geom::gamma_tilde(0.0) == doctest::Approx(kPi / 2).epsilon(1e-15));
}

TEST_CASE("foot radius to distance round trip") {
  for (int i = 0; i < 30; ++i) {
    const double h = 0.05 + i * 0.2;
    CHECK(geom::hyp_dist_from_radius(geom::radius_from_hyp_dist(h)) ==
          doctest::Approx(h).epsilon(1e-12));
  }
  CHECK(geom::radius_from_hyp_dist(1.0) ==
        doctest::Approx(oracle::kTanhHalf).epsilon(1e-14));
}

TEST_CASE("ratio of beta to gamma stays in its band") {
  for (int i = 0; i <= 400; ++i) {
    const double t = std::pow(10.0, -8.0 + 7.9 * i / 400.0);  // up to ~0.79
    const double ratio = geom::beta_fn(t) / geom::gamma_fn(t);
    CHECK(ratio >= oracle::kRatioLo - 1e-9);
    CHECK(ratio <= oracle::kSinh1 + 1e-9);
  }
}

TEST_CASE("oriented line validation") {
  CHECK_THROWS_AS(OrientedLine(vec2(0, 2), vec2(0.5, 0)),
                  std::domain_error);  // normal not unit
  CHECK_THROWS_AS(OrientedLine(vec2(0, 1), vec2(0.0, 0.5)),
                  std::domain_error);  // foot off the hyperplane
  CHECK_THROWS_AS(OrientedLine(vec2(0, 1), vec2(1.5, 0)),
                  std::domain_error);  // foot outside the ball
  const OrientedLine ok(vec2(0, 1), vec2(0.5, 0));
  CHECK(ok.dim() == 2);
}

TEST_CASE("ideal endpoints worked example") {
  const OrientedLine L(vec2(0, 1), vec2(0.5, 0));
  const auto ends = geom::endpoints(L);
  CHECK(dist(ends.forward, vec2(0.8, 0.6)) < 1e-14);
  CHECK(dist(ends.backward, vec2(0.8, -0.6)) < 1e-14);
  CHECK(norm(ends.forward) == doctest::Approx(1.0).epsilon(1e-14));

  // degenerate foot: endpoints are exactly +-normal
  const OrientedLine through_origin(vec2(0, 1), vec2(0, 0));
  const auto e0 = geom::endpoints(through_origin);
  CHECK(dist(e0.forward, vec2(0, 1)) == 0.0);
  CHECK(dist(e0.backward, vec2(0, -1)) == 0.0);
}

TEST_CASE("endcap contains the forward endpoints of its bundle") {
  auto s = stream_for(Seed{77, 0}, "test.endcap");
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + int(s.below(2));
    const Vec u = random_unit(d, s);
    Vec raw(d);
    for (int i = 0; i < d; ++i) raw[i] = s.gauss();
    Vec f = raw - dot(raw, u) * u;
    f = (0.6 * s.uniform01() / std::max(norm(f), 1e-12)) * f;
    const OrientedLine L(u, f);
    const auto cap = geom::endcap(L);
    CHECK(cap.radius == doctest::Approx(geom::beta_fn(norm(f))).epsilon(1e-12));

    // lines whose feet sit within hyperbolic distance 1 on the hyperplane
    const auto X = geom::lift(BallPoint(f));
    const auto basis = geom::hyperplane_tangent_basis(X, geom::lift_normal(u));
    for (int j = 0; j < 40; ++j) {
      Vec e(d + 1);
      double n2 = 0.0;
      std::vector<double> cf(basis.size());
      for (auto& c : cf) {
        c = s.gauss();
        n2 += c * c;
      }
      if (n2 < 1e-12) continue;
      for (size_t k = 0; k < basis.size(); ++k)
        e = e + (cf[k] / std::sqrt(n2)) * basis[k];
      const double rho = 0.999 * s.uniform01();
      const Vec foot2 = geom::drop(geom::geodesic_point(X, e, rho)).coords();
      const auto fwd = geom::endpoints(OrientedLine(u, foot2)).forward;
      CHECK(cap.contains(fwd));
    }
  }
}

TEST_CASE("hyperboloid helpers") {
  auto s = stream_for(Seed{5, 0}, "test.hyperboloid");
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 2 + int(s.below(3));
    const Vec u = random_unit(d, s);
    Vec raw(d);
    for (int i = 0; i < d; ++i) raw[i] = s.gauss();
    Vec f = raw - dot(raw, u) * u;
    f = (0.7 * s.uniform01() / std::max(norm(f), 1e-12)) * f;
    const auto X = geom::lift(BallPoint(f));
    const Vec U = geom::lift_normal(u);

    CHECK(geom::minkowski_dot(X.m, X.m) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(geom::minkowski_dot(X.m, U)) < 1e-10);

    const auto basis = geom::hyperplane_tangent_basis(X, U);
    REQUIRE(int(basis.size()) == d - 1);
    for (size_t i = 0; i < basis.size(); ++i) {
      CHECK(geom::minkowski_dot(basis[i], basis[i]) ==
            doctest::Approx(-1.0).epsilon(1e-10));
      CHECK(std::abs(geom::minkowski_dot(basis[i], X.m)) < 1e-9);
      CHECK(std::abs(geom::minkowski_dot(basis[i], U)) < 1e-9);
      for (size_t j = i + 1; j < basis.size(); ++j)
        CHECK(std::abs(geom::minkowski_dot(basis[i], basis[j])) < 1e-9);
    }

    // geodesic arc length equals the distance
    const double step = 0.3 + s.uniform01();
    const auto Y = geom::geodesic_point(X, basis[0], step);
    CHECK(geom::minkowski_dot(Y.m, Y.m) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(geom::hyp_dist(geom::drop(X), geom::drop(Y)) ==
          doctest::Approx(step).epsilon(1e-9));
  }
}

TEST_CASE("hyperplane projection and distance") {
  auto s = stream_for(Seed{13, 0}, "test.project");
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + int(s.below(3));
    const Vec u = random_unit(d, s);
    const Vec p = (0.9 * std::sqrt(s.uniform01())) * random_unit(d, s);
    const BallPoint bp(p);
    const auto q = geom::project_to_H(bp, u);
    // lands on the hyperplane
    CHECK(std::abs(dot(q.coords(), u)) < 1e-10);
    // realizes the reported distance
    CHECK(geom::hyp_dist(bp, q) ==
          doctest::Approx(geom::dist_to_H(bp, u)).epsilon(1e-8));
    // fixed points
    Vec on_h = p - dot(p, u) * u;
    CHECK(geom::dist_to_H(BallPoint(on_h), u) < 1e-10);
  }
}

TEST_CASE("cylinder membership") {
  const OrientedLine L(vec2(0, 1), vec2(0.5, 0));
  CHECK(geom::cylinder_contains(L, BallPoint(vec2(0.5, 0))));   // the foot
  CHECK(geom::cylinder_contains(L, BallPoint(vec2(0.5, 0.4)))); // along the line
  CHECK(!geom::cylinder_contains(L, BallPoint(vec2(-0.5, 0)))); // far foot
  // hyperplane point at hyperbolic distance just under / over 1 from the foot
  const double t_in = std::tanh((2.0 * std::atanh(0.5) + 0.999) / 2.0);
  const double t_out = std::tanh((2.0 * std::atanh(0.5) + 1.001) / 2.0);
  CHECK(geom::cylinder_contains(L, BallPoint(vec2(t_in, 0))));
  CHECK(!geom::cylinder_contains(L, BallPoint(vec2(t_out, 0))));
}

TEST_CASE("cylinder intersection basic cases") {
  const OrientedLine a(vec2(0, 1), vec2(0.3, 0));
  const auto self = geom::cylinders_intersect(a, a);
  CHECK(self.intersects);
  REQUIRE(self.witness.has_value());
  CHECK(geom::cylinder_contains(a, *self.witness));

  // far-apart cylinders on opposite sides
  const double t_far = std::tanh(5.0 / 2.0);
  const OrientedLine b(vec2(0, 1), vec2(t_far, 0));
  const OrientedLine c(vec2(0, 1), vec2(-t_far, 0));
  CHECK(!geom::cylinders_intersect(b, c).intersects);
}

TEST_CASE("overlapping endcaps yield verified witnesses") {
  auto s = stream_for(Seed{2024, 0}, "test.cylpairs");
  auto random_line = [&](int d) {
    const Vec u = random_unit(d, s);
    Vec raw(d);
    for (int i = 0; i < d; ++i) raw[i] = s.gauss();
    Vec f = raw - dot(raw, u) * u;
    const double n = norm(f);
    f = (n > 1e-12 ? 0.75 * s.uniform01() / n : 0.0) * f;
    return OrientedLine(u, f);
  };
  auto cap_dist = [](const Vec& x, const Vec& y) {
    Vec diff = x - y;
    return 2.0 * std::asin(std::min(1.0, norm(diff) / 2.0));
  };
  int tested = 0;
  for (int trial = 0; trial < 4000 && tested < 300; ++trial) {
    const int d = 2 + int(s.below(2));
    const OrientedLine a = random_line(d), b = random_line(d);
    const auto ca = geom::endcap(a), cb = geom::endcap(b);
    if (!(cap_dist(ca.center, cb.center) < ca.radius + cb.radius)) continue;
    ++tested;
    const auto res = geom::cylinders_intersect(a, b);
    CHECK(res.intersects);
    if (res.witness) {
      CHECK(geom::cylinder_contains(a, *res.witness));
      CHECK(geom::cylinder_contains(b, *res.witness));
    }
  }
  CHECK(tested >= 300);
}
