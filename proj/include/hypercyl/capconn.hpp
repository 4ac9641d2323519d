#pragma once

// Analysis of finite cap configurations on the boundary sphere: pairwise
// intersection, union-find connectivity, sequential sphere packings used as
// probe nets, a single-cap coverage certificate, and the vertical projection
// of upper-hemisphere caps to Euclidean balls.

#include <vector>

#include "hypercyl/geom.hpp"
#include "hypercyl/rng.hpp"
#include "hypercyl/sampler.hpp"

namespace hypercyl::capconn {

struct CapConfig {
  std::vector<geom::SphericalCap> caps;
  int dim = 3;
};

// Point packing on the sphere with pairwise spherical separation >= 2^-level.
struct SphereNet {
  std::vector<Vec> points;
  int level = 1;
  double min_separation = 0.5;
  // Set only when construction stopped because the rejection budget was
  // exhausted (the packing is then approximately maximal).
  bool saturated = false;
};

struct Components {
  std::vector<int> label;  // component id per cap, ids by first appearance
  int count = 0;
};

struct CoverageResult {
  bool covered = false;
  std::vector<Vec> witnesses;  // net points no single cap certifies
};

// Spherical (geodesic) distance between unit vectors.
double sphere_dist(const Vec& u, const Vec& v);

// True iff the open caps overlap: d_s(centers) < r_a + r_b.  When the radius
// sum exceeds pi the caps always overlap regardless of the centers.
bool caps_intersect(const geom::SphericalCap& a, const geom::SphericalCap& b);

Components connected_components(const CapConfig& cfg);

inline bool is_connected(const Components& comps) { return comps.count <= 1; }

// Random sequential packing: stream uniform sphere points, accept when at
// spherical distance >= 2^-n from everything accepted so far, stop after
// max_consecutive_rejections straight rejections.
SphereNet build_net(int n, int dim, Seed seed,
                    int max_consecutive_rejections = 100000);

// A net point x is certified iff one single cap (y, alpha) satisfies
// d_s(x, y) <= alpha - 2^-n, i.e. the whole 2^-n cap around x fits in it.
// covered = every net point certified; caps with radius >= pi certify all.
CoverageResult coverage_certificate(const CapConfig& cfg,
                                    const SphereNet& net);

// Fraction of probe points lying in at least one cap (plain membership, no
// certificate margin).
double pointwise_cover_fraction(const CapConfig& cfg,
                                const std::vector<Vec>& probes);

// Half-width constant of the projection window: 1 / (2 sqrt(2 (d-1))).
double window_constant(int d);

// Drop the last coordinate of an upper-hemisphere cap; the projection of the
// cap is contained in the returned Euclidean ball (same radius).  Throws when
// the center's last coordinate is not strictly positive.
sampler::EuclideanBall project_cap_vert(const geom::SphericalCap& cap);

// True iff the closed ball misses the box [-half_width, half_width]^k.
bool ball_disjoint_from_box(const sampler::EuclideanBall& ball,
                            double half_width);

// Integral of (1 - |x|^2)^(-1/2) over the box A (the surface area of the
// upper-hemisphere graph over A).  Throws if A leaves the open unit ball.
double spherical_area_factor(const Box& A);

}  // namespace hypercyl::capconn
