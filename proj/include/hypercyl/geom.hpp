#pragma once

// Core geometry of the Poincare ball model of d-dimensional hyperbolic space
// (d >= 2), specialised to unit-thickness solid cylinders around geodesics
// that meet a fixed totally geodesic hypersurface orthogonally.
//
// Conventions used throughout:
//  * Points live strictly inside the Euclidean unit ball.
//  * A "line bundle hypersurface" H is determined by a unit normal u taken
//    at the origin; H is the diameter hyperplane u-perp (a totally geodesic
//    copy of (d-1)-dimensional hyperbolic space through the origin).
//  * An OrientedLine records (normal u, foot x in H): the geodesic through x
//    orthogonal to H, oriented so that its forward ideal endpoint lies on
//    the u side of the boundary sphere.
//  * Ideal-boundary caps are open geodesic caps cap(center, radius) on the
//    unit sphere, measured in angular distance.
//
// Projection onto H and distances to H are computed in the hyperboloid
// (Minkowski) chart, which keeps those operations linear algebra.

#include <array>
#include <cmath>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <vector>

namespace hypercyl {

// ---------------------------------------------------------------------------
// Small fixed-capacity vector.  Ambient dimensions run from 2 to 8; one extra
// slot accommodates Minkowski lifts with d+1 coordinates.
// ---------------------------------------------------------------------------
class Vec {
 public:
  static constexpr int kCapacity = 9;

  Vec() = default;
  explicit Vec(int dim, double fill = 0.0) : n_(dim) {
    if (dim < 0 || dim > kCapacity)
      throw std::invalid_argument("Vec: dimension out of range");
    for (int i = 0; i < dim; ++i) c_[i] = fill;
  }
  Vec(std::initializer_list<double> xs) : n_(static_cast<int>(xs.size())) {
    if (n_ > kCapacity) throw std::invalid_argument("Vec: too many entries");
    int i = 0;
    for (double x : xs) c_[i++] = x;
  }

  int dim() const { return n_; }
  double& operator[](int i) { return c_[i]; }
  double operator[](int i) const { return c_[i]; }

  double* data() { return c_.data(); }
  const double* data() const { return c_.data(); }

  bool operator==(const Vec& o) const {
    if (n_ != o.n_) return false;
    for (int i = 0; i < n_; ++i)
      if (c_[i] != o.c_[i]) return false;
    return true;
  }
  bool operator!=(const Vec& o) const { return !(*this == o); }

 private:
  std::array<double, kCapacity> c_{};
  int n_ = 0;
};

inline Vec operator+(const Vec& a, const Vec& b) {
  Vec r(a.dim());
  for (int i = 0; i < a.dim(); ++i) r[i] = a[i] + b[i];
  return r;
}
inline Vec operator-(const Vec& a, const Vec& b) {
  Vec r(a.dim());
  for (int i = 0; i < a.dim(); ++i) r[i] = a[i] - b[i];
  return r;
}
inline Vec operator*(double s, const Vec& a) {
  Vec r(a.dim());
  for (int i = 0; i < a.dim(); ++i) r[i] = s * a[i];
  return r;
}
inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}
inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }
inline double dist(const Vec& a, const Vec& b) { return norm(a - b); }

// Axis-aligned box, used as a sampling window and for crossing geometry.
struct Box {
  Vec lo, hi;

  Box() = default;
  Box(Vec lo_, Vec hi_) : lo(lo_), hi(hi_) {
    if (lo.dim() != hi.dim()) throw std::invalid_argument("Box: mixed dims");
    for (int i = 0; i < lo.dim(); ++i)
      if (!(lo[i] < hi[i])) throw std::invalid_argument("Box: lo must be < hi");
  }
  static Box centered(int dim, double half_side) {
    return Box(Vec(dim, -half_side), Vec(dim, half_side));
  }
  int dim() const { return lo.dim(); }
  double volume() const {
    double v = 1.0;
    for (int i = 0; i < lo.dim(); ++i) v *= hi[i] - lo[i];
    return v;
  }
  bool contains(const Vec& p) const {
    for (int i = 0; i < lo.dim(); ++i)
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
    return true;
  }
  bool contains(const Box& inner) const {
    for (int i = 0; i < lo.dim(); ++i)
      if (inner.lo[i] < lo[i] || inner.hi[i] > hi[i]) return false;
    return true;
  }
};

// Surface area of the unit sphere S^{d-1} in R^d.
double unit_sphere_area(int d);
// Volume of the unit ball B^k in R^k (k >= 0).
double unit_ball_volume(int k);

namespace geom {

inline constexpr double kUnitTol = 1e-12;       // unit-norm validation
inline constexpr double kNearOriginTol = 1e-9;  // degenerate-foot switch
inline constexpr double kFatRadius = 1.0;       // cylinder thickness

// Radial projection x/|x| onto the boundary sphere; points closer to the
// origin than kNearOriginTol use the fixed convention (1,0,...,0).
Vec radial_direction(const Vec& x);

// ---------------------------------------------------------------------------
// Validated model types
// ---------------------------------------------------------------------------

// A point strictly inside the unit ball.
class BallPoint {
 public:
  explicit BallPoint(Vec coords);
  const Vec& coords() const { return c_; }
  int dim() const { return c_.dim(); }
  double operator[](int i) const { return c_[i]; }

 private:
  Vec c_;
};

// Geodesic through `foot` orthogonal to the diameter hyperplane with unit
// `normal`; the foot must lie on that hyperplane.
struct OrientedLine {
  Vec normal;
  Vec foot;

  OrientedLine(Vec normal_, Vec foot_);
  int dim() const { return normal.dim(); }
};

// Open spherical cap on the ideal boundary, radius in (0, pi] radians.
struct SphericalCap {
  Vec center;
  double radius = 0.0;

  SphericalCap(Vec center_, double radius_);
  int dim() const { return center.dim(); }
  bool contains(const Vec& boundary_point) const;
};

// Point on the upper sheet of the unit hyperboloid in Minkowski space
// R^{1,d}: x0^2 - |x|^2 = 1, x0 > 0.
struct HyperboloidPoint {
  Vec m;  // d+1 coordinates, time component first

  explicit HyperboloidPoint(Vec minkowski_coords);
  int space_dim() const { return m.dim() - 1; }
};

// ---------------------------------------------------------------------------
// Scalar maps of the foot radius t = |x| (Euclidean, in [0,1))
// ---------------------------------------------------------------------------

// Hyperbolic distance between two interior points.
double hyp_dist(const BallPoint& x, const BallPoint& y);

// Half-aperture of the ideal shadow of the ball around a point at Euclidean
// radius t: gamma(t) = arctan((1-t^2)/(2t)), gamma(0) = pi/2.
double gamma_fn(double t);

// Modified-radius factor a(t) in (0,1): the unique positive root of
// a^2 t^2 + a cosh(1) (1-t^2) - 1 = 0, computed in the rationalized form
// 2 / (sqrt(cosh(1)^2 (1-t^2)^2 + 4 t^2) + cosh(1)(1-t^2)) which is stable
// for t -> 0.  Domain (0,1).
double a_func(double t);

// Angular radius of the forward endcap of the unit-thickness cylinder whose
// axis foot sits at Euclidean radius t.  beta(0) = arccos(1/cosh 1).
double beta_fn(double t);

// Same endcap radius parametrised by the hyperbolic distance h >= 0 of the
// foot from the origin, computed from arccot(sinh .) differences:
//   h > 1:      (gt(h-1) - gt(h+1)) / 2
//   0 <= h <= 1: (pi - gt(h+1) - gt(1-h)) / 2
// with gt(h) = arccot(sinh h).
double beta_via_h(double h);

// arccot(sinh h) for h >= 0 (equals gamma at the matching Euclidean radius).
double gamma_tilde(double h);

// Euclidean radius of the point at hyperbolic distance h from the origin.
double radius_from_hyp_dist(double h);
// Inverse: hyperbolic distance of a point at Euclidean radius t in [0,1).
double hyp_dist_from_radius(double t);

// ---------------------------------------------------------------------------
// Lines, endpoints, endcaps
// ---------------------------------------------------------------------------

struct IdealEndpoints {
  Vec forward;   // on the normal side
  Vec backward;  // antipodal partner across the hyperplane
};

// Ideal endpoints of the line: cos(gamma) * x/|x| +- sin(gamma) * normal,
// with the degenerate-foot convention for |x| < kNearOriginTol.
IdealEndpoints endpoints(const OrientedLine& L);

// Forward endcap of the unit-thickness cylinder around L: the exact set of
// forward endpoints of lines in the bundle whose feet lie within hyperbolic
// distance 1 of L's foot.
SphericalCap endcap(const OrientedLine& L);

// ---------------------------------------------------------------------------
// Hyperboloid chart
// ---------------------------------------------------------------------------

// Minkowski inner product with signature (+,-,...,-); both arguments d+1.
double minkowski_dot(const Vec& a, const Vec& b);

HyperboloidPoint lift(const BallPoint& p);
BallPoint drop(const HyperboloidPoint& P);

// Embed a Euclidean unit normal u in R^d as the spacelike vector (0,u).
Vec lift_normal(const Vec& unit_normal);

// Point at hyperbolic distance s from X along the unit spacelike tangent V
// (requires <V,V> = -1, <V,X> = 0): X cosh(s) + V sinh(s).
HyperboloidPoint geodesic_point(const HyperboloidPoint& X, const Vec& V, double s);

// Minkowski-orthonormal spacelike basis of the tangent space, at X, of the
// hypersurface { <.,U> = 0 } (requires X on the hypersurface).  Returns
// d-1 vectors.
std::vector<Vec> hyperplane_tangent_basis(const HyperboloidPoint& X, const Vec& U);

// ---------------------------------------------------------------------------
// Projection and cylinder membership
// ---------------------------------------------------------------------------

// Nearest point of the diameter hyperplane u-perp (unit u required).
BallPoint project_to_H(const BallPoint& p, const Vec& unit_normal);

// Hyperbolic distance from p to the hyperplane: arcsinh |<lift(p), (0,u)>|.
double dist_to_H(const BallPoint& p, const Vec& unit_normal);

// True iff p lies in the open solid cylinder of hyperbolic radius 1 around
// L: the projection of p onto L's hyperplane is within hyperbolic distance 1
// of L's foot.
bool cylinder_contains(const OrientedLine& L, const BallPoint& p);

// ---------------------------------------------------------------------------
// Cylinder intersection
// ---------------------------------------------------------------------------

struct CylinderIntersection {
  bool intersects = false;
  // Set when the decision came from the numeric search running out of
  // budget without finding a common point (a "not found" answer, not a
  // certificate of disjointness).
  bool budget_exhausted = false;
  std::optional<BallPoint> witness;
};

// Decides whether the two unit-thickness cylinders share a point.  When the
// forward endcaps overlap, a witness is constructed from the common sub-cap
// (closest-to-origin point of the totally geodesic hypersurface whose radial
// shadow is that sub-cap) and verified via cylinder_contains.  Otherwise a
// budgeted numeric search over one cylinder scores proximity to the other.
CylinderIntersection cylinders_intersect(const OrientedLine& a,
                                         const OrientedLine& b,
                                         int candidate_budget = 10000,
                                         int refine_steps = 50);

}  // namespace geom
}  // namespace hypercyl
