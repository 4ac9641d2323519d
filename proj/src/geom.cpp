#include "hypercyl/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hypercyl/rng.hpp"

namespace hypercyl {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
const double kCosh1 = std::cosh(1.0);
}  // namespace

double unit_sphere_area(int d) {
  if (d < 1) throw std::invalid_argument("unit_sphere_area: d >= 1 required");
  return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

double unit_ball_volume(int k) {
  if (k < 0) throw std::invalid_argument("unit_ball_volume: k >= 0 required");
  return std::pow(kPi, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
}

namespace geom {

Vec radial_direction(const Vec& x) {
  double n = norm(x);
  if (n < kNearOriginTol) {
    Vec e(x.dim());
    e[0] = 1.0;
    return e;
  }
  return (1.0 / n) * x;
}

// ---------------------------------------------------------------------------
// Validated types
// ---------------------------------------------------------------------------

BallPoint::BallPoint(Vec coords) : c_(coords) {
  if (c_.dim() < 2 || c_.dim() > 8)
    throw std::invalid_argument("BallPoint: dimension must be in [2,8]");
  if (!(norm2(c_) < 1.0))
    throw std::domain_error("BallPoint: point not strictly inside unit ball");
}

OrientedLine::OrientedLine(Vec normal_, Vec foot_) : normal(normal_), foot(foot_) {
  if (normal.dim() != foot.dim())
    throw std::invalid_argument("OrientedLine: mixed dimensions");
  if (normal.dim() < 2 || normal.dim() > 8)
    throw std::invalid_argument("OrientedLine: dimension must be in [2,8]");
  if (std::abs(norm(normal) - 1.0) > kUnitTol)
    throw std::domain_error("OrientedLine: normal must be unit length");
  if (std::abs(dot(normal, foot)) > kUnitTol)
    throw std::domain_error("OrientedLine: foot must lie on the hyperplane");
  if (!(norm2(foot) < 1.0))
    throw std::domain_error("OrientedLine: foot not strictly inside unit ball");
}

SphericalCap::SphericalCap(Vec center_, double radius_)
    : center(center_), radius(radius_) {
  if (center.dim() < 2 || center.dim() > 8)
    throw std::invalid_argument("SphericalCap: dimension must be in [2,8]");
  if (std::abs(norm(center) - 1.0) > kUnitTol)
    throw std::domain_error("SphericalCap: center must be a unit vector");
  if (!(radius > 0.0) || radius > kPi)
    throw std::domain_error("SphericalCap: radius must be in (0, pi]");
}

bool SphericalCap::contains(const Vec& boundary_point) const {
  double c = std::clamp(dot(center, boundary_point), -1.0, 1.0);
  return std::acos(c) < radius;
}

HyperboloidPoint::HyperboloidPoint(Vec minkowski_coords) : m(minkowski_coords) {
  if (m.dim() < 3 || m.dim() > 9)
    throw std::invalid_argument("HyperboloidPoint: needs d+1 coords, d in [2,8]");
  double q = minkowski_dot(m, m);
  // The cancellation noise in q grows with m0^2; keep the check scale-aware
  // so far-out but valid points are not rejected.
  double tol = std::max(1e-9, 1e-12 * m[0] * m[0]);
  if (std::abs(q - 1.0) > tol || !(m[0] > 0.0))
    throw std::domain_error("HyperboloidPoint: not on the upper unit sheet");
}

// ---------------------------------------------------------------------------
// Scalar maps
// ---------------------------------------------------------------------------

double hyp_dist(const BallPoint& x, const BallPoint& y) {
  if (x.dim() != y.dim()) throw std::invalid_argument("hyp_dist: mixed dimensions");
  double num = 2.0 * norm2(x.coords() - y.coords());
  double den = (1.0 - norm2(x.coords())) * (1.0 - norm2(y.coords()));
  return std::acosh(std::max(1.0, 1.0 + num / den));
}

double gamma_fn(double t) {
  if (t < 0.0 || t >= 1.0) throw std::domain_error("gamma_fn: t must be in [0,1)");
  if (t == 0.0) return 0.5 * kPi;
  return std::atan2(1.0 - t * t, 2.0 * t);
}

double a_func(double t) {
  if (!(t > 0.0) || !(t < 1.0)) throw std::domain_error("a_func: t must be in (0,1)");
  double A = kCosh1 * (1.0 - t * t);
  return 2.0 / (std::sqrt(A * A + 4.0 * t * t) + A);
}

double beta_fn(double t) {
  if (t < 0.0 || t >= 1.0) throw std::domain_error("beta_fn: t must be in [0,1)");
  if (t == 0.0) return std::acos(1.0 / kCosh1);
  double a = a_func(t);
  return std::acos(std::clamp(a * (1.0 + t * t) / (1.0 + a * a * t * t), -1.0, 1.0));
}

double gamma_tilde(double h) {
  if (h < 0.0) throw std::domain_error("gamma_tilde: h must be >= 0");
  return std::atan2(1.0, std::sinh(h));
}

double beta_via_h(double h) {
  if (h < 0.0) throw std::domain_error("beta_via_h: h must be >= 0");
  if (h > 1.0) return 0.5 * (gamma_tilde(h - 1.0) - gamma_tilde(h + 1.0));
  return 0.5 * (kPi - gamma_tilde(h + 1.0) - gamma_tilde(1.0 - h));
}

double radius_from_hyp_dist(double h) {
  if (h < 0.0) throw std::domain_error("radius_from_hyp_dist: h must be >= 0");
  return std::tanh(0.5 * h);
}

double hyp_dist_from_radius(double t) {
  if (t < 0.0 || t >= 1.0)
    throw std::domain_error("hyp_dist_from_radius: t must be in [0,1)");
  return 2.0 * std::atanh(t);
}

// ---------------------------------------------------------------------------
// Endpoints and endcaps
// ---------------------------------------------------------------------------

IdealEndpoints endpoints(const OrientedLine& L) {
  double t = norm(L.foot);
  if (t < kNearOriginTol) {
    Vec minus = -1.0 * L.normal;
    return {L.normal, minus};
  }
  Vec pr = (1.0 / t) * L.foot;
  double g = gamma_fn(t);
  double c = std::cos(g), s = std::sin(g);
  return {c * pr + s * L.normal, c * pr - 1.0 * s * L.normal};
}

SphericalCap endcap(const OrientedLine& L) {
  double t = norm(L.foot);
  if (t < kNearOriginTol) return SphericalCap(L.normal, beta_fn(0.0));
  Vec pr = (1.0 / t) * L.foot;
  double g = gamma_fn(a_func(t) * t);
  Vec z = std::cos(g) * pr + std::sin(g) * L.normal;
  return SphericalCap((1.0 / norm(z)) * z, beta_fn(t));
}

// ---------------------------------------------------------------------------
// Hyperboloid chart
// ---------------------------------------------------------------------------

double minkowski_dot(const Vec& a, const Vec& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("minkowski_dot: mixed dims");
  double s = a[0] * b[0];
  for (int i = 1; i < a.dim(); ++i) s -= a[i] * b[i];
  return s;
}

HyperboloidPoint lift(const BallPoint& p) {
  double s = norm2(p.coords());
  double inv = 1.0 / (1.0 - s);
  Vec m(p.dim() + 1);
  m[0] = (1.0 + s) * inv;
  for (int i = 0; i < p.dim(); ++i) m[i + 1] = 2.0 * p.coords()[i] * inv;
  return HyperboloidPoint(m);
}

BallPoint drop(const HyperboloidPoint& P) {
  double inv = 1.0 / (1.0 + P.m[0]);
  Vec c(P.space_dim());
  for (int i = 0; i < c.dim(); ++i) c[i] = P.m[i + 1] * inv;
  return BallPoint(c);
}

Vec lift_normal(const Vec& unit_normal) {
  if (std::abs(norm(unit_normal) - 1.0) > kUnitTol)
    throw std::domain_error("lift_normal: normal must be unit length");
  Vec u(unit_normal.dim() + 1);
  for (int i = 0; i < unit_normal.dim(); ++i) u[i + 1] = unit_normal[i];
  return u;
}

HyperboloidPoint geodesic_point(const HyperboloidPoint& X, const Vec& V, double s) {
  return HyperboloidPoint(std::cosh(s) * X.m + std::sinh(s) * V);
}

std::vector<Vec> hyperplane_tangent_basis(const HyperboloidPoint& X, const Vec& U) {
  const int n = X.m.dim();
  const int want = n - 2;  // d-1 spacelike directions
  std::vector<Vec> basis;
  std::vector<Vec> cands;
  for (int i = 0; i < n; ++i) {
    Vec e(n);
    e[i] = 1.0;
    cands.push_back(e);
  }
  auto residual = [&](Vec v) {
    v = v - minkowski_dot(v, X.m) * X.m;  // <X,X> = +1
    v = v + minkowski_dot(v, U) * U;      // <U,U> = -1
    for (const Vec& b : basis) v = v + minkowski_dot(v, b) * b;
    return v;
  };
  while (static_cast<int>(basis.size()) < want) {
    // Greedy pivot: take the candidate with the largest spacelike residual.
    double best = -1.0;
    Vec best_res;
    for (const Vec& c : cands) {
      Vec r = residual(c);
      double nn = -minkowski_dot(r, r);
      if (nn > best) {
        best = nn;
        best_res = r;
      }
    }
    if (best < 1e-14)
      throw std::logic_error("hyperplane_tangent_basis: degenerate pivot");
    basis.push_back((1.0 / std::sqrt(best)) * best_res);
  }
  return basis;
}

// ---------------------------------------------------------------------------
// Projection and membership
// ---------------------------------------------------------------------------

namespace {

// Lift p, split off the component along the spacelike unit normal U, and
// return the renormalized in-hyperplane part together with the signed
// Minkowski component s (sinh of the distance to the hyperplane).
void project_lifted(const Vec& P, const Vec& U, Vec* Q, double* s) {
  double c = minkowski_dot(P, U);
  Vec q = P + c * U;
  double scale = 1.0 / std::sqrt(1.0 + c * c);
  *Q = scale * q;
  *s = c;
}

}  // namespace

BallPoint project_to_H(const BallPoint& p, const Vec& unit_normal) {
  Vec U = lift_normal(unit_normal);
  Vec Q(p.dim() + 1);
  double s = 0.0;
  project_lifted(lift(p).m, U, &Q, &s);
  return drop(HyperboloidPoint(Q));
}

double dist_to_H(const BallPoint& p, const Vec& unit_normal) {
  Vec U = lift_normal(unit_normal);
  return std::asinh(std::abs(minkowski_dot(lift(p).m, U)));
}

bool cylinder_contains(const OrientedLine& L, const BallPoint& p) {
  if (L.dim() != p.dim()) throw std::invalid_argument("cylinder_contains: mixed dims");
  Vec U = lift_normal(L.normal);
  Vec Q(p.dim() + 1);
  double s = 0.0;
  project_lifted(lift(p).m, U, &Q, &s);
  // cosh of hyperbolic distance between two lifted points is their
  // Minkowski inner product.
  double coshd = minkowski_dot(Q, lift(BallPoint(L.foot)).m);
  return coshd < kCosh1;
}

// ---------------------------------------------------------------------------
// Cylinder intersection
// ---------------------------------------------------------------------------

namespace {

// Spherical interpolation from a toward b by angle t (angle(a,b) = dsep > 0).
Vec slerp(const Vec& a, const Vec& b, double t, double dsep) {
  double s = std::sin(dsep);
  Vec r = (std::sin(dsep - t) / s) * a + (std::sin(t) / s) * b;
  return (1.0 / norm(r)) * r;
}

// Any unit vector orthogonal to a.
Vec any_orthogonal(const Vec& a) {
  int k = 0;
  for (int i = 1; i < a.dim(); ++i)
    if (std::abs(a[i]) < std::abs(a[k])) k = i;
  Vec e(a.dim());
  e[k] = 1.0;
  Vec r = e - dot(e, a) * a;
  return (1.0 / norm(r)) * r;
}

struct AxisFrame {
  HyperboloidPoint X;       // lifted foot
  Vec U;                    // lifted hyperplane normal
  std::vector<Vec> basis;   // tangent directions inside the hyperplane at X
};

AxisFrame make_frame(const OrientedLine& L) {
  HyperboloidPoint X = lift(BallPoint(L.foot));
  Vec U = lift_normal(L.normal);
  return {X, U, hyperplane_tangent_basis(X, U)};
}

// Point of the solid cylinder with frame F at disc radius rho (< 1),
// disc direction coefficients w (over the tangent basis), and signed
// distance s along the orthogonal geodesic.
BallPoint cylinder_point(const AxisFrame& F, const std::vector<double>& w,
                         double rho, double s) {
  Vec V(F.X.m.dim());
  for (size_t i = 0; i < F.basis.size(); ++i) V = V + w[i] * F.basis[i];
  double nn = -minkowski_dot(V, V);
  HyperboloidPoint Y = F.X;
  if (rho > 0.0 && nn > 1e-300) {
    V = (1.0 / std::sqrt(nn)) * V;
    Y = geodesic_point(F.X, V, rho);
  }
  Vec P = std::cosh(s) * Y.m + std::sinh(s) * F.U;
  return drop(HyperboloidPoint(P));
}

}  // namespace

CylinderIntersection cylinders_intersect(const OrientedLine& a,
                                         const OrientedLine& b,
                                         int candidate_budget,
                                         int refine_steps) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("cylinders_intersect: mixed dimensions");

  // Fast constructive path: overlapping forward endcaps guarantee a common
  // point, recovered from the middle of the shared sub-cap.
  SphericalCap ca = endcap(a), cb = endcap(b);
  double dsep = std::acos(std::clamp(dot(ca.center, cb.center), -1.0, 1.0));
  if (dsep < ca.radius + cb.radius) {
    double lo = std::max(0.0, dsep - cb.radius);
    double hi = std::min(ca.radius, dsep);
    double ts = 0.5 * (lo + hi);
    double eps = 0.5 * std::min(ca.radius - ts, cb.radius - (dsep - ts));
    Vec u(ca.center);
    if (dsep > kPi - 1e-9) {
      u = slerp(ca.center, any_orthogonal(ca.center), ts, 0.5 * kPi);
    } else if (dsep > 1e-12) {
      u = slerp(ca.center, cb.center, ts, dsep);
    }
    double scale = (1.0 - std::sin(eps)) / std::cos(eps);
    BallPoint witness(scale * u);
    if (cylinder_contains(a, witness) && cylinder_contains(b, witness))
      return {true, false, witness};
    // Construction is believed exact; fall through to the search if floating
    // point ever spoils the verification.
  }

  // Budgeted numeric search over cylinder a, scoring hyperbolic distance of
  // the candidate's projection onto b's hyperplane from b's foot.
  AxisFrame Fa = make_frame(a);
  Vec Ub = lift_normal(b.normal);
  HyperboloidPoint Xb = lift(BallPoint(b.foot));
  auto score = [&](const BallPoint& p) {
    Vec Q(p.dim() + 1);
    double s = 0.0;
    project_lifted(lift(p).m, Ub, &Q, &s);
    return std::acosh(std::max(1.0, minkowski_dot(Q, Xb.m)));
  };
  auto stream = stream_for({0x9c1f2e3d4b5a6978ULL, 0}, "geom.cylinder_search");
  const int k = a.dim() - 1;
  std::vector<double> w(k, 0.0), best_w(k, 0.0);
  double best_rho = 0.0, best_s = 0.0;
  double best_f = std::numeric_limits<double>::infinity();

  auto consider = [&](const std::vector<double>& wc, double rho, double s) {
    BallPoint p = cylinder_point(Fa, wc, rho, s);
    double f = score(p);
    if (f < best_f) {
      best_f = f;
      best_w = wc;
      best_rho = rho;
      best_s = s;
    }
    return f < kFatRadius;
  };

  // Warm starts: both feet.
  if (consider(w, 0.0, 0.0))
    return {true, false, cylinder_point(Fa, best_w, best_rho, best_s)};
  {
    // b's foot as seen from a: accept directly if inside both cylinders.
    BallPoint fb(b.foot);
    if (cylinder_contains(a, fb) && cylinder_contains(b, fb))
      return {true, false, fb};
  }

  for (int it = 0; it < candidate_budget; ++it) {
    for (int i = 0; i < k; ++i) w[i] = stream.gauss();
    double rho = 0.98 * stream.uniform01();
    double span = (it % 2 == 0) ? 2.5 : 10.0;
    double s = stream.uniform(-span, span);
    if (consider(w, rho, s))
      return {true, false, cylinder_point(Fa, best_w, best_rho, best_s)};
  }
  double sigma = 0.5;
  for (int it = 0; it < refine_steps; ++it) {
    std::vector<double> wc = best_w;
    for (int i = 0; i < k; ++i) wc[i] += sigma * stream.gauss();
    double rho = std::clamp(best_rho + sigma * stream.gauss(), 0.0, 0.98);
    double s = best_s + 2.0 * sigma * stream.gauss();
    if (consider(wc, rho, s))
      return {true, false, cylinder_point(Fa, best_w, best_rho, best_s)};
    sigma *= 0.93;
  }
  return {false, true, std::nullopt};
}

}  // namespace geom
}  // namespace hypercyl
