#include "hypercyl/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace hypercyl::sampler {

namespace {

bool vec_less(const Vec& a, const Vec& b) {
  for (int i = 0; i < a.dim(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

// Unit vector uniform on the sphere in R^d.
Vec random_direction(int d, rng::Stream& stream) {
  for (;;) {
    Vec g(d);
    for (int i = 0; i < d; ++i) g[i] = stream.gauss();
    double n = norm(g);
    if (n > 1e-8) return (1.0 / n) * g;
  }
}

// Unit vector orthogonal to u, uniform on the (d-2)-sphere of such vectors.
Vec random_orthogonal_direction(const Vec& u, rng::Stream& stream) {
  const int d = u.dim();
  for (;;) {
    Vec g(d);
    for (int i = 0; i < d; ++i) g[i] = stream.gauss();
    Vec v = g - dot(g, u) * u;
    double n = norm(v);
    if (n > 1e-8) return (1.0 / n) * v;
  }
}

double cot(double x) { return std::cos(x) / std::sin(x); }

}  // namespace

LineWindow::LineWindow(int d, double h) : dim(d), h_max(h) {
  if (d < 2 || d > 8) throw std::invalid_argument("LineWindow: dim out of range");
  if (!(h > 0.0) || !std::isfinite(h))
    throw std::invalid_argument("LineWindow: h_max must be positive");
}

CapProcessSpec::CapProcessSpec(int d, double c_in, double a_lo, double a_hi)
    : dim(d), c(c_in), alpha_min(a_lo), alpha_max(a_hi) {
  if (d < 2 || d > 8)
    throw std::invalid_argument("CapProcessSpec: dim out of range");
  if (!(c > 0.0) || !std::isfinite(c))
    throw std::invalid_argument("CapProcessSpec: c must be positive");
  const double pi = 3.14159265358979323846;
  // The density blows up at 0 and the cotangent changes sign past c*pi/2,
  // so the band must sit strictly inside (0, c*pi/2].
  if (!(a_lo > 0.0) || !(a_lo < a_hi) || !(a_hi <= c * pi / 2.0 + 1e-12))
    throw std::invalid_argument("CapProcessSpec: need 0 < alpha_min < alpha_max <= c*pi/2");
}

BallProcessSpec::BallProcessSpec(int d, Box win, double rmin, double rmax,
                                 double expo)
    : dim(d), window(std::move(win)), r_min(rmin), r_max(rmax), exponent(expo) {
  if (d < 2 || d > 8)
    throw std::invalid_argument("BallProcessSpec: dim out of range");
  if (window.lo.dim() != d)
    throw std::invalid_argument("BallProcessSpec: window dimension mismatch");
  if (!(rmin > 0.0) || !(rmin < rmax) || !std::isfinite(rmax))
    throw std::invalid_argument("BallProcessSpec: need 0 < r_min < r_max");
  if (!std::isfinite(expo))
    throw std::invalid_argument("BallProcessSpec: exponent must be finite");
}

double line_window_mass(const LineWindow& window) {
  const int d = window.dim;
  const double sh = std::sinh(window.h_max);
  if (d == 2) return 2.0 * sh;
  return unit_sphere_area(d - 2) / static_cast<double>(d - 1) *
         std::pow(sh, d - 1);
}

double cap_band_mass(const CapProcessSpec& spec) {
  const int d = spec.dim;
  const double lo = cot(spec.alpha_min / spec.c);
  const double hi = cot(spec.alpha_max / spec.c);
  return (std::pow(lo, d - 1) - std::pow(std::max(hi, 0.0), d - 1)) /
         static_cast<double>(d - 1);
}

double cap_radius_cdf(const CapProcessSpec& spec, double alpha) {
  if (alpha <= spec.alpha_min) return 0.0;
  if (alpha >= spec.alpha_max) return 1.0;
  const int d = spec.dim;
  const double lo = std::pow(cot(spec.alpha_min / spec.c), d - 1);
  const double hi = std::pow(std::max(cot(spec.alpha_max / spec.c), 0.0), d - 1);
  const double at = std::pow(std::max(cot(alpha / spec.c), 0.0), d - 1);
  return (lo - at) / (lo - hi);
}

double ball_radius_integral(const BallProcessSpec& spec) {
  const double e = spec.exponent;
  if (std::abs(e - 1.0) < 1e-12) return std::log(spec.r_max / spec.r_min);
  return (std::pow(spec.r_min, 1.0 - e) - std::pow(spec.r_max, 1.0 - e)) /
         (e - 1.0);
}

double ball_radius_cdf(const BallProcessSpec& spec, double r) {
  if (r <= spec.r_min) return 0.0;
  if (r >= spec.r_max) return 1.0;
  BallProcessSpec part = spec;
  part.r_max = r;
  return ball_radius_integral(part) / ball_radius_integral(spec);
}

double ball_count_mean(double lambda, const BallProcessSpec& spec) {
  return lambda * spec.window.volume() * ball_radius_integral(spec);
}

geom::OrientedLine sample_one_line(const LineWindow& window,
                                   rng::Stream& stream) {
  const int d = window.dim;
  const double shd = std::pow(std::sinh(window.h_max), d - 1);
  // Distance first: density proportional to sinh^(d-2) * cosh on [0, h_max].
  const double u = stream.uniform01();
  const double h = std::asinh(std::pow(u * shd, 1.0 / (d - 1)));
  const Vec dir = random_direction(d, stream);
  const Vec v = random_orthogonal_direction(dir, stream);
  return geom::OrientedLine(dir, std::tanh(h / 2.0) * v);
}

geom::SphericalCap sample_one_cap(const CapProcessSpec& spec,
                                  rng::Stream& stream) {
  const int d = spec.dim;
  const double lo = std::pow(cot(spec.alpha_min / spec.c), d - 1);
  const double hi = std::pow(std::max(cot(spec.alpha_max / spec.c), 0.0), d - 1);
  const double u = stream.uniform01();
  const double cval = std::pow(lo - u * (lo - hi), 1.0 / (d - 1));
  const double alpha = spec.c * std::atan2(1.0, cval);
  const Vec center = random_direction(d, stream);
  return geom::SphericalCap{center, alpha};
}

EuclideanBall sample_one_ball(const BallProcessSpec& spec,
                              rng::Stream& stream) {
  const int d = spec.dim;
  const double e = spec.exponent;
  const double u = stream.uniform01();
  double r;
  if (std::abs(e - 1.0) < 1e-12) {
    r = spec.r_min * std::pow(spec.r_max / spec.r_min, u);
  } else {
    const double a = std::pow(spec.r_min, 1.0 - e);
    const double b = std::pow(spec.r_max, 1.0 - e);
    r = std::pow(a - u * (a - b), 1.0 / (1.0 - e));
  }
  Vec center(d);
  for (int k = 0; k < d; ++k)
    center[k] = stream.uniform(spec.window.lo[k], spec.window.hi[k]);
  return EuclideanBall{center, r};
}

std::vector<geom::OrientedLine> sample_lines(double lambda,
                                             const LineWindow& window,
                                             Seed seed) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("sample_lines: lambda < 0");
  auto stream = stream_for(seed, "sampler.lines");
  const uint64_t count = stream.poisson(lambda * line_window_mass(window));

  std::vector<geom::OrientedLine> lines;
  lines.reserve(count);
  for (uint64_t i = 0; i < count; ++i)
    lines.push_back(sample_one_line(window, stream));

  std::sort(lines.begin(), lines.end(),
            [](const geom::OrientedLine& a, const geom::OrientedLine& b) {
              const double na = norm2(a.foot), nb = norm2(b.foot);
              if (na != nb) return na < nb;
              if (a.foot != b.foot) return vec_less(a.foot, b.foot);
              return vec_less(a.normal, b.normal);
            });
  return lines;
}

std::vector<geom::SphericalCap> sample_caps_direct(double lambda,
                                                   const CapProcessSpec& spec,
                                                   Seed seed) {
  if (!(lambda >= 0.0))
    throw std::invalid_argument("sample_caps_direct: lambda < 0");
  auto stream = stream_for(seed, "sampler.caps");
  const int d = spec.dim;
  const double mean = lambda * unit_sphere_area(d) * cap_band_mass(spec);
  const uint64_t count = stream.poisson(mean);

  std::vector<geom::SphericalCap> caps;
  caps.reserve(count);
  for (uint64_t i = 0; i < count; ++i)
    caps.push_back(sample_one_cap(spec, stream));

  std::sort(caps.begin(), caps.end(),
            [](const geom::SphericalCap& a, const geom::SphericalCap& b) {
              if (a.radius != b.radius) return a.radius < b.radius;
              return vec_less(a.center, b.center);
            });
  return caps;
}

BallConfig sample_balls(double lambda, const BallProcessSpec& spec, Seed seed) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("sample_balls: lambda < 0");
  auto stream = stream_for(seed, "sampler.balls");
  const uint64_t count = stream.poisson(ball_count_mean(lambda, spec));

  BallConfig config{spec, {}};
  config.balls.reserve(count);
  for (uint64_t i = 0; i < count; ++i)
    config.balls.push_back(sample_one_ball(spec, stream));

  std::sort(config.balls.begin(), config.balls.end(),
            [](const EuclideanBall& a, const EuclideanBall& b) {
              if (a.radius != b.radius) return a.radius < b.radius;
              return vec_less(a.center, b.center);
            });
  return config;
}

std::vector<geom::SphericalCap> map_caps_minus(
    const std::vector<geom::OrientedLine>& lines) {
  std::vector<geom::SphericalCap> caps;
  caps.reserve(lines.size());
  for (const auto& line : lines) caps.push_back(geom::endcap(line));
  return caps;
}

std::vector<geom::SphericalCap> map_caps_plus(
    const std::vector<geom::OrientedLine>& lines, double r) {
  const double r_floor = std::tanh(0.5);
  if (r < r_floor - 1e-12)
    throw std::invalid_argument("map_caps_plus: r below tanh(1/2)");
  std::vector<geom::SphericalCap> caps;
  for (const auto& line : lines) {
    const double t = norm(line.foot);
    if (t <= r) continue;
    const double opening = geom::gamma_fn(t) + 2.0 * geom::beta_fn(t);
    caps.push_back(geom::SphericalCap{geom::radial_direction(line.foot), opening});
  }
  return caps;
}

std::vector<geom::SphericalCap> map_caps_scaled(
    const std::vector<geom::OrientedLine>& lines, double c, TiltChoice tilt) {
  if (!(c > 0.0)) throw std::invalid_argument("map_caps_scaled: c must be positive");
  const double pi = 3.14159265358979323846;
  const double gamma_cut = pi / std::max(c, 2.0);
  std::vector<geom::SphericalCap> caps;
  for (const auto& line : lines) {
    const double t = norm(line.foot);
    const double g = geom::gamma_fn(t);
    if (!(g < gamma_cut)) continue;
    double f = 0.0;
    if (tilt == TiltChoice::kShadowCenter)
      f = geom::gamma_fn(geom::a_func(t) * t);
    const Vec pr = geom::radial_direction(line.foot);
    Vec center = std::cos(f) * pr + std::sin(f) * line.normal;
    center = (1.0 / norm(center)) * center;
    caps.push_back(geom::SphericalCap{center, c * g});
  }
  return caps;
}

BallConfig band_filter(const BallConfig& config, double M, int n) {
  if (!(M > 1.0)) throw std::invalid_argument("band_filter: M must exceed 1");
  const double lo = std::pow(M, -n);
  const double hi = std::pow(M, -(n - 1));
  BallConfig out{config.spec, {}};
  for (const auto& ball : config.balls) {
    if (ball.radius > lo && ball.radius <= hi) out.balls.push_back(ball);
  }
  return out;
}

}  // namespace hypercyl::sampler
