#pragma once

// Poisson samplers for the three random geometries used here: chordal lines
// of the unit ball with a radius window, spherical caps on the boundary
// sphere with a power-law-in-cotangent radius band, and Euclidean balls in a
// box window with truncated power-law radii.  All samplers draw radii before
// positions for each item and emit their output sorted by a canonical key so
// results are reproducible independent of any later parallel scheduling.

#include <vector>

#include "hypercyl/geom.hpp"
#include "hypercyl/rng.hpp"

namespace hypercyl::sampler {

// Lines whose closest approach to the origin is below h_max (geodesic
// distance in the ball metric).
struct LineWindow {
  int dim = 3;
  double h_max = 1.0;

  LineWindow(int d, double h);
};

// Boundary-cap process: density in the radius variable proportional to
// cos^(d-2)(a/c) / sin^d(a/c) per unit solid angle, restricted to
// [alpha_min, alpha_max].
struct CapProcessSpec {
  int dim = 3;
  double c = 1.0;
  double alpha_min = 0.0;
  double alpha_max = 0.0;

  CapProcessSpec(int d, double c_in, double a_lo, double a_hi);
};

struct EuclideanBall {
  Vec center;
  double radius = 0.0;
};

// Ball process in a box window: radius density r^(-exponent) on
// (r_min, r_max].
struct BallProcessSpec {
  int dim = 2;
  Box window;
  double r_min = 0.0;
  double r_max = 0.0;
  double exponent = 0.0;

  BallProcessSpec(int d, Box win, double rmin, double rmax, double expo);
};

struct BallConfig {
  BallProcessSpec spec;
  std::vector<EuclideanBall> balls;
};

// ---- intensity bookkeeping (mean counts per unit process intensity) ----

// Measure of the set of lines meeting the central ball of radius h_max.
double line_window_mass(const LineWindow& window);

// Integral of the cap radius density over the band, per unit solid angle.
double cap_band_mass(const CapProcessSpec& spec);

// CDF of the cap radius distribution on [alpha_min, alpha_max].
double cap_radius_cdf(const CapProcessSpec& spec, double alpha);

// Integral of r^(-exponent) over (r_min, r_max].
double ball_radius_integral(const BallProcessSpec& spec);

// CDF of the ball radius distribution on (r_min, r_max].
double ball_radius_cdf(const BallProcessSpec& spec, double r);

double ball_count_mean(double lambda, const BallProcessSpec& spec);

// ---- samplers ----

// Single-item draws against an explicit stream (the bulk samplers below and
// the audit/test fixtures share these so they agree draw for draw).
geom::OrientedLine sample_one_line(const LineWindow& window,
                                   rng::Stream& stream);
geom::SphericalCap sample_one_cap(const CapProcessSpec& spec,
                                  rng::Stream& stream);
EuclideanBall sample_one_ball(const BallProcessSpec& spec,
                              rng::Stream& stream);

std::vector<geom::OrientedLine> sample_lines(double lambda,
                                             const LineWindow& window,
                                             Seed seed);

std::vector<geom::SphericalCap> sample_caps_direct(double lambda,
                                                   const CapProcessSpec& spec,
                                                   Seed seed);

BallConfig sample_balls(double lambda, const BallProcessSpec& spec, Seed seed);

// ---- deterministic maps from line configurations to cap configurations ----
// These preserve input order and length unless stated otherwise.

// Each line maps to its endpoint shadow: the cap centred between the two
// ideal endpoints of the fattened line, spanning exactly its boundary trace.
std::vector<geom::SphericalCap> map_caps_minus(
    const std::vector<geom::OrientedLine>& lines);

// Covering map for feet outside radius r: cap around the radial direction of
// the foot, opening gamma + 2*beta.  Drops lines with ||foot|| <= r.
// Requires r >= tanh(1/2), the radius above which the opening stays below pi.
std::vector<geom::SphericalCap> map_caps_plus(
    const std::vector<geom::OrientedLine>& lines, double r);

enum class TiltChoice {
  kShadowCenter,  // tilt angle matches the endpoint-shadow center
  kRadial,        // no tilt: cap centred on the radial direction of the foot
};

// Scaled-opening map: keeps lines whose half-opening gamma is below
// pi / max(c, 2), emits caps of radius c * gamma with the selected tilt.
std::vector<geom::SphericalCap> map_caps_scaled(
    const std::vector<geom::OrientedLine>& lines, double c, TiltChoice tilt);

// Keep balls with radius in (M^-n, M^-(n-1)].
BallConfig band_filter(const BallConfig& config, double M, int n);

}  // namespace hypercyl::sampler
