#pragma once

// Euclidean ball process analysis: annulus crossings by chains of overlapping
// balls, bounded-origin-cluster evidence from independent annuli, the
// rescale-and-delete distributional check, and intensity scans with a shared
// thinning coupling (estimates exactly monotone per replicate).

#include <functional>
#include <vector>

#include "hypercyl/rng.hpp"
#include "hypercyl/sampler.hpp"
#include "hypercyl/stats.hpp"

namespace hypercyl::fracball {

// The region [-b, b]^d minus the open box (-a, a)^d.
struct Annulus {
  double a = 1.0;
  double b = 3.0;

  Annulus(double a_in, double b_in);
};

// True iff the point lies in some open ball of the configuration.
bool point_covered(const sampler::BallConfig& cfg, const Vec& p);

// True iff a connected chain of overlapping open balls meets both the inner
// box surface and the outer box surface.  Requires the sampling window to
// contain [-(b + 2 r_max), b + 2 r_max]^d so no relevant ball is truncated.
bool crossing(const sampler::BallConfig& cfg, const Annulus& ann);

// Checks the annuli A(3^(2n), 3^(2n+1)) for n = 0..K-1 against configurations
// supplied by the generator (one independent configuration per annulus);
// true iff at least one crossing fails.
bool origin_cluster_bounded(
    const std::function<sampler::BallConfig(int)>& generator, int K);

struct ScaleTestReport {
  double count_p = 0.0;
  double ks_p = 0.0;
  bool pass = false;
  uint64_t mapped_count = 0;
  uint64_t fresh_count = 0;
};

// Samples the process, rescales every ball by 1/a, deletes balls grown past
// the radius cap, and compares count and radius law against fresh samples on
// the matched window.  Passes when both p-values exceed 0.01; the law match
// is exact only for exponent d+1.
ScaleTestReport scale_invariance_test(double lambda, double a,
                                      const sampler::BallProcessSpec& spec,
                                      int replicates, Seed seed);

struct ScanRow {
  double lambda = 0.0;
  double estimate = 0.0;
  stats::Interval ci{0.0, 0.0};
  int replicates = 0;
};

// Crossing frequency across an ascending intensity grid.  All grid points
// share one realization per replicate via uniform thinning marks, so the
// per-replicate crossing indicators are monotone in lambda by construction.
std::vector<ScanRow> crossing_scan(const std::vector<double>& grid,
                                   const Annulus& ann,
                                   const sampler::BallProcessSpec& spec,
                                   int replicates, Seed seed);

}  // namespace hypercyl::fracball
