#include "hypercyl/fracball.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

#include "hypercyl/unionfind.hpp"

namespace hypercyl::fracball {

namespace {

uint64_t cell_key(const Vec& p, double cell, int d) {
  uint64_t h = 1469598103934665603ULL;
  for (int i = 0; i < d; ++i) {
    auto idx = static_cast<int64_t>(std::floor(p[i] / cell));
    for (int b = 0; b < 8; ++b) {
      h ^= static_cast<uint64_t>((idx >> (8 * b)) & 0xff);
      h *= 1099511628211ULL;
    }
  }
  return h;
}

// Distance from a point to the surface of the box [-a, a]^d: from inside,
// the gap to the nearest face; from outside, the distance to the box.
double dist_to_box_surface(const Vec& p, double a) {
  double inf_norm = 0.0;
  double out2 = 0.0;
  for (int i = 0; i < p.dim(); ++i) {
    inf_norm = std::max(inf_norm, std::abs(p[i]));
    double gap = std::abs(p[i]) - a;
    if (gap > 0.0) out2 += gap * gap;
  }
  if (inf_norm <= a) return a - inf_norm;
  return std::sqrt(out2);
}

}  // namespace

Annulus::Annulus(double a_in, double b_in) : a(a_in), b(b_in) {
  if (!(a > 0.0) || !(a < b) || !std::isfinite(b))
    throw std::invalid_argument("Annulus: need 0 < a < b");
}

bool point_covered(const sampler::BallConfig& cfg, const Vec& p) {
  for (const auto& ball : cfg.balls) {
    if (dist(p, ball.center) < ball.radius) return true;
  }
  return false;
}

bool crossing(const sampler::BallConfig& cfg, const Annulus& ann) {
  const int d = cfg.spec.dim;
  const double reach = ann.b + 2.0 * cfg.spec.r_max;
  for (int i = 0; i < d; ++i) {
    if (cfg.spec.window.lo[i] > -reach || cfg.spec.window.hi[i] < reach)
      throw std::invalid_argument("crossing: window smaller than b + 2 r_max");
  }

  const auto n = cfg.balls.size();
  if (n == 0) return false;

  // Overlap graph through a spatial hash; cell edge 2 r_max bounds the
  // largest possible overlap distance, so neighbours sit in adjacent cells.
  const double cell = 2.0 * cfg.spec.r_max;
  std::unordered_map<uint64_t, std::vector<uint32_t>> grid;
  grid.reserve(n * 2);
  for (std::size_t i = 0; i < n; ++i)
    grid[cell_key(cfg.balls[i].center, cell, d)].push_back(
        static_cast<uint32_t>(i));

  UnionFind uf(n);
  std::vector<int> off(d, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& bi = cfg.balls[i];
    std::fill(off.begin(), off.end(), -1);
    for (;;) {
      Vec shifted = bi.center;
      for (int k = 0; k < d; ++k) shifted[k] += off[k] * cell;
      auto it = grid.find(cell_key(shifted, cell, d));
      if (it != grid.end()) {
        for (uint32_t j : it->second) {
          if (j >= i) continue;
          const auto& bj = cfg.balls[j];
          double rsum = bi.radius + bj.radius;
          if (dist(bi.center, bj.center) < rsum) uf.unite(i, j);
        }
      }
      int axis = 0;
      while (axis < d && off[axis] == 1) off[axis++] = -1;
      if (axis == d) break;
      ++off[axis];
    }
  }

  std::vector<uint8_t> meets_inner(n, 0), meets_outer(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t root = uf.find(i);
    const auto& ball = cfg.balls[i];
    if (dist_to_box_surface(ball.center, ann.a) < ball.radius)
      meets_inner[root] = 1;
    if (dist_to_box_surface(ball.center, ann.b) < ball.radius)
      meets_outer[root] = 1;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (meets_inner[i] && meets_outer[i]) return true;
  return false;
}

bool origin_cluster_bounded(
    const std::function<sampler::BallConfig(int)>& generator, int K) {
  for (int level = 0; level < K; ++level) {
    const double a = std::pow(3.0, 2 * level);
    Annulus ann(a, 3.0 * a);
    if (!crossing(generator(level), ann)) return true;
  }
  return false;
}

ScaleTestReport scale_invariance_test(double lambda, double a,
                                      const sampler::BallProcessSpec& spec,
                                      int replicates, Seed seed) {
  if (!(a > 0.0) || !(a <= 1.0))
    throw std::invalid_argument("scale_invariance_test: a must be in (0, 1]");
  if (!(spec.r_min < a * spec.r_max))
    throw std::invalid_argument(
        "scale_invariance_test: deletion removes the whole rescaled band");

  const int d = spec.dim;
  Box scaled_window(
      [&] {
        Vec lo(d), hi(d);
        for (int i = 0; i < d; ++i) {
          lo[i] = spec.window.lo[i] / a;
          hi[i] = spec.window.hi[i] / a;
        }
        return Box{lo, hi};
      }());
  sampler::BallProcessSpec fresh_spec(d, scaled_window, spec.r_min / a,
                                      spec.r_max, spec.exponent);

  ScaleTestReport report;
  std::vector<double> mapped_radii, fresh_radii;
  for (int rep = 0; rep < replicates; ++rep) {
    auto cfg = sampler::sample_balls(lambda, spec,
                                     Seed{seed.value, seed.replicate + 2ull * rep});
    for (const auto& ball : cfg.balls) {
      double r = ball.radius / a;
      if (r > spec.r_max) continue;  // grown past the cap: deleted
      mapped_radii.push_back(r);
      ++report.mapped_count;
    }
    auto fresh = sampler::sample_balls(
        lambda, fresh_spec, Seed{seed.value, seed.replicate + 2ull * rep + 1});
    for (const auto& ball : fresh.balls) {
      fresh_radii.push_back(ball.radius);
      ++report.fresh_count;
    }
  }

  report.count_p =
      stats::poisson_two_sample_p(report.mapped_count, report.fresh_count);
  report.ks_p = stats::ks2_test(mapped_radii, fresh_radii);
  report.pass = report.count_p > 0.01 && report.ks_p > 0.01;
  return report;
}

std::vector<ScanRow> crossing_scan(const std::vector<double>& grid,
                                   const Annulus& ann,
                                   const sampler::BallProcessSpec& spec,
                                   int replicates, Seed seed) {
  if (grid.empty()) return {};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0 || (i > 0 && grid[i] < grid[i - 1]))
      throw std::invalid_argument("crossing_scan: grid must ascend from >= 0");
  }
  const double top = grid.back();

  std::vector<uint64_t> hits(grid.size(), 0);
  for (int rep = 0; rep < replicates; ++rep) {
    sampler::BallConfig full{spec, {}};
    std::vector<double> marks;
    if (top > 0.0) {
      full = sampler::sample_balls(top, spec,
                                   Seed{seed.value, seed.replicate + rep});
      auto mark_stream =
          stream_for(Seed{seed.value, seed.replicate + rep}, "fracball.scan.marks");
      marks.resize(full.balls.size());
      for (auto& m : marks) m = mark_stream.uniform01();
    }
    for (std::size_t g = 0; g < grid.size(); ++g) {
      sampler::BallConfig sub{spec, {}};
      if (top > 0.0) {
        const double keep = grid[g] / top;
        for (std::size_t i = 0; i < full.balls.size(); ++i)
          if (marks[i] < keep) sub.balls.push_back(full.balls[i]);
      }
      if (crossing(sub, ann)) ++hits[g];
    }
  }

  std::vector<ScanRow> rows;
  rows.reserve(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    ScanRow row;
    row.lambda = grid[g];
    row.replicates = replicates;
    row.estimate = replicates > 0
                       ? static_cast<double>(hits[g]) / replicates
                       : 0.0;
    row.ci = stats::wilson95(hits[g], static_cast<uint64_t>(replicates));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hypercyl::fracball
