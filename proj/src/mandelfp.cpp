#include "hypercyl/mandelfp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "hypercyl/geom.hpp"
#include "hypercyl/unionfind.hpp"

namespace hypercyl::mandelfp {

namespace {

// Flat index <-> coordinates at a given grid side, axis 0 fastest.
int64_t flatten(const std::vector<int64_t>& c, int64_t side) {
  int64_t f = 0;
  for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) f = f * side + c[i];
  return f;
}

void unflatten(int64_t f, int64_t side, std::vector<int64_t>& c) {
  for (auto& x : c) {
    x = f % side;
    f /= side;
  }
}

int64_t ipow(int64_t base, int exp) {
  int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// Given the doubled numerator t of a coordinate q = t / (2 M^n) and a level
// k <= n, lists the level-k box indices containing q along that axis
// (two when q sits on an interior level-k plane, otherwise one).
int axis_boxes(int64_t t, int64_t m_n_minus_k, int64_t side_k, int64_t out[2]) {
  const int64_t denom = 2 * m_n_minus_k;
  if (t % denom == 0) {
    const int64_t v = t / denom;
    if (v == 0) {
      out[0] = 0;
      return 1;
    }
    if (v == side_k) {
      out[0] = side_k - 1;
      return 1;
    }
    out[0] = v - 1;
    out[1] = v;
    return 2;
  }
  out[0] = t / denom;
  return 1;
}

// True iff at level k every box containing the point with doubled numerators
// t (denominator 2 M^n) is discarded.
bool level_blocks_point(const GridLevels& grid, int k, int n,
                        const std::vector<int64_t>& t) {
  const int d = grid.dim;
  const int64_t side_k = ipow(grid.M, k);
  const int64_t m_nk = ipow(grid.M, n - k);
  int64_t cand[8][2];
  int counts[8];
  for (int i = 0; i < d; ++i)
    counts[i] = axis_boxes(t[i], m_nk, side_k, cand[i]);

  const auto& level = grid.discarded[k - 1];
  int pick[8] = {0};
  for (;;) {
    int64_t flat = 0;
    for (int i = d - 1; i >= 0; --i) flat = flat * side_k + cand[i][pick[i]];
    if (!level[flat]) return false;
    int axis = 0;
    while (axis < d && pick[axis] == counts[axis] - 1) pick[axis++] = 0;
    if (axis == d) return true;
    ++pick[axis];
  }
}

bool any_level_blocks(const GridLevels& grid, int n,
                      const std::vector<int64_t>& t) {
  for (int k = 1; k <= n; ++k)
    if (level_blocks_point(grid, k, n, t)) return true;
  return false;
}

void check_grid(const GridLevels& grid, int n) {
  if (n < 1 || n > grid.depth)
    throw std::invalid_argument("grid level out of populated range");
  if (grid.dim < 1 || grid.dim > 8)
    throw std::invalid_argument("grid dimension out of range");
}

}  // namespace

int64_t cells_per_level(int M, int dim, int k) {
  int64_t cells = 1;
  for (int i = 0; i < dim * k; ++i) {
    if (cells > (int64_t{1} << 62) / M)
      throw std::overflow_error("cells_per_level: index space overflow");
    cells *= M;
  }
  return cells;
}

FPMarks generate_marks(int M, int n, int dim, Seed seed, int64_t cell_budget) {
  if (M < 2) throw std::invalid_argument("generate_marks: M must be >= 2");
  if (n < 1) throw std::invalid_argument("generate_marks: n must be >= 1");
  if (dim < 1 || dim > 8)
    throw std::invalid_argument("generate_marks: dim out of range");
  int64_t total = 0;
  for (int k = 1; k <= n; ++k) total += cells_per_level(M, dim, k);
  if (total > cell_budget)
    throw std::length_error("generate_marks: cell budget exceeded");

  FPMarks marks;
  marks.M = M;
  marks.dim = dim;
  marks.depth = n;
  auto stream = stream_for(seed, "mandelfp.levels");
  for (int k = 1; k <= n; ++k) {
    std::vector<double> level(static_cast<std::size_t>(cells_per_level(M, dim, k)));
    for (auto& m : level) m = stream.uniform01();
    marks.mark.push_back(std::move(level));
  }
  return marks;
}

FPState threshold_marks(const FPMarks& marks, double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw std::invalid_argument("threshold_marks: p must be in (0,1)");
  FPState fp;
  fp.p = p;
  fp.grid.M = marks.M;
  fp.grid.dim = marks.dim;
  fp.grid.depth = marks.depth;
  for (const auto& level : marks.mark) {
    std::vector<uint8_t> flags(level.size());
    for (std::size_t i = 0; i < level.size(); ++i)
      flags[i] = level[i] < p ? 0 : 1;
    fp.grid.discarded.push_back(std::move(flags));
  }
  return fp;
}

FPState generate_fp(int M, double p, int n, int dim, Seed seed,
                    int64_t cell_budget) {
  if (!(p > 0.0) || !(p < 1.0))
    throw std::invalid_argument("generate_fp: p must be in (0,1)");
  return threshold_marks(generate_marks(M, n, dim, seed, cell_budget), p);
}

std::vector<uint8_t> alive_cells(const GridLevels& grid, int k) {
  check_grid(grid, k);
  const int64_t M = grid.M;
  std::vector<uint8_t> alive;
  for (int level = 1; level <= k; ++level) {
    const auto& disc = grid.discarded[level - 1];
    const int64_t side = ipow(M, level);
    const int64_t side_parent = side / M;
    std::vector<uint8_t> next(disc.size());
    std::vector<int64_t> c(grid.dim);
    for (int64_t f = 0; f < static_cast<int64_t>(disc.size()); ++f) {
      if (disc[f]) continue;
      if (level == 1) {
        next[f] = 1;
        continue;
      }
      unflatten(f, side, c);
      for (auto& x : c) x /= M;
      next[f] = alive[flatten(c, side_parent)];
    }
    alive = std::move(next);
  }
  return alive;
}

int64_t surviving_count(const GridLevels& grid, int k) {
  auto alive = alive_cells(grid, k);
  int64_t count = 0;
  for (uint8_t a : alive) count += a;
  return count;
}

Components complement_components(const GridLevels& grid, int n) {
  check_grid(grid, n);
  const int d = grid.dim;
  const int64_t side = ipow(grid.M, n);
  const auto alive = alive_cells(grid, n);
  const int64_t total = static_cast<int64_t>(alive.size());

  UnionFind uf(static_cast<std::size_t>(total));
  std::vector<int64_t> c(d), cc(d), t(d);
  std::vector<int> off(d, 0);
  for (int64_t f = 0; f < total; ++f) {
    if (alive[f]) continue;
    unflatten(f, side, c);
    // Enumerate neighbour offsets whose first nonzero entry is +1 so each
    // unordered pair is visited once.
    std::fill(off.begin(), off.end(), 0);
    for (;;) {
      int axis = 0;
      while (axis < d && off[axis] == 1) off[axis++] = -1;
      if (axis == d) break;
      ++off[axis];
      int first_nonzero = -1;
      for (int i = d - 1; i >= 0; --i)
        if (off[i] != 0) first_nonzero = i;
      if (first_nonzero < 0 || off[first_nonzero] != 1) continue;

      bool valid = true;
      for (int i = 0; i < d; ++i) {
        cc[i] = c[i] + off[i];
        if (cc[i] < 0 || cc[i] >= side) {
          valid = false;
          break;
        }
      }
      if (!valid) continue;
      const int64_t f2 = flatten(cc, side);
      if (alive[f2]) continue;

      // Canonical contact point in doubled units: centres along shared axes,
      // the common boundary along contact axes.
      for (int i = 0; i < d; ++i) {
        if (off[i] == 0)
          t[i] = 2 * c[i] + 1;
        else if (off[i] == 1)
          t[i] = 2 * (c[i] + 1);
        else
          t[i] = 2 * c[i];
      }
      if (any_level_blocks(grid, n, t)) uf.unite(f, f2);
    }
  }

  Components out;
  out.label.assign(static_cast<std::size_t>(total), -1);
  std::vector<int32_t> id_of_root(static_cast<std::size_t>(total), -1);
  for (int64_t f = 0; f < total; ++f) {
    if (alive[f]) continue;
    std::size_t r = uf.find(static_cast<std::size_t>(f));
    if (id_of_root[r] < 0) id_of_root[r] = out.count++;
    out.label[f] = id_of_root[r];
  }
  return out;
}

SepRegion SepRegion::slab(int axis, int side) {
  SepRegion r;
  r.kind = Kind::kSlab;
  r.axis = axis;
  r.side = side;
  return r;
}

SepRegion SepRegion::annulus() {
  SepRegion r;
  r.kind = Kind::kAnnulus;
  return r;
}

bool separation_event(const GridLevels& grid, const SepRegion& region, int n) {
  check_grid(grid, n);
  if (grid.M % 3 != 0)
    throw std::invalid_argument(
        "separation_event: thirds regions need M divisible by 3");
  const int d = grid.dim;
  const int64_t side = ipow(grid.M, n);
  const int64_t third = side / 3;
  const auto alive = alive_cells(grid, n);
  const int64_t total = static_cast<int64_t>(alive.size());

  auto in_region = [&](const std::vector<int64_t>& c) {
    if (region.kind == SepRegion::Kind::kSlab) {
      return region.side == 0 ? c[region.axis] < third
                              : c[region.axis] >= 2 * third;
    }
    for (int i = 0; i < d; ++i)
      if (c[i] < third || c[i] >= 2 * third) return true;  // outside middle
    return false;
  };

  // Source contact: a vacant cell with a face on the region's outer
  // boundary reaches it (the face centre has one containing box per level,
  // the cell's own ancestor, so vacancy suffices).
  auto is_source = [&](const std::vector<int64_t>& c) {
    if (region.kind == SepRegion::Kind::kSlab)
      return region.side == 0 ? c[region.axis] == 0
                              : c[region.axis] == side - 1;
    for (int i = 0; i < d; ++i)
      if (c[i] == 0 || c[i] == side - 1) return true;
    return false;
  };

  // Destination contact: the face centre on the inner plane must itself lie
  // in the complement, which needs the boxes on both sides of the plane
  // discarded at one common level.
  std::vector<int64_t> t(d);
  auto is_destination = [&](const std::vector<int64_t>& c) {
    if (region.kind == SepRegion::Kind::kSlab) {
      const bool at_plane = region.side == 0 ? c[region.axis] == third - 1
                                             : c[region.axis] == 2 * third;
      if (!at_plane) return false;
      for (int i = 0; i < d; ++i) t[i] = 2 * c[i] + 1;
      t[region.axis] =
          region.side == 0 ? 2 * (c[region.axis] + 1) : 2 * c[region.axis];
      return any_level_blocks(grid, n, t);
    }
    for (int axis = 0; axis < d; ++axis) {
      const bool low_face = c[axis] == third - 1;
      const bool high_face = c[axis] == 2 * third;
      if (!low_face && !high_face) continue;
      bool face_on_cube = true;
      for (int i = 0; i < d; ++i) {
        if (i == axis) continue;
        if (c[i] < third || c[i] >= 2 * third) {
          face_on_cube = false;
          break;
        }
      }
      if (!face_on_cube) continue;
      for (int i = 0; i < d; ++i) t[i] = 2 * c[i] + 1;
      t[axis] = low_face ? 2 * (c[axis] + 1) : 2 * c[axis];
      if (any_level_blocks(grid, n, t)) return true;
    }
    return false;
  };

  UnionFind uf(static_cast<std::size_t>(total));
  std::vector<int64_t> c(d), cc(d), tc(d);
  std::vector<int> off(d, 0);
  std::vector<uint8_t> region_cell(static_cast<std::size_t>(total), 0);
  for (int64_t f = 0; f < total; ++f) {
    unflatten(f, side, c);
    if (in_region(c)) region_cell[f] = 1;
  }

  for (int64_t f = 0; f < total; ++f) {
    if (alive[f] || !region_cell[f]) continue;
    unflatten(f, side, c);
    std::fill(off.begin(), off.end(), 0);
    for (;;) {
      int axis = 0;
      while (axis < d && off[axis] == 1) off[axis++] = -1;
      if (axis == d) break;
      ++off[axis];
      int first_nonzero = -1;
      for (int i = d - 1; i >= 0; --i)
        if (off[i] != 0) first_nonzero = i;
      if (first_nonzero < 0 || off[first_nonzero] != 1) continue;

      bool valid = true;
      for (int i = 0; i < d; ++i) {
        cc[i] = c[i] + off[i];
        if (cc[i] < 0 || cc[i] >= side) {
          valid = false;
          break;
        }
      }
      if (!valid) continue;
      const int64_t f2 = flatten(cc, side);
      if (alive[f2] || !region_cell[f2]) continue;
      for (int i = 0; i < d; ++i) {
        if (off[i] == 0)
          tc[i] = 2 * c[i] + 1;
        else if (off[i] == 1)
          tc[i] = 2 * (c[i] + 1);
        else
          tc[i] = 2 * c[i];
      }
      if (any_level_blocks(grid, n, tc)) uf.unite(f, f2);
    }
  }

  std::vector<uint8_t> root_src(static_cast<std::size_t>(total), 0);
  std::vector<uint8_t> root_dst(static_cast<std::size_t>(total), 0);
  for (int64_t f = 0; f < total; ++f) {
    if (alive[f] || !region_cell[f]) continue;
    unflatten(f, side, c);
    std::size_t r = uf.find(static_cast<std::size_t>(f));
    if (is_source(c)) root_src[r] = 1;
    if (is_destination(c)) root_dst[r] = 1;
  }
  for (int64_t f = 0; f < total; ++f)
    if (root_src[f] && root_dst[f]) return false;  // a crossing exists
  return true;
}

bool point_in_complement(const GridLevels& grid, int max_level, const Vec& q,
                         double snap_tol) {
  check_grid(grid, max_level);
  const int d = grid.dim;
  for (int k = 1; k <= max_level; ++k) {
    const int64_t side_k = ipow(grid.M, k);
    int64_t cand[8][2];
    int counts[8];
    bool in_domain = true;
    for (int i = 0; i < d; ++i) {
      const double v = q[i] * static_cast<double>(side_k);
      if (v < -snap_tol || v > side_k + snap_tol) {
        in_domain = false;
        break;
      }
      const double r = std::round(v);
      if (std::abs(v - r) < snap_tol * side_k) {
        auto vi = static_cast<int64_t>(r);
        if (vi <= 0) {
          cand[i][0] = 0;
          counts[i] = 1;
        } else if (vi >= side_k) {
          cand[i][0] = side_k - 1;
          counts[i] = 1;
        } else {
          cand[i][0] = vi - 1;
          cand[i][1] = vi;
          counts[i] = 2;
        }
      } else {
        cand[i][0] = std::clamp<int64_t>(static_cast<int64_t>(std::floor(v)),
                                         0, side_k - 1);
        counts[i] = 1;
      }
    }
    if (!in_domain) return false;

    const auto& level = grid.discarded[k - 1];
    int pick[8] = {0};
    bool all = true;
    for (;;) {
      int64_t flat = 0;
      for (int i = d - 1; i >= 0; --i) flat = flat * side_k + cand[i][pick[i]];
      if (!level[flat]) {
        all = false;
        break;
      }
      int axis = 0;
      while (axis < d && pick[axis] == counts[axis] - 1) pick[axis++] = 0;
      if (axis == d) break;
      ++pick[axis];
    }
    if (all) return true;
  }
  return false;
}

double minkowski_cube_ball_volume(int d, double side, double r) {
  if (d < 1 || d > 8)
    throw std::invalid_argument("minkowski_cube_ball_volume: bad dimension");
  double total = 0.0;
  double binom = 1.0;
  for (int k = 0; k <= d; ++k) {
    total += binom * unit_ball_volume(k) * std::pow(side, d - k) * std::pow(r, k);
    binom = binom * (d - k) / (k + 1);
  }
  return total;
}

TouchProb touching_measure(int dim, double M, int n, double lambda) {
  if (dim < 1 || dim > 8)
    throw std::invalid_argument("touching_measure: bad dimension");
  if (!(M > 1.0)) throw std::invalid_argument("touching_measure: M must be > 1");
  const double s = std::pow(M, -n);  // box side; the band is (s, M s]
  const double lo = s, hi = M * s;
  double total = 0.0;
  double binom = 1.0;
  for (int k = 0; k <= dim; ++k) {
    double integral;  // of r^(k - dim - 1) over (lo, hi]
    if (k == dim) {
      integral = std::log(hi / lo);
    } else {
      integral =
          (std::pow(lo, k - dim) - std::pow(hi, k - dim)) / (dim - k);
    }
    total += binom * unit_ball_volume(k) * std::pow(s, dim - k) * integral;
    binom = binom * (dim - k) / (k + 1);
  }
  TouchProb prob;
  prob.measure = lambda * total;
  prob.touched = -std::expm1(-prob.measure);
  prob.untouched = std::exp(-prob.measure);
  return prob;
}

CoupledFPState couple_from_balls(const sampler::BallConfig& cfg, int M, int n,
                                 int64_t cell_budget) {
  if (M < 2) throw std::invalid_argument("couple_from_balls: M must be >= 2");
  if (n < 1) throw std::invalid_argument("couple_from_balls: n must be >= 1");
  const int d = cfg.spec.dim;
  if (cfg.spec.r_max > 1.0 + 1e-12)
    throw std::invalid_argument("couple_from_balls: radii must not exceed 1");
  const double pad = cfg.spec.r_max;
  for (int i = 0; i < d; ++i) {
    if (cfg.spec.window.lo[i] > -pad || cfg.spec.window.hi[i] < 1.0 + pad)
      throw std::invalid_argument(
          "couple_from_balls: window must pad [0,1]^d by r_max");
  }
  int64_t total = 0;
  for (int k = 1; k <= n; ++k) total += cells_per_level(M, d, k);
  if (total > cell_budget)
    throw std::length_error("couple_from_balls: cell budget exceeded");

  CoupledFPState coupled;
  coupled.grid.M = M;
  coupled.grid.dim = d;
  coupled.grid.depth = n;

  std::vector<int64_t> lo_idx(d), hi_idx(d), c(d);
  for (int k = 1; k <= n; ++k) {
    const int64_t side = ipow(M, k);
    const double band_lo = std::pow(static_cast<double>(M), -k);
    const double band_hi = std::pow(static_cast<double>(M), -(k - 1));
    std::vector<uint8_t> touched(static_cast<std::size_t>(cells_per_level(M, d, k)), 0);
    const double cell = 1.0 / static_cast<double>(side);

    for (const auto& ball : cfg.balls) {
      if (!(ball.radius > band_lo && ball.radius <= band_hi)) continue;
      bool in_range = true;
      for (int i = 0; i < d; ++i) {
        lo_idx[i] = std::clamp<int64_t>(
            static_cast<int64_t>(std::floor((ball.center[i] - ball.radius) / cell)),
            0, side - 1);
        hi_idx[i] = std::clamp<int64_t>(
            static_cast<int64_t>(std::floor((ball.center[i] + ball.radius) / cell)),
            0, side - 1);
        if (ball.center[i] + ball.radius < 0.0 ||
            ball.center[i] - ball.radius > 1.0)
          in_range = false;
      }
      if (!in_range) continue;
      c = lo_idx;
      for (;;) {
        double dist2 = 0.0;
        for (int i = 0; i < d; ++i) {
          const double blo = c[i] * cell, bhi = (c[i] + 1) * cell;
          double gap = 0.0;
          if (ball.center[i] < blo)
            gap = blo - ball.center[i];
          else if (ball.center[i] > bhi)
            gap = ball.center[i] - bhi;
          dist2 += gap * gap;
        }
        if (dist2 < ball.radius * ball.radius)
          touched[flatten(c, side)] = 1;
        int axis = 0;
        while (axis < d && c[axis] == hi_idx[axis]) c[axis] = lo_idx[axis], ++axis;
        if (axis == d) break;
        ++c[axis];
      }
    }
    coupled.grid.discarded.push_back(std::move(touched));
  }
  return coupled;
}

void write_pgm(std::ostream& os, const GridLevels& grid, int n) {
  check_grid(grid, n);
  if (grid.dim != 2)
    throw std::invalid_argument("write_pgm: only 2-dimensional grids");
  const int64_t side = ipow(grid.M, n);
  const auto comps = complement_components(grid, n);
  os << "P5\n" << side << " " << side << "\n255\n";
  std::vector<int64_t> c(2);
  for (int64_t y = 0; y < side; ++y) {
    for (int64_t x = 0; x < side; ++x) {
      c[0] = x;
      c[1] = y;
      const int32_t label = comps.label[flatten(c, side)];
      unsigned char byte = 255;
      if (label >= 0)
        byte = static_cast<unsigned char>(
            10 + (static_cast<uint32_t>(label) * 2654435761u) % 230);
      os.put(static_cast<char>(byte));
    }
  }
}

}  // namespace hypercyl::mandelfp
