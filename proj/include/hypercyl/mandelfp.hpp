#pragma once

// Recursive box retention on [0,1]^d to a finite level, exact connectivity of
// the complement of the retained intersection, separation events across
// canonical thirds regions, the touching-measure closed form, and the coupled
// state built from a ball configuration (box discarded iff touched by a ball
// of the matching radius band).

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "hypercyl/rng.hpp"
#include "hypercyl/sampler.hpp"

namespace hypercyl::mandelfp {

// Per-level discard flags for the M-adic box subdivision of [0,1]^d.
// Level k holds M^(k*dim) boxes in row-major order (axis 0 fastest); every
// level carries its own independent decision for every box at that level.
struct GridLevels {
  int M = 3;
  int dim = 2;
  int depth = 0;                                // levels 1..depth populated
  std::vector<std::vector<uint8_t>> discarded;  // [k-1][flat index], 1 = out
};

// Uniform marks underlying a retention state; thresholding the same marks at
// several retention probabilities yields a monotone coupling.
struct FPMarks {
  int M = 3;
  int dim = 2;
  int depth = 0;
  std::vector<std::vector<double>> mark;
};

struct FPState {
  GridLevels grid;
  double p = 0.0;
};

struct CoupledFPState {
  GridLevels grid;
};

// M^(k*dim), guarded against int64 overflow.
int64_t cells_per_level(int M, int dim, int k);

FPMarks generate_marks(int M, int n, int dim, Seed seed,
                       int64_t cell_budget = 100000000);

// Box retained iff its mark < p.
FPState threshold_marks(const FPMarks& marks, double p);

// One independent uniform decision per (level, box); equivalent to
// threshold_marks(generate_marks(...), p) draw for draw.
FPState generate_fp(int M, double p, int n, int dim, Seed seed,
                    int64_t cell_budget = 100000000);

// Level-k boxes retained at every level 1..k along their ancestor chain.
int64_t surviving_count(const GridLevels& grid, int k);

// Retained-at-all-levels flag per level-k box.
std::vector<uint8_t> alive_cells(const GridLevels& grid, int k);

struct Components {
  std::vector<int32_t> label;  // per level-n cell; -1 = not vacant
  int count = 0;
};

// A level-n cell is vacant iff any of its ancestors (itself included) is
// discarded.  Two vacant cells sharing a boundary point are connected iff at
// some single level every box containing the canonical contact point is
// discarded; this reproduces the open-set connectivity of the complement at
// resolution n exactly (see tests for the dense-probe cross-check).
Components complement_components(const GridLevels& grid, int n);

// Canonical thirds regions: the 2d slabs and the box annulus.
struct SepRegion {
  enum class Kind { kSlab, kAnnulus };
  Kind kind = Kind::kAnnulus;
  int axis = 0;  // slab only: the short direction
  int side = 0;  // slab only: 0 -> [0,1/3], 1 -> [2/3,1]

  static SepRegion slab(int axis, int side);
  static SepRegion annulus();
};

// True iff no complement component joins the region's two designated
// boundaries (slab: the two short-direction faces; annulus: inner and outer
// box boundaries).  Requires M divisible by 3 so the thirds align with the
// grid.
bool separation_event(const GridLevels& grid, const SepRegion& region, int n);

// Complement membership of an arbitrary point at resolution max_level:
// true iff at some level k <= max_level every box containing q is discarded.
// Coordinates within snap_tol of a grid plane count as lying on it.
bool point_in_complement(const GridLevels& grid, int max_level, const Vec& q,
                         double snap_tol = 1e-9);

struct TouchProb {
  double measure = 0.0;    // mean number of band balls touching one box
  double touched = 0.0;    // 1 - exp(-measure)
  double untouched = 0.0;  // exp(-measure)
};

// Volume of the Minkowski sum of an axis cube of the given side with a ball
// of radius r (Steiner polynomial).
double minkowski_cube_ball_volume(int d, double side, double r);

// Mean number of balls with radius in (M^-n, M^-(n-1)] touching a fixed
// level-n box, for radius density lambda * r^-(d+1); the value is
// independent of n up to rounding.
TouchProb touching_measure(int dim, double M, int n, double lambda);

// Level-k box discarded iff some ball with radius in (M^-k, M^-(k-1)]
// intersects the closed box.  Requires r_max <= 1 and the window to pad
// [0,1]^d by r_max on every side.
CoupledFPState couple_from_balls(const sampler::BallConfig& cfg, int M, int n,
                                 int64_t cell_budget = 100000000);

// Binary graymap of the level-n grid (d = 2 only): retained cells white,
// vacant cells shaded by a hash of their component id.
void write_pgm(std::ostream& os, const GridLevels& grid, int n);

}  // namespace hypercyl::mandelfp
