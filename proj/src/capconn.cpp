#include "hypercyl/capconn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "hypercyl/unionfind.hpp"

namespace hypercyl::capconn {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec random_unit(int d, rng::Stream& stream) {
  for (;;) {
    Vec g(d);
    for (int i = 0; i < d; ++i) g[i] = stream.gauss();
    double n = norm(g);
    if (n > 1e-8) return (1.0 / n) * g;
  }
}

// Spatial hash key for grid cell lookup; collisions only widen candidate
// lists, never lose points, since every candidate is distance-checked.
uint64_t cell_key(const Vec& p, double cell, int d) {
  uint64_t h = 1469598103934665603ULL;
  for (int i = 0; i < d; ++i) {
    auto idx = static_cast<int64_t>(std::floor((p[i] + 1.5) / cell));
    for (int b = 0; b < 8; ++b) {
      h ^= static_cast<uint64_t>((idx >> (8 * b)) & 0xff);
      h *= 1099511628211ULL;
    }
  }
  return h;
}

uint64_t offset_key(const Vec& p, double cell, int d, const int* off) {
  Vec q = p;
  for (int i = 0; i < d; ++i) q[i] += off[i] * cell;
  return cell_key(q, cell, d);
}

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on the
// Legendre recurrence.
struct Quadrature {
  std::vector<double> node, weight;
};

Quadrature gauss_legendre(int n) {
  Quadrature q;
  q.node.resize(n);
  q.weight.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.node[i] = -x;
    q.node[n - 1 - i] = x;
    q.weight[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    q.weight[n - 1 - i] = q.weight[i];
  }
  return q;
}

}  // namespace

double sphere_dist(const Vec& u, const Vec& v) {
  // Half-chord form: accurate for nearby points, adequate near antipodes.
  double half = 0.5 * norm(u - v);
  return 2.0 * std::asin(std::min(1.0, half));
}

bool caps_intersect(const geom::SphericalCap& a, const geom::SphericalCap& b) {
  if (a.center.dim() != b.center.dim())
    throw std::invalid_argument("caps_intersect: dimension mismatch");
  const double sum = a.radius + b.radius;
  if (sum > kPi) return true;
  return sphere_dist(a.center, b.center) < sum;
}

Components connected_components(const CapConfig& cfg) {
  const auto n = cfg.caps.size();
  UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (caps_intersect(cfg.caps[i], cfg.caps[j])) uf.unite(i, j);

  Components out;
  out.label.assign(n, -1);
  std::vector<int> id_of_root(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = uf.find(i);
    if (id_of_root[r] < 0) id_of_root[r] = out.count++;
    out.label[i] = id_of_root[r];
  }
  return out;
}

SphereNet build_net(int n, int dim, Seed seed,
                    int max_consecutive_rejections) {
  if (n < 1) throw std::invalid_argument("build_net: level must be >= 1");
  if (dim < 2 || dim > 8)
    throw std::invalid_argument("build_net: dim out of range");
  if (max_consecutive_rejections < 1)
    throw std::invalid_argument("build_net: rejection budget must be >= 1");

  SphereNet net;
  net.level = n;
  net.min_separation = std::pow(2.0, -n);
  const double chord = 2.0 * std::sin(net.min_separation / 2.0);

  auto stream = stream_for(seed, "capconn.net");
  std::unordered_map<uint64_t, std::vector<uint32_t>> grid;
  std::vector<int> off(dim, 0);

  int consecutive = 0;
  long long attempts = 0;
  const long long attempt_cap = 50000000;
  while (consecutive < max_consecutive_rejections && attempts < attempt_cap) {
    ++attempts;
    Vec p = random_unit(dim, stream);
    bool ok = true;
    // Scan the 3^dim neighbourhood of p's grid cell.
    std::fill(off.begin(), off.end(), -1);
    for (;;) {
      auto it = grid.find(offset_key(p, chord, dim, off.data()));
      if (it != grid.end()) {
        for (uint32_t idx : it->second) {
          if (norm(p - net.points[idx]) < chord) {
            ok = false;
            break;
          }
        }
      }
      if (!ok) break;
      int axis = 0;
      while (axis < dim && off[axis] == 1) off[axis++] = -1;
      if (axis == dim) break;
      ++off[axis];
    }
    if (ok) {
      grid[cell_key(p, chord, dim)].push_back(
          static_cast<uint32_t>(net.points.size()));
      net.points.push_back(p);
      consecutive = 0;
    } else {
      ++consecutive;
    }
  }
  net.saturated = consecutive >= max_consecutive_rejections;
  return net;
}

CoverageResult coverage_certificate(const CapConfig& cfg,
                                    const SphereNet& net) {
  CoverageResult out;
  for (const auto& cap : cfg.caps) {
    if (cap.radius >= kPi) {  // whole sphere: certifies every point
      out.covered = true;
      return out;
    }
  }

  // Pre-sort cap indices by decreasing certified radius so the scan over a
  // point usually terminates on the first few caps.
  std::vector<std::size_t> order(cfg.caps.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cfg.caps[a].radius > cfg.caps[b].radius;
  });

  std::vector<double> cos_margin(cfg.caps.size());
  for (std::size_t i = 0; i < cfg.caps.size(); ++i) {
    double m = cfg.caps[i].radius - net.min_separation;
    cos_margin[i] = (m <= 0.0) ? 2.0 : std::cos(m);  // 2.0: can never certify
  }

  for (const auto& x : net.points) {
    bool hit = false;
    for (std::size_t i : order) {
      if (cos_margin[i] > 1.0) break;  // sorted: the rest are smaller still
      if (dot(x, cfg.caps[i].center) >= cos_margin[i]) {
        hit = true;
        break;
      }
    }
    if (!hit) out.witnesses.push_back(x);
  }
  out.covered = out.witnesses.empty();
  return out;
}

double pointwise_cover_fraction(const CapConfig& cfg,
                                const std::vector<Vec>& probes) {
  if (probes.empty()) return 1.0;
  std::size_t covered = 0;
  for (const auto& p : probes) {
    for (const auto& cap : cfg.caps) {
      if (cap.contains(p)) {
        ++covered;
        break;
      }
    }
  }
  return static_cast<double>(covered) / static_cast<double>(probes.size());
}

double window_constant(int d) {
  if (d < 2) throw std::invalid_argument("window_constant: d must be >= 2");
  return 1.0 / (2.0 * std::sqrt(2.0 * (d - 1)));
}

sampler::EuclideanBall project_cap_vert(const geom::SphericalCap& cap) {
  const int d = cap.center.dim();
  if (!(cap.center[d - 1] > 0.0))
    throw std::domain_error("project_cap_vert: center not in open upper hemisphere");
  Vec c(d - 1);
  for (int i = 0; i < d - 1; ++i) c[i] = cap.center[i];
  return sampler::EuclideanBall{c, cap.radius};
}

bool ball_disjoint_from_box(const sampler::EuclideanBall& ball,
                            double half_width) {
  double dist2 = 0.0;
  for (int i = 0; i < ball.center.dim(); ++i) {
    double gap = std::abs(ball.center[i]) - half_width;
    if (gap > 0.0) dist2 += gap * gap;
  }
  return dist2 > ball.radius * ball.radius;
}

double spherical_area_factor(const Box& A) {
  const int k = A.lo.dim();
  double corner2 = 0.0;
  for (int i = 0; i < k; ++i) {
    double m = std::max(std::abs(A.lo[i]), std::abs(A.hi[i]));
    corner2 += m * m;
  }
  if (!(corner2 < 1.0))
    throw std::domain_error("spherical_area_factor: box leaves the unit ball");

  const int points = (k <= 2) ? 48 : (k == 3 ? 16 : 8);
  static const Quadrature q48 = gauss_legendre(48);
  static const Quadrature q16 = gauss_legendre(16);
  static const Quadrature q8 = gauss_legendre(8);
  const Quadrature& q = (points == 48) ? q48 : (points == 16 ? q16 : q8);

  // Tensor-product quadrature via an odometer over the k axes.
  std::vector<int> idx(k, 0);
  Vec mid(k), half(k);
  for (int i = 0; i < k; ++i) {
    mid[i] = 0.5 * (A.lo[i] + A.hi[i]);
    half[i] = 0.5 * (A.hi[i] - A.lo[i]);
  }
  double total = 0.0;
  for (;;) {
    double w = 1.0, r2 = 0.0;
    for (int i = 0; i < k; ++i) {
      double x = mid[i] + half[i] * q.node[idx[i]];
      w *= half[i] * q.weight[idx[i]];
      r2 += x * x;
    }
    total += w / std::sqrt(1.0 - r2);
    int axis = 0;
    while (axis < k && idx[axis] == points - 1) idx[axis++] = 0;
    if (axis == k) break;
    ++idx[axis];
  }
  return total;
}

}  // namespace hypercyl::capconn
