// Acceptance gate for the library: thirteen end-to-end criteria, one
// [PASS]/[FAIL] line each, nonzero exit when anything fails.  Statistical
// checks run on fixed seeds with tolerances set from the stated error
// budgets (4-sigma counts, p > 0.01 KS, 3-sigma frequencies), so a green
// run is reproducible bit-for-bit.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hypercyl/capconn.hpp"
#include "hypercyl/fracball.hpp"
#include "hypercyl/geom.hpp"
#include "hypercyl/mandelfp.hpp"
#include "hypercyl/report.hpp"
#include "hypercyl/rng.hpp"
#include "hypercyl/sampler.hpp"
#include "hypercyl/stats.hpp"
#include "hypercyl/suites.hpp"
#include "oracles.hpp"

namespace hc = hypercyl;
using hc::Box;
using hc::Seed;
using hc::Vec;

namespace {

const double kPi = 3.14159265358979323846;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double secs_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Small helpers: suite driving, CSV re-reading, formatting
// ---------------------------------------------------------------------------

// Suites narrate to stdout; keep the acceptance log to one line per
// criterion by swallowing that chatter.
struct CoutCapture {
  std::streambuf* old;
  std::ostringstream buf;
  CoutCapture() : old(std::cout.rdbuf(buf.rdbuf())) {}
  ~CoutCapture() { std::cout.rdbuf(old); }
};

int run_suite_quiet(const std::string& name, const std::string& cfg_text,
                    uint64_t seed, int workers, const std::string& out_dir) {
  const auto cfg = hc::report::ExperimentConfig::parse(cfg_text);
  hc::suites::SuiteOptions opts;
  opts.seed = seed;
  opts.workers = workers;
  opts.out_dir = out_dir;
  CoutCapture capture;
  return hc::suites::run_suite(name, cfg, opts);
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("missing output file: " + path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

struct Csv {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return static_cast<int>(i);
    throw std::runtime_error("CSV column not found: " + name);
  }
  double num(size_t row, const std::string& name) const {
    return std::stod(rows[row][col(name)]);
  }
};

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

Csv read_csv(const fs::path& path) {
  Csv csv;
  std::istringstream is(read_file(path));
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (csv.columns.empty())
      csv.columns = split_fields(line);
    else
      csv.rows.push_back(split_fields(line));
  }
  return csv;
}

// CSV text with the trailing timing field removed from every table line,
// for byte comparison across runs.
std::string strip_timing(const std::string& text) {
  std::istringstream is(text);
  std::ostringstream os;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] != '#') {
      const auto pos = line.rfind(',');
      if (pos != std::string::npos) line.erase(pos);
    }
    os << line << '\n';
  }
  return os.str();
}

std::string fmt(double x, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << x;
  return os.str();
}

// ---------------------------------------------------------------------------
// 1. Scalar identities of the aperture/endcap functions
// ---------------------------------------------------------------------------

bool crit_identities(std::string& detail) {
  const auto t0 = Clock::now();
  const int rc = run_suite_quiet("identity-suite", "", 41, 1,
                                 "acceptance-out/c01-identity");
  const double suite_secs = secs_since(t0);

  double e_cot = 0.0, e_beta = 0.0, e_root = 0.0;
  const Vec origin(3);
  for (int i = 0; i < 1000; ++i) {
    const double t = (i + 0.5) / 1000.0;
    const double g = hc::geom::gamma_fn(t);
    const double h =
        hc::geom::hyp_dist(hc::geom::BallPoint(origin),
                           hc::geom::BallPoint(Vec{t, 0.0, 0.0}));
    e_cot = std::max(e_cot, std::abs(std::cos(g) / std::sin(g) - std::sinh(h)));
    e_beta = std::max(e_beta, std::abs(hc::geom::beta_fn(t) -
                                       hc::geom::beta_via_h(
                                           hc::geom::hyp_dist_from_radius(t))));
    const double a = hc::geom::a_func(t);
    e_root = std::max(
        e_root,
        std::abs(a * a * t * t + a * std::cosh(1.0) * (1.0 - t * t) - 1.0));
  }
  const double e_zero =
      std::abs(hc::geom::beta_fn(0.0) - std::acos(1.0 / std::cosh(1.0)));
  const double e_frozen = std::abs(hc::geom::beta_fn(0.0) - oracle::kBetaZero);

  const bool ok = rc == 0 && suite_secs < 5.0 && e_cot <= 1e-10 &&
                  e_beta <= 1e-10 && e_root <= 1e-10 && e_zero <= 1e-12 &&
                  e_frozen <= 1e-12;
  detail = "suite rc=" + std::to_string(rc) + " in " + fmt(suite_secs, 3) +
           "s; max errs cot=" + fmt(e_cot, 3) + " param=" + fmt(e_beta, 3) +
           " root=" + fmt(e_root, 3) + " zero=" + fmt(e_zero, 3);
  return ok;
}

// ---------------------------------------------------------------------------
// 2. The endcap/aperture ratio stays inside its closed band and attains
//    both endpoints in the limits.
// ---------------------------------------------------------------------------

bool crit_ratio_band(std::string& detail) {
  const double lo = oracle::kRatioLo;  // (2/pi) arccos(1/cosh 1)
  const double hi = oracle::kSinh1;
  double worst_low = 1e300, worst_high = -1e300;
  auto probe = [&](double t) {
    const double r = hc::geom::beta_fn(t) / hc::geom::gamma_fn(t);
    worst_low = std::min(worst_low, r);
    worst_high = std::max(worst_high, r);
  };
  for (int i = 0; i < 1000; ++i) probe((i + 0.5) / 1000.0);
  for (int j = 0; j < 200; ++j) probe(std::pow(10.0, -9.0 + 6.0 * j / 199.0));

  const double at_zero =
      std::abs(hc::geom::beta_fn(1e-8) / hc::geom::gamma_fn(1e-8) - lo);
  const double at_inf =
      std::abs(hc::geom::beta_via_h(20.0) / hc::geom::gamma_tilde(20.0) - hi);

  const bool ok = worst_low >= lo - 1e-9 && worst_high <= hi + 1e-9 &&
                  at_zero <= 1e-6 && at_inf <= 1e-6;
  detail = "ratio in [" + fmt(worst_low, 12) + ", " + fmt(worst_high, 12) +
           "] vs [" + fmt(lo, 12) + ", " + fmt(hi, 12) +
           "]; attain err " + fmt(at_zero, 3) + " / " + fmt(at_inf, 3);
  return ok;
}

// ---------------------------------------------------------------------------
// 3. The endcap is the exact forward-endpoint trace of the line bundle:
//    interior feet land strictly inside, the unit-distance rim attains the
//    advertised angular radius.
// ---------------------------------------------------------------------------

Vec bundle_forward(const hc::geom::OrientedLine& L,
                   const hc::geom::HyperboloidPoint& X,
                   const std::vector<Vec>& basis, double c0, double c1,
                   double rho) {
  Vec E = c0 * basis[0] + c1 * basis[1];
  const double nm = std::sqrt(std::max(1e-300, -hc::geom::minkowski_dot(E, E)));
  E = (1.0 / nm) * E;
  const auto Y = hc::geom::geodesic_point(X, E, rho);
  const hc::geom::OrientedLine moved(L.normal, hc::geom::drop(Y).coords());
  return hc::geom::endpoints(moved).forward;
}

bool crit_endcap_trace(std::string& detail) {
  const hc::sampler::LineWindow window(3, 2.0);
  auto stream = hc::stream_for(Seed{4303, 0}, "test.acceptance");

  std::vector<hc::geom::OrientedLine> lines;
  lines.emplace_back(Vec{1.0, 0.0, 0.0}, Vec(3));             // foot at origin
  lines.emplace_back(Vec{1.0, 0.0, 0.0}, Vec{0.0, 0.995, 0.0});  // near rim
  for (int i = 0; i < 98; ++i)
    lines.push_back(hc::sampler::sample_one_line(window, stream));

  long long violations = 0;
  double worst_gap = 1e300;
  for (const auto& L : lines) {
    const auto cap = hc::geom::endcap(L);
    const auto X = hc::geom::lift(hc::geom::BallPoint(L.foot));
    const auto basis =
        hc::geom::hyperplane_tangent_basis(X, hc::geom::lift_normal(L.normal));
    for (int j = 0; j < 1000; ++j) {
      const double psi = 2.0 * kPi * stream.uniform01();
      const double rho = stream.uniform01();
      const Vec fwd = bundle_forward(L, X, basis, std::cos(psi), std::sin(psi),
                                     rho);
      if (!cap.contains(fwd)) ++violations;
      worst_gap = std::min(
          worst_gap, cap.radius - hc::capconn::sphere_dist(cap.center, fwd));
    }
  }

  // Supremum over the unit-distance rim: coarse scan plus golden-section
  // refinement around the best direction.
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double worst_sup = 0.0;
  for (size_t li = 0; li < 64; ++li) {
    const auto& L = lines[li];
    const auto cap = hc::geom::endcap(L);
    const auto X = hc::geom::lift(hc::geom::BallPoint(L.foot));
    const auto basis =
        hc::geom::hyperplane_tangent_basis(X, hc::geom::lift_normal(L.normal));
    auto f = [&](double psi) {
      const Vec fwd =
          bundle_forward(L, X, basis, std::cos(psi), std::sin(psi), 1.0);
      return hc::capconn::sphere_dist(cap.center, fwd);
    };
    const int kCoarse = 4096;
    double best = -1.0, best_psi = 0.0;
    for (int k = 0; k < kCoarse; ++k) {
      const double psi = 2.0 * kPi * k / kCoarse;
      const double v = f(psi);
      if (v > best) {
        best = v;
        best_psi = psi;
      }
    }
    double a = best_psi - 2.0 * kPi / kCoarse, b = best_psi + 2.0 * kPi / kCoarse;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 70; ++it) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = f(x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = f(x1);
      }
    }
    best = std::max(best, std::max(f1, f2));
    worst_sup = std::max(worst_sup, std::abs(best - cap.radius));
  }

  const bool ok = violations == 0 && worst_gap > 0.0 && worst_sup <= 1e-6;
  detail = std::to_string(violations) + " of 100000 interior escapes, min gap " +
           fmt(worst_gap, 3) + ", rim-sup err " + fmt(worst_sup, 3);
  return ok;
}

// ---------------------------------------------------------------------------
// 4. Mean line count at unit intensity matches the window mass.
// ---------------------------------------------------------------------------

bool crit_line_count(std::string& detail) {
  const hc::sampler::LineWindow window(3, 2.0);
  const int reps = 10000;
  double sum = 0.0;
  for (int rep = 0; rep < reps; ++rep)
    sum += static_cast<double>(
        hc::sampler::sample_lines(1.0, window, Seed{4304, (uint64_t)rep})
            .size());
  const double mean = sum / reps;
  const double target = oracle::kSinh2Sq;
  const double band = 4.0 * std::sqrt(target / reps);
  const bool ok = std::abs(mean - target) <= band;
  detail = "mean " + fmt(mean, 8) + " vs " + fmt(target, 8) + " (4 SE = " +
           fmt(band, 3) + ")";
  return ok;
}

// ---------------------------------------------------------------------------
// 5. Radii of the scaled cap map follow the closed-form cap law and the
//    centers are isotropic.
// ---------------------------------------------------------------------------

bool crit_cap_radius_law(std::string& detail) {
  const double c = oracle::kHalfBetaZero;
  const hc::sampler::LineWindow window(3, 2.0);
  const auto lines = hc::sampler::sample_lines(7602.0, window, Seed{4305, 0});
  const auto caps =
      hc::sampler::map_caps_scaled(lines, c,
                                   hc::sampler::TiltChoice::kShadowCenter);
  const hc::sampler::CapProcessSpec spec(3, c, c * oracle::kGammaTilde2,
                                         c * kPi / 2.0);

  std::vector<double> radii;
  radii.reserve(caps.size());
  for (const auto& cap : caps) radii.push_back(cap.radius);
  const double p_radius = hc::stats::ks_test(
      radii, [&](double a) { return hc::sampler::cap_radius_cdf(spec, a); });

  double p_center = 1.0;
  for (int k = 0; k < 3; ++k) {
    std::vector<double> coords;
    coords.reserve(caps.size());
    for (const auto& cap : caps) coords.push_back(cap.center[k]);
    const double p = hc::stats::ks_test(coords, [](double x) {
      return std::clamp((x + 1.0) / 2.0, 0.0, 1.0);
    });
    p_center = std::min(p_center, p);
  }

  const bool ok = caps.size() > 90000 && p_radius > 0.01 && p_center > 0.01;
  detail = std::to_string(caps.size()) + " caps, radius-law p=" +
           fmt(p_radius, 4) + ", min center-coord p=" + fmt(p_center, 4);
  return ok;
}

// ---------------------------------------------------------------------------
// 6. Separated-net cardinality stays inside the geometric window at every
//    level.
// ---------------------------------------------------------------------------

bool crit_net_window(std::string& detail) {
  std::ostringstream os;
  bool ok = true;
  for (int n = 1; n <= 6; ++n) {
    const auto net = hc::capconn::build_net(n, 3, Seed{4306, (uint64_t)n},
                                            20000);
    const double count = static_cast<double>(net.points.size());
    const double pow4 = std::pow(4.0, n);
    const bool in_window = count >= 0.1875 * pow4 && count <= 96.0 * pow4;
    ok = ok && in_window;
    if (n > 1) os << " ";
    os << net.points.size() << (in_window ? "" : "!");
  }
  detail = "levels 1..6 sizes: " + os.str();
  return ok;
}

// ---------------------------------------------------------------------------
// 7. Certificate coverage frequency rises with intensity and saturates
//    above 0.99, inside the runtime budget.
// ---------------------------------------------------------------------------

bool crit_coverage_monotone(std::string& detail) {
  const auto t0 = Clock::now();
  const std::string out = "acceptance-out/c07-coverage";
  const int rc = run_suite_quiet("coverage-scan",
                                 "dim = 3\n"
                                 "replicates = 400\n"
                                 "net_level = 3\n"
                                 "net_rejections = 20000\n"
                                 "lambda_grid = 1, 2, 4, 8, 16, 32\n",
                                 4307, 1, out);
  const double secs = secs_since(t0);
  const auto csv = read_csv(fs::path(out) / "coverage-scan.csv");

  bool monotone = true;
  for (size_t i = 0; i + 1 < csv.rows.size(); ++i) {
    const double f0 = csv.num(i, "covered_freq");
    const double f1 = csv.num(i + 1, "covered_freq");
    const bool overlap = csv.num(i + 1, "ci_lo") <= csv.num(i, "ci_hi") &&
                         csv.num(i, "ci_lo") <= csv.num(i + 1, "ci_hi");
    if (!(f1 >= f0 - 1e-12 || overlap)) monotone = false;
  }
  const double top = csv.num(csv.rows.size() - 1, "covered_freq");

  const bool ok = rc == 0 && csv.rows.size() == 6 && monotone && top > 0.99 &&
                  secs < 300.0;
  std::ostringstream os;
  os << "freqs";
  for (size_t i = 0; i < csv.rows.size(); ++i)
    os << " " << csv.rows[i][csv.col("covered_freq")];
  os << (monotone ? ", monotone" : ", NOT monotone") << ", " << fmt(secs, 3)
     << "s";
  detail = os.str();
  return ok;
}

// ---------------------------------------------------------------------------
// 8. All five coupling audits run clean at scale.
// ---------------------------------------------------------------------------

bool crit_coupling_audits(std::string& detail) {
  const std::string out = "acceptance-out/c08-audit";
  const int rc = run_suite_quiet("coupling-audit",
                                 "dim = 3\n"
                                 "pairs = 60000\n"
                                 "incl_lines = 20000\n"
                                 "shadow_lines = 250\n"
                                 "shadow_points = 400\n"
                                 "proj_probes = 1000000\n"
                                 "coupled_probes = 100000\n",
                                 4308, 2, out);
  const auto csv = read_csv(fs::path(out) / "coupling-audit.csv");

  const std::vector<std::pair<std::string, double>> floors = {
      {"endcap-overlap-cylinders-meet", 10000},
      {"scaled-cap-inside-endcap", 10000},
      {"cylinder-radial-shadow", 100000},
      {"cap-vertical-projection", 1000000},
      {"coupled-untouched-uncovered", 100000}};

  bool ok = rc == 0 && csv.rows.size() == floors.size();
  std::ostringstream os;
  for (size_t i = 0; i < csv.rows.size() && i < floors.size(); ++i) {
    const std::string name = csv.rows[i][csv.col("audit")];
    const double trials = csv.num(i, "trials");
    const double viol = csv.num(i, "violations");
    // The radial-shadow audit skips the rare numerically-marginal probe, so
    // give its floor one percent of slack.
    if (name != floors[i].first || trials < 0.99 * floors[i].second ||
        viol != 0.0)
      ok = false;
    if (i) os << " ";
    os << std::lround(trials) << "/" << std::lround(viol);
  }
  detail = "rc=" + std::to_string(rc) + ", trials/violations: " + os.str();
  return ok;
}

// ---------------------------------------------------------------------------
// 9. Rescaling by the critical exponent reproduces the law; a wrong
//    exponent does not.
// ---------------------------------------------------------------------------

bool crit_scale_invariance(std::string& detail) {
  const Box window(Vec(2), Vec{1.0, 1.0});
  const hc::sampler::BallProcessSpec spec(2, window, 0.1, 1.0, 3.0);
  const auto good = hc::fracball::scale_invariance_test(0.5, 1.0 / 3.0, spec,
                                                        10000, Seed{4309, 0});
  const hc::sampler::BallProcessSpec wrong(2, window, 0.1, 1.0, 2.0);
  const auto bad = hc::fracball::scale_invariance_test(0.5, 1.0 / 3.0, wrong,
                                                       10000, Seed{4309, 1});

  const bool ok = good.pass && good.ks_p > 0.01 && good.count_p > 0.01 &&
                  !bad.pass;
  detail = "matched exponent ks_p=" + fmt(good.ks_p, 4) + " count_p=" +
           fmt(good.count_p, 4) + " (" + std::to_string(good.mapped_count) +
           "/" + std::to_string(good.fresh_count) +
           " balls); control ks_p=" + fmt(bad.ks_p, 3) + " count_p=" +
           fmt(bad.count_p, 3) + (bad.pass ? " UNEXPECTED PASS" : " rejected");
  return ok;
}

// ---------------------------------------------------------------------------
// 10. Annulus crossings: bounded probability, scale-matched estimate, and
//     independence across disjoint radius bands.
// ---------------------------------------------------------------------------

bool crit_annulus_crossing(std::string& detail) {
  const int reps = 1000;
  const hc::fracball::Annulus ann_u(1.0, 3.0);
  const hc::sampler::BallProcessSpec spec_u(2, Box::centered(2, 5.0), 0.2, 1.0,
                                            3.0);
  const hc::fracball::Annulus ann_s(9.0, 27.0);
  const hc::sampler::BallProcessSpec spec_s(2, Box::centered(2, 45.0), 1.8,
                                            9.0, 3.0);

  uint64_t hits_u = 0, hits_s = 0;
  for (int rep = 0; rep < reps; ++rep) {
    if (hc::fracball::crossing(
            hc::sampler::sample_balls(0.05, spec_u, Seed{4310, (uint64_t)rep}),
            ann_u))
      ++hits_u;
    if (hc::fracball::crossing(
            hc::sampler::sample_balls(0.05, spec_s, Seed{4311, (uint64_t)rep}),
            ann_s))
      ++hits_s;
  }
  const auto ci_u = hc::stats::wilson95(hits_u, reps);
  const double f_s = double(hits_s) / reps;

  std::vector<double> xs(reps), ys(reps);
  for (int rep = 0; rep < reps; ++rep) {
    xs[rep] = hc::fracball::crossing(
                  hc::sampler::sample_balls(0.15, spec_u,
                                            Seed{4312, (uint64_t)(2 * rep)}),
                  ann_u)
                  ? 1.0
                  : 0.0;
    ys[rep] = hc::fracball::crossing(
                  hc::sampler::sample_balls(0.15, spec_s,
                                            Seed{4312, (uint64_t)(2 * rep + 1)}),
                  ann_s)
                  ? 1.0
                  : 0.0;
  }
  const double corr = hc::stats::pearson(xs, ys);
  const double corr_band = 3.0 / std::sqrt(double(reps));

  const bool ok = ci_u.hi < 1.0 && f_s <= ci_u.hi && std::abs(corr) <= corr_band;
  detail = "crossing " + std::to_string(hits_u) + "/1000 (hi " +
           fmt(ci_u.hi, 4) + "), scaled " + std::to_string(hits_s) +
           "/1000, corr " + fmt(corr, 3) + " (band " + fmt(corr_band, 3) + ")";
  return ok;
}

// ---------------------------------------------------------------------------
// 11. Retention grids: survivor counts, the FKG product bound, and exact
//     monotonicity of the separation frequency under the shared-marks
//     coupling.
// ---------------------------------------------------------------------------

bool crit_retention_separation(std::string& detail) {
  const int M = 3, dim = 2, n = 3, reps = 600;
  const std::vector<double> p_grid = {0.80, 0.85, 0.90, 0.95};
  const int ref = 2;  // index of p = 0.9

  std::vector<hc::mandelfp::SepRegion> regions;
  regions.push_back(hc::mandelfp::SepRegion::annulus());
  for (int axis = 0; axis < dim; ++axis)
    for (int side = 0; side < 2; ++side)
      regions.push_back(hc::mandelfp::SepRegion::slab(axis, side));

  std::vector<std::vector<uint64_t>> hits(p_grid.size(),
                                          std::vector<uint64_t>(regions.size(),
                                                                0));
  std::vector<double> survivors(reps, 0.0);
  for (int rep = 0; rep < reps; ++rep) {
    const auto marks =
        hc::mandelfp::generate_marks(M, n, dim, Seed{4313, (uint64_t)rep});
    for (size_t pi = 0; pi < p_grid.size(); ++pi) {
      const auto state = hc::mandelfp::threshold_marks(marks, p_grid[pi]);
      for (size_t ri = 0; ri < regions.size(); ++ri)
        if (hc::mandelfp::separation_event(state.grid, regions[ri], n))
          ++hits[pi][ri];
      if (static_cast<int>(pi) == ref)
        survivors[rep] =
            static_cast<double>(hc::mandelfp::surviving_count(state.grid, n));
    }
  }

  const double target = std::pow(0.9 * std::pow(double(M), dim), n);
  const double smean = hc::stats::mean(survivors);
  const double sse = hc::stats::sample_sd(survivors) / std::sqrt(double(reps));
  const bool surv_ok = std::abs(smean - target) <= 3.0 * sse;

  auto freq = [&](size_t pi, size_t ri) {
    return double(hits[pi][ri]) / reps;
  };
  double prod = 1.0, var = 0.0;
  for (size_t ri = 1; ri < regions.size(); ++ri) prod *= freq(ref, ri);
  for (size_t ri = 1; ri < regions.size(); ++ri) {
    double excl = 1.0;
    for (size_t rj = 1; rj < regions.size(); ++rj)
      if (rj != ri) excl *= freq(ref, rj);
    const double f = freq(ref, ri);
    var += excl * excl * f * (1.0 - f) / reps;
  }
  const double f_ann = freq(ref, 0);
  const double pooled =
      std::sqrt(var + f_ann * (1.0 - f_ann) / reps);
  const bool fkg_ok = f_ann >= prod - 2.0 * pooled;

  bool monotone = true;
  for (size_t pi = 0; pi + 1 < p_grid.size(); ++pi)
    if (freq(pi + 1, 0) < freq(pi, 0)) monotone = false;

  const bool ok = surv_ok && fkg_ok && monotone;
  detail = "survivors " + fmt(smean, 6) + " vs " + fmt(target, 6) + " (3se " +
           fmt(3.0 * sse, 3) + "); annulus " + fmt(f_ann, 4) + " vs product " +
           fmt(prod, 4) + " - 2se " + fmt(2.0 * pooled, 3) +
           (monotone ? "; freq monotone" : "; freq NOT monotone");
  return ok;
}

// ---------------------------------------------------------------------------
// 12. Box-touching measure: closed form against Monte Carlo, level
//     independence, and the per-box vacancy frequency.
// ---------------------------------------------------------------------------

bool crit_touching_measure(std::string& detail) {
  // Closed-form slab/ball Steiner volume against Monte Carlo.
  const double vol = hc::mandelfp::minkowski_cube_ball_volume(2, 0.5, 0.25);
  auto stream = hc::stream_for(Seed{4314, 0}, "test.acceptance");
  const int probes = 300000;
  int inside = 0;
  for (int i = 0; i < probes; ++i) {
    const double x = stream.uniform(-0.25, 0.75);
    const double y = stream.uniform(-0.25, 0.75);
    const double dx = std::max({0.0, -x, x - 0.5});
    const double dy = std::max({0.0, -y, y - 0.5});
    if (dx * dx + dy * dy <= 0.25 * 0.25) ++inside;
  }
  const double mc = double(inside) / probes;  // bounding box has unit area
  const bool steiner_ok = std::abs(mc - vol) <= 0.005 * vol &&
                          std::abs(vol - oracle::kSteinerD2) <= 1e-12;

  // The measure is level-free and linear in intensity.
  const double base = hc::mandelfp::touching_measure(2, 3.0, 1, 0.7).measure;
  double drift = 0.0;
  for (int lvl = 2; lvl <= 6; ++lvl)
    drift = std::max(drift,
                     std::abs(hc::mandelfp::touching_measure(2, 3.0, lvl, 0.7)
                                  .measure -
                              base));
  for (int lvl = 2; lvl <= 4; ++lvl)
    drift = std::max(
        drift, std::abs(hc::mandelfp::touching_measure(3, 2.0, lvl, 0.4)
                            .measure -
                        hc::mandelfp::touching_measure(3, 2.0, 1, 0.4)
                            .measure));
  const double coef_err = std::abs(
      hc::mandelfp::touching_measure(2, 3.0, 2, 0.1).measure -
      0.1 * oracle::kTouchCoefD2M3);
  const bool free_ok = drift <= 1e-10 && coef_err <= 1e-12;

  // Vacancy frequency of the central level-2 box under the ball coupling.
  const double target = hc::mandelfp::touching_measure(2, 3.0, 2, 0.1).untouched;
  const hc::sampler::BallProcessSpec spec(2, Box(Vec(2, -1.0), Vec(2, 2.0)),
                                          1.0 / 9.0, 1.0, 3.0);
  const int reps = 2000;
  int vacant = 0;
  for (int rep = 0; rep < reps; ++rep) {
    const auto balls =
        hc::sampler::sample_balls(0.1, spec, Seed{4315, (uint64_t)rep});
    const auto coupled = hc::mandelfp::couple_from_balls(balls, 3, 2);
    if (coupled.grid.discarded[1][4 * 9 + 4] == 0) ++vacant;
  }
  const double f_vac = double(vacant) / reps;
  const double sigma = std::sqrt(target * (1.0 - target) / reps);
  const bool vac_ok = std::abs(f_vac - target) <= 3.0 * sigma;

  const bool ok = steiner_ok && free_ok && vac_ok;
  detail = "MC " + fmt(mc, 6) + " vs " + fmt(vol, 6) + "; level drift " +
           fmt(drift, 3) + "; untouched " + fmt(f_vac, 4) + " vs " +
           fmt(target, 4) + " (3s " + fmt(3.0 * sigma, 3) + ")";
  return ok;
}

// ---------------------------------------------------------------------------
// 13. Identical config and seed give byte-identical reports regardless of
//     worker count (timing column excluded).
// ---------------------------------------------------------------------------

bool crit_determinism(std::string& detail) {
  struct Job {
    std::string suite;
    std::string cfg;
    std::vector<std::string> csvs;
    std::vector<std::string> raws;
  };
  const std::vector<Job> jobs = {
      {"crossing-scan",
       "dim = 2\nreplicates = 60\nlambda_grid = 0.05, 0.1\n",
       {"crossing-scan.csv"},
       {"crossing-scan.svg", "crossing-scene.svg"}},
      {"fp-separation",
       "M = 3\ndim = 2\nn = 2\nreplicates = 50\np_grid = 0.8, 0.9\n",
       {"fp-separation.csv"},
       {"fp-separation.svg", "fp-separation.pgm"}},
      {"cap-connectivity-scan",
       "dim = 3\nreplicates = 30\nlambda_grid = 0.2, 0.5\n",
       {"cap-connectivity-scan.csv"},
       {"cap-connectivity-scan-minus.svg", "cap-connectivity-scan-plus.svg",
        "cap-connectivity-scan-scaled.svg"}}};

  bool ok = true;
  std::ostringstream os;
  for (const auto& job : jobs) {
    const std::string d1 = "acceptance-out/c13-" + job.suite + "-w1";
    const std::string d2 = "acceptance-out/c13-" + job.suite + "-w2";
    const int rc1 = run_suite_quiet(job.suite, job.cfg, 77, 1, d1);
    const int rc2 = run_suite_quiet(job.suite, job.cfg, 77, 2, d2);
    bool same = rc1 == 0 && rc2 == 0;
    for (const auto& name : job.csvs)
      same = same && strip_timing(read_file(fs::path(d1) / name)) ==
                         strip_timing(read_file(fs::path(d2) / name));
    for (const auto& name : job.raws)
      same = same &&
             read_file(fs::path(d1) / name) == read_file(fs::path(d2) / name);
    ok = ok && same;
    if (&job != &jobs.front()) os << ", ";
    os << job.suite << (same ? " ok" : " DIFFERS");
  }
  detail = os.str();
  return ok;
}

struct Criterion {
  int id;
  std::string name;
  std::function<bool(std::string&)> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "scalar-identities", crit_identities},
      {2, "aperture-ratio-band", crit_ratio_band},
      {3, "endcap-boundary-trace", crit_endcap_trace},
      {4, "line-count-mean", crit_line_count},
      {5, "cap-radius-law", crit_cap_radius_law},
      {6, "net-cardinality", crit_net_window},
      {7, "coverage-monotone", crit_coverage_monotone},
      {8, "coupling-audits", crit_coupling_audits},
      {9, "scale-invariance", crit_scale_invariance},
      {10, "annulus-crossing", crit_annulus_crossing},
      {11, "retention-separation", crit_retention_separation},
      {12, "touching-measure", crit_touching_measure},
      {13, "determinism", crit_determinism},
  };

  const auto t0 = Clock::now();
  int failures = 0;
  for (const auto& c : criteria) {
    std::string detail;
    bool pass = false;
    try {
      pass = c.body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (!pass) ++failures;
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << std::setw(2)
              << std::setfill('0') << c.id << std::setfill(' ') << " "
              << c.name << " (" << detail << ")" << std::endl;
  }
  std::cout << "acceptance: " << (criteria.size() - failures) << "/"
            << criteria.size() << " criteria passed in "
            << fmt(secs_since(t0), 3) << "s" << std::endl;
  return failures == 0 ? 0 : 1;
}
