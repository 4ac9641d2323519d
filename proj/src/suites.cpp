#include "hypercyl/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypercyl/capconn.hpp"
#include "hypercyl/fracball.hpp"
#include "hypercyl/geom.hpp"
#include "hypercyl/mandelfp.hpp"
#include "hypercyl/rng.hpp"
#include "hypercyl/sampler.hpp"
#include "hypercyl/stats.hpp"

namespace hypercyl::suites {

namespace {

namespace fs = std::filesystem;
using report::ExperimentConfig;
using report::format_double;
using Clock = std::chrono::steady_clock;

const double kPi = 3.14159265358979323846;

long long ms_since(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() -
                                                               t0)
      .count();
}

void write_file(const SuiteOptions& opts, const std::string& name,
                const std::string& content) {
  fs::create_directories(opts.out_dir);
  const fs::path path = fs::path(opts.out_dir) / name;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open output file: " + path.string());
  os << content;
  std::cout << "wrote " << path.string() << "\n";
}

std::string csv_text(const std::string& suite, const ExperimentConfig& cfg,
                     uint64_t seed, const report::CsvTable& table) {
  std::ostringstream os;
  report::write_csv(os, suite, cfg, seed, table);
  return os.str();
}

int require_pos_int(const ExperimentConfig& cfg, const std::string& key,
                    int64_t fallback) {
  const int64_t v = cfg.get_int(key, fallback);
  if (v < 1 || v > (int64_t(1) << 40))
    throw std::invalid_argument("config key '" + key + "' must be a positive integer");
  return static_cast<int>(std::min<int64_t>(v, INT32_MAX));
}

std::vector<double> require_ascending_grid(const ExperimentConfig& cfg,
                                           const std::string& key,
                                           const std::vector<double>& fallback,
                                           double min_allowed) {
  std::vector<double> g = cfg.get_grid(key, fallback);
  if (g.empty()) throw std::invalid_argument("config key '" + key + "' is empty");
  for (size_t i = 0; i < g.size(); ++i) {
    if (!(g[i] > min_allowed) || !std::isfinite(g[i]))
      throw std::invalid_argument("config key '" + key + "' has out-of-range entries");
    if (i > 0 && !(g[i] > g[i - 1]))
      throw std::invalid_argument("config key '" + key + "' must be strictly ascending");
  }
  return g;
}

// Uniform unit vector (suite-local; samplers keep their own copy private).
Vec unit_dir(int d, rng::Stream& stream) {
  for (;;) {
    Vec g(d);
    for (int i = 0; i < d; ++i) g[i] = stream.gauss();
    const double n = norm(g);
    if (n > 1e-8) return (1.0 / n) * g;
  }
}

Vec unit_dir_orthogonal(const Vec& u, rng::Stream& stream) {
  const int d = u.dim();
  for (;;) {
    Vec g(d);
    for (int i = 0; i < d; ++i) g[i] = stream.gauss();
    Vec v = g - dot(g, u) * u;
    const double n = norm(v);
    if (n > 1e-8) return (1.0 / n) * v;
  }
}

// Even-ish split of `total` work items across a fixed chunk count, so the
// chunk -> stream association never depends on the worker count.
int chunk_share(int total, int chunks, int idx) {
  const int q = total / chunks, r = total % chunks;
  return q + (idx < r ? 1 : 0);
}

// ---------------------------------------------------------------------------
// identity-suite
// ---------------------------------------------------------------------------

int suite_identity(const ExperimentConfig& cfg, const SuiteOptions& opts) {
  const double cosh1 = std::cosh(1.0);
  const double lo_ratio = 2.0 / kPi * std::acos(1.0 / cosh1);
  const double hi_ratio = std::sinh(1.0);

  struct Row {
    std::string name;
    double value;
    double bound;
    long long ms;
  };
  std::vector<Row> rows;
  auto run = [&](const std::string& name, double bound,
                 const std::function<double()>& fn) {
    const auto t0 = Clock::now();
    const double v = fn();
    rows.push_back({name, v, bound, ms_since(t0)});
  };

  run("gamma_cot_sinh", 1e-9, [&] {
    double worst = 0.0;
    const Vec origin(2);
    for (int i = 0; i <= 2000; ++i) {
      const double t = 0.999 * i / 2000.0;
      Vec x(2);
      x[0] = t;
      const double g = geom::gamma_fn(t);
      const double sh = std::sinh(
          geom::hyp_dist(geom::BallPoint(origin), geom::BallPoint(x)));
      worst = std::max(worst, std::abs(std::cos(g) / std::sin(g) - sh) /
                                  std::max(1.0, sh));
    }
    return worst;
  });

  run("cot_gamma_tilde", 1e-12, [&] {
    double worst = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double h = 0.05 + (6.0 - 0.05) * i / 1000.0;
      const double g = geom::gamma_tilde(h);
      const double sh = std::sinh(h);
      worst = std::max(worst, std::abs(std::cos(g) / std::sin(g) - sh) /
                                  std::max(1.0, sh));
    }
    return worst;
  });

  run("a_defining_equation", 1e-12, [&] {
    double worst = 0.0;
    for (int i = 0; i <= 2000; ++i) {
      const double t = 1e-9 + (0.9999 - 1e-9) * i / 2000.0;
      const double a = geom::a_func(t);
      worst = std::max(
          worst, std::abs(a * a * t * t + a * cosh1 * (1.0 - t * t) - 1.0));
    }
    return worst;
  });

  run("a_origin_limit", 1e-9,
      [&] { return std::abs(geom::a_func(1e-12) - 1.0 / cosh1); });

  run("a_half_value", 1e-13,
      [&] { return std::abs(geom::a_func(0.5) - 0.744377274724820125); });

  run("beta_zero_value", 1e-13, [&] {
    return std::abs(geom::beta_fn(0.0) - 0.865769483239658624);
  });

  run("beta_half_value", 1e-13, [&] {
    return std::abs(geom::beta_fn(0.5) - 0.614154425328747049);
  });

  run("beta_h3_value", 1e-13, [&] {
    return std::abs(geom::beta_via_h(3.0) - 0.116204404144359049);
  });

  run("beta_parametrisations_agree", 1e-9, [&] {
    double worst = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double t = 0.01 + (0.90 - 0.01) * i / 1000.0;
      const double h = 2.0 * std::atanh(t);
      worst = std::max(worst,
                       std::abs(geom::beta_fn(t) - geom::beta_via_h(h)));
    }
    return worst;
  });

  run("gamma_zero_right_angle", 1e-15,
      [&] { return std::abs(geom::gamma_fn(0.0) - kPi / 2.0); });

  run("endpoint_example", 1e-12, [&] {
    Vec n(2), f(2);
    n[1] = 1.0;
    f[0] = 0.5;
    const auto ends = geom::endpoints(geom::OrientedLine(n, f));
    Vec want(2);
    want[0] = 0.8;
    want[1] = 0.6;
    return dist(ends.forward, want);
  });

  run("ratio_bounds_hold", 1e-9, [&] {
    double worst = 0.0;
    for (int i = 0; i <= 4000; ++i) {
      // log-spaced toward 0, linear toward 0.999
      const double t = (i <= 2000)
                           ? std::pow(10.0, -9.0 + 6.0 * i / 2000.0)
                           : 1e-3 + (0.999 - 1e-3) * (i - 2000) / 2000.0;
      const double ratio = geom::beta_fn(t) / geom::gamma_fn(t);
      worst = std::max(worst, lo_ratio - ratio);
      worst = std::max(worst, ratio - hi_ratio);
    }
    return std::max(worst, 0.0);
  });

  run("ratio_low_attained", 1e-6, [&] {
    const double t = 1e-8;
    return std::abs(geom::beta_fn(t) / geom::gamma_fn(t) - lo_ratio);
  });

  run("ratio_high_attained", 1e-6, [&] {
    return std::abs(geom::beta_via_h(20.0) / geom::gamma_tilde(20.0) -
                    hi_ratio);
  });

  run("band_mass_matches_sinh", 1e-9, [&] {
    const sampler::CapProcessSpec spec(3, 1.0, geom::gamma_tilde(2.0),
                                       kPi / 2.0);
    const double want = std::sinh(2.0) * std::sinh(2.0) / 2.0;
    return std::abs(sampler::cap_band_mass(spec) - want);
  });

  run("band_mass_example", 1e-12, [&] {
    const sampler::CapProcessSpec spec(3, 1.0, kPi / 4.0, kPi / 2.0);
    return std::abs(sampler::cap_band_mass(spec) - 0.5);
  });

  run("line_mass_example", 1e-9, [&] {
    const sampler::LineWindow window(3, 2.0);
    return std::abs(sampler::line_window_mass(window) - 13.154116418008243);
  });

  run("touch_measure_level_free", 1e-10, [&] {
    const double m1 = mandelfp::touching_measure(2, 3.0, 1, 0.7).measure;
    const double m6 = mandelfp::touching_measure(2, 3.0, 6, 0.7).measure;
    return std::abs(m1 - m6);
  });

  run("touch_measure_example", 1e-12, [&] {
    const double want = 4.0 / 9.0 + 8.0 / 3.0 + kPi * std::log(3.0);
    return std::abs(mandelfp::touching_measure(2, 3.0, 1, 1.0).measure - want);
  });

  run("steiner_example", 1e-12, [&] {
    const double want = 0.25 + 0.5 + kPi / 16.0;
    return std::abs(mandelfp::minkowski_cube_ball_volume(2, 0.5, 0.25) - want);
  });

  report::CsvTable table;
  table.columns = {"check", "value", "bound", "status", "elapsed_ms"};
  int failures = 0;
  for (const auto& r : rows) {
    const bool ok = r.value <= r.bound;
    if (!ok) ++failures;
    table.rows.push_back({r.name, format_double(r.value),
                          format_double(r.bound), ok ? "pass" : "fail",
                          std::to_string(r.ms)});
  }
  write_file(opts, "identity-suite.csv",
             csv_text("identity-suite", cfg, opts.seed, table));
  std::cout << "identity-suite: " << (rows.size() - failures) << "/"
            << rows.size() << " checks passed\n";
  return failures == 0 ? 0 : 3;
}

// ---------------------------------------------------------------------------
// coverage-scan
// ---------------------------------------------------------------------------

int suite_coverage(const ExperimentConfig& cfg, const SuiteOptions& opts) {
  const int dim = require_pos_int(cfg, "dim", 3);
  const double c = cfg.get_double("c", 1.0);
  const double alpha_min = cfg.get_double("alpha_min", 0.5);
  const double alpha_max = cfg.get_double("alpha_max", c * kPi / 2.0);
  const int net_level = require_pos_int(cfg, "net_level", 3);
  const int net_rejections = require_pos_int(cfg, "net_rejections", 20000);
  const int replicates = require_pos_int(cfg, "replicates", 300);
  const int probe_count = require_pos_int(cfg, "probes", 400);
  const std::vector<double> grid =
      require_ascending_grid(cfg, "lambda_grid", {2, 4, 8, 16, 32}, 0.0);
  const sampler::CapProcessSpec spec(dim, c, alpha_min, alpha_max);
  const double lambda_top = grid.back();
  const int nl = static_cast<int>(grid.size());

  const auto t0 = Clock::now();
  const capconn::SphereNet net =
      capconn::build_net(net_level, dim, Seed{opts.seed, 0}, net_rejections);

  std::vector<Vec> probes;
  {
    auto stream = stream_for(Seed{opts.seed, 0}, "coverage.probes");
    probes.reserve(probe_count);
    for (int i = 0; i < probe_count; ++i) probes.push_back(unit_dir(dim, stream));
  }

  struct RepSlot {
    std::vector<uint8_t> covered;
    std::vector<double> probe_frac;
    std::vector<uint32_t> caps;
  };
  std::vector<RepSlot> slots(replicates);

  report::parallel_for(replicates, opts.workers, [&](int rep) {
    const auto caps =
        sampler::sample_caps_direct(lambda_top, spec, Seed{opts.seed, (uint64_t)rep});
    auto marks_stream =
        stream_for(Seed{opts.seed, (uint64_t)rep}, "coverage.marks");
    std::vector<double> marks(caps.size());
    for (auto& m : marks) m = marks_stream.uniform01();

    RepSlot slot;
    slot.covered.resize(nl);
    slot.probe_frac.resize(nl);
    slot.caps.resize(nl);
    for (int li = 0; li < nl; ++li) {
      const double keep = grid[li] / lambda_top;
      capconn::CapConfig sub;
      sub.dim = dim;
      for (size_t i = 0; i < caps.size(); ++i)
        if (marks[i] < keep) sub.caps.push_back(caps[i]);
      slot.caps[li] = static_cast<uint32_t>(sub.caps.size());
      slot.covered[li] =
          capconn::coverage_certificate(sub, net).covered ? 1 : 0;
      slot.probe_frac[li] = capconn::pointwise_cover_fraction(sub, probes);
    }
    slots[rep] = std::move(slot);
  });
  const long long elapsed = ms_since(t0);

  report::CsvTable table;
  table.columns = {"lambda",     "covered_freq", "ci_lo",
                   "ci_hi",      "probe_mean",   "mean_caps",
                   "net_points", "replicates",   "elapsed_ms"};
  std::vector<report::CurvePoint> curve;
  for (int li = 0; li < nl; ++li) {
    uint64_t hits = 0;
    double pf = 0.0, mc = 0.0;
    for (const auto& s : slots) {
      hits += s.covered[li];
      pf += s.probe_frac[li];
      mc += s.caps[li];
    }
    const auto ci = stats::wilson95(hits, replicates);
    const double freq = double(hits) / replicates;
    table.rows.push_back({format_double(grid[li]), format_double(freq),
                          format_double(ci.lo), format_double(ci.hi),
                          format_double(pf / replicates),
                          format_double(mc / replicates),
                          std::to_string(net.points.size()),
                          std::to_string(replicates),
                          std::to_string(elapsed)});
    curve.push_back({grid[li], freq, ci.lo, ci.hi});
  }
  write_file(opts, "coverage-scan.csv",
             csv_text("coverage-scan", cfg, opts.seed, table));
  write_file(opts, "coverage-scan.svg",
             report::svg_curve(curve, "lambda", "covered frequency"));
  std::cout << "coverage-scan: " << nl << " intensities, " << replicates
            << " replicates, net " << net.points.size() << " points"
            << (net.saturated ? " (saturated)" : "") << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// cap-connectivity-scan
// ---------------------------------------------------------------------------

int suite_connectivity(const ExperimentConfig& cfg, const SuiteOptions& opts) {
  const int dim = require_pos_int(cfg, "dim", 3);
  const double h_max = cfg.get_double("h_max", 2.0);
  const double r = cfg.get_double("r", 0.5);
  const double c = cfg.get_double("c", 0.432884741619829312);
  const int replicates = require_pos_int(cfg, "replicates", 200);
  const std::vector<double> grid =
      require_ascending_grid(cfg, "lambda_grid", {0.2, 0.5, 1, 2}, 0.0);
  const std::string tilt_name = cfg.get_string("tilt", "shadow");
  if (tilt_name != "shadow" && tilt_name != "radial")
    throw std::invalid_argument("config key 'tilt' must be shadow or radial");
  const auto tilt = tilt_name == "shadow" ? sampler::TiltChoice::kShadowCenter
                                          : sampler::TiltChoice::kRadial;

  std::vector<std::string> maps;
  {
    std::stringstream ss(cfg.get_string("maps", "minus,plus,scaled"));
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item != "minus" && item != "plus" && item != "scaled")
        throw std::invalid_argument("config key 'maps' has unknown entry: " + item);
      maps.push_back(item);
    }
    if (maps.empty()) throw std::invalid_argument("config key 'maps' is empty");
  }

  const sampler::LineWindow window(dim, h_max);
  const double lambda_top = grid.back();
  const int nl = static_cast<int>(grid.size());
  const int nm = static_cast<int>(maps.size());

  struct Cell {
    uint8_t connected = 0;
    uint32_t caps = 0;
    uint32_t components = 0;
  };
  std::vector<std::vector<Cell>> slots(replicates);

  const auto t0 = Clock::now();
  report::parallel_for(replicates, opts.workers, [&](int rep) {
    const auto lines =
        sampler::sample_lines(lambda_top, window, Seed{opts.seed, (uint64_t)rep});
    auto marks_stream =
        stream_for(Seed{opts.seed, (uint64_t)rep}, "capconn.scan.marks");
    std::vector<double> marks(lines.size());
    for (auto& m : marks) m = marks_stream.uniform01();

    std::vector<Cell> cells(nm * nl);
    for (int li = 0; li < nl; ++li) {
      const double keep = grid[li] / lambda_top;
      std::vector<geom::OrientedLine> sub;
      for (size_t i = 0; i < lines.size(); ++i)
        if (marks[i] < keep) sub.push_back(lines[i]);
      for (int mi = 0; mi < nm; ++mi) {
        std::vector<geom::SphericalCap> caps;
        if (maps[mi] == "minus") caps = sampler::map_caps_minus(sub);
        else if (maps[mi] == "plus") caps = sampler::map_caps_plus(sub, r);
        else caps = sampler::map_caps_scaled(sub, c, tilt);
        capconn::CapConfig cc;
        cc.dim = dim;
        cc.caps = std::move(caps);
        const auto comp = capconn::connected_components(cc);
        Cell& cell = cells[mi * nl + li];
        cell.connected = capconn::is_connected(comp) ? 1 : 0;
        cell.caps = static_cast<uint32_t>(cc.caps.size());
        cell.components = static_cast<uint32_t>(comp.count);
      }
    }
    slots[rep] = std::move(cells);
  });
  const long long elapsed = ms_since(t0);

  report::CsvTable table;
  table.columns = {"map",       "lambda",          "connected_freq",
                   "ci_lo",     "ci_hi",           "mean_caps",
                   "mean_components", "replicates", "elapsed_ms"};
  for (int mi = 0; mi < nm; ++mi) {
    std::vector<report::CurvePoint> curve;
    for (int li = 0; li < nl; ++li) {
      uint64_t hits = 0;
      double mc = 0.0, mk = 0.0;
      for (const auto& s : slots) {
        const Cell& cell = s[mi * nl + li];
        hits += cell.connected;
        mc += cell.components;
        mk += cell.caps;
      }
      const auto ci = stats::wilson95(hits, replicates);
      const double freq = double(hits) / replicates;
      table.rows.push_back(
          {maps[mi], format_double(grid[li]), format_double(freq),
           format_double(ci.lo), format_double(ci.hi),
           format_double(mk / replicates), format_double(mc / replicates),
           std::to_string(replicates), std::to_string(elapsed)});
      curve.push_back({grid[li], freq, ci.lo, ci.hi});
    }
    write_file(opts, "cap-connectivity-scan-" + maps[mi] + ".svg",
               report::svg_curve(curve, "lambda", "connected frequency"));
  }
  write_file(opts, "cap-connectivity-scan.csv",
             csv_text("cap-connectivity-scan", cfg, opts.seed, table));
  std::cout << "cap-connectivity-scan: " << nm << " maps x " << nl
            << " intensities, " << replicates << " replicates\n";
  return 0;
}

// ---------------------------------------------------------------------------
// crossing-scan
// ---------------------------------------------------------------------------

int suite_crossing(const ExperimentConfig& cfg, const SuiteOptions& opts) {
  const int dim = require_pos_int(cfg, "dim", 2);
  const double a = cfg.get_double("a", 1.0);
  const double b = cfg.get_double("b", 3.0);
  const double r_min = cfg.get_double("r_min", 0.2);
  const double r_max = cfg.get_double("r_max", 1.0);
  const double exponent = cfg.get_double("exponent", dim + 1);
  const double window_half = cfg.get_double("window_half", b + 2.0 * r_max);
  const int replicates = require_pos_int(cfg, "replicates", 400);
  const bool scene = cfg.get_int("scene", 1) != 0;
  const std::vector<double> grid = require_ascending_grid(
      cfg, "lambda_grid", {0.02, 0.05, 0.1, 0.15}, 0.0);
  if (window_half < b + 2.0 * r_max)
    throw std::invalid_argument(
        "crossing-scan: window_half must be at least b + 2 r_max");

  const fracball::Annulus ann(a, b);
  const sampler::BallProcessSpec spec(dim, Box::centered(dim, window_half),
                                      r_min, r_max, exponent);
  const double lambda_top = grid.back();
  const int nl = static_cast<int>(grid.size());

  std::vector<std::vector<uint8_t>> slots(replicates);
  const auto t0 = Clock::now();
  report::parallel_for(replicates, opts.workers, [&](int rep) {
    const auto full =
        sampler::sample_balls(lambda_top, spec, Seed{opts.seed, (uint64_t)rep});
    auto marks_stream =
        stream_for(Seed{opts.seed, (uint64_t)rep}, "fracball.scan.marks");
    std::vector<double> marks(full.balls.size());
    for (auto& m : marks) m = marks_stream.uniform01();

    std::vector<uint8_t> row(nl);
    for (int li = 0; li < nl; ++li) {
      const double keep = grid[li] / lambda_top;
      sampler::BallConfig sub{spec, {}};
      for (size_t i = 0; i < full.balls.size(); ++i)
        if (marks[i] < keep) sub.balls.push_back(full.balls[i]);
      row[li] = fracball::crossing(sub, ann) ? 1 : 0;
    }
    slots[rep] = std::move(row);
  });
  const long long elapsed = ms_since(t0);

  report::CsvTable table;
  table.columns = {"lambda", "crossing_freq", "ci_lo",
                   "ci_hi",  "replicates",    "elapsed_ms"};
  std::vector<report::CurvePoint> curve;
  for (int li = 0; li < nl; ++li) {
    uint64_t hits = 0;
    for (const auto& s : slots) hits += s[li];
    const auto ci = stats::wilson95(hits, replicates);
    const double freq = double(hits) / replicates;
    table.rows.push_back({format_double(grid[li]), format_double(freq),
                          format_double(ci.lo), format_double(ci.hi),
                          std::to_string(replicates),
                          std::to_string(elapsed)});
    curve.push_back({grid[li], freq, ci.lo, ci.hi});
  }
  write_file(opts, "crossing-scan.csv",
             csv_text("crossing-scan", cfg, opts.seed, table));
  write_file(opts, "crossing-scan.svg",
             report::svg_curve(curve, "lambda", "crossing frequency"));
  if (scene && dim == 2) {
    const auto cfg0 = sampler::sample_balls(lambda_top, spec, Seed{opts.seed, 0});
    write_file(opts, "crossing-scene.svg", report::svg_ball_scene(cfg0, &ann));
  }
  std::cout << "crossing-scan: " << nl << " intensities, " << replicates
            << " replicates\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fp-separation
// ---------------------------------------------------------------------------

int suite_fp(const ExperimentConfig& cfg, const SuiteOptions& opts) {
  const int M = require_pos_int(cfg, "M", 3);
  const int dim = require_pos_int(cfg, "dim", 2);
  const int n = require_pos_int(cfg, "n", 3);
  const int replicates = require_pos_int(cfg, "replicates", 600);
  const bool pgm = cfg.get_int("pgm", 1) != 0;
  const std::vector<double> p_grid =
      require_ascending_grid(cfg, "p_grid", {0.8, 0.85, 0.9, 0.95}, 0.0);
  if (p_grid.back() >= 1.0)
    throw std::invalid_argument("fp-separation: p_grid entries must lie in (0,1)");
  if (M % 3 != 0)
    throw std::invalid_argument("fp-separation: M must be divisible by 3");

  std::vector<mandelfp::SepRegion> regions;
  std::vector<std::string> region_names;
  regions.push_back(mandelfp::SepRegion::annulus());
  region_names.push_back("annulus");
  for (int axis = 0; axis < dim; ++axis)
    for (int side = 0; side < 2; ++side) {
      regions.push_back(mandelfp::SepRegion::slab(axis, side));
      region_names.push_back("slab-" + std::to_string(axis) +
                             (side == 0 ? "-lo" : "-hi"));
    }
  const int nr = static_cast<int>(regions.size());
  const int np = static_cast<int>(p_grid.size());

  struct RepSlot {
    std::vector<uint8_t> events;      // [p * nr + region]
    std::vector<int64_t> survivors;   // [p]
  };
  std::vector<RepSlot> slots(replicates);

  const auto t0 = Clock::now();
  report::parallel_for(replicates, opts.workers, [&](int rep) {
    const auto marks =
        mandelfp::generate_marks(M, n, dim, Seed{opts.seed, (uint64_t)rep});
    RepSlot slot;
    slot.events.resize(np * nr);
    slot.survivors.resize(np);
    for (int pi = 0; pi < np; ++pi) {
      const auto state = mandelfp::threshold_marks(marks, p_grid[pi]);
      slot.survivors[pi] = mandelfp::surviving_count(state.grid, n);
      for (int ri = 0; ri < nr; ++ri)
        slot.events[pi * nr + ri] =
            mandelfp::separation_event(state.grid, regions[ri], n) ? 1 : 0;
    }
    slots[rep] = std::move(slot);
  });
  const long long elapsed = ms_since(t0);

  report::CsvTable table;
  table.columns = {"p",     "region",     "estimate",  "ci_lo",
                   "ci_hi", "replicates", "elapsed_ms"};
  std::vector<report::CurvePoint> curve;
  const double md = std::pow(double(M), dim);
  for (int pi = 0; pi < np; ++pi) {
    std::vector<double> freq(nr), se(nr);
    for (int ri = 0; ri < nr; ++ri) {
      uint64_t hits = 0;
      for (const auto& s : slots) hits += s.events[pi * nr + ri];
      freq[ri] = double(hits) / replicates;
      se[ri] = std::sqrt(freq[ri] * (1.0 - freq[ri]) / replicates);
      const auto ci = stats::wilson95(hits, replicates);
      table.rows.push_back({format_double(p_grid[pi]), region_names[ri],
                            format_double(freq[ri]), format_double(ci.lo),
                            format_double(ci.hi), std::to_string(replicates),
                            std::to_string(elapsed)});
      if (ri == 0) curve.push_back({p_grid[pi], freq[ri], ci.lo, ci.hi});
    }

    // Product of the slab frequencies with a delta-method interval, and the
    // margin of the annulus frequency over that product.
    double prod = 1.0, var = 0.0;
    for (int ri = 1; ri < nr; ++ri) prod *= freq[ri];
    for (int ri = 1; ri < nr; ++ri) {
      double excl = 1.0;
      for (int rj = 1; rj < nr; ++rj)
        if (rj != ri) excl *= freq[rj];
      var += excl * excl * se[ri] * se[ri];
    }
    const double prod_se = std::sqrt(var);
    table.rows.push_back(
        {format_double(p_grid[pi]), "slab-product", format_double(prod),
         format_double(std::max(0.0, prod - 1.96 * prod_se)),
         format_double(std::min(1.0, prod + 1.96 * prod_se)),
         std::to_string(replicates), std::to_string(elapsed)});
    const double margin = freq[0] - prod;
    const double pooled = std::sqrt(prod_se * prod_se + se[0] * se[0]);
    table.rows.push_back(
        {format_double(p_grid[pi]), "fkg-margin", format_double(margin),
         format_double(margin - 2.0 * pooled),
         format_double(margin + 2.0 * pooled), std::to_string(replicates),
         std::to_string(elapsed)});

    std::vector<double> surv(replicates);
    for (int rep = 0; rep < replicates; ++rep)
      surv[rep] = double(slots[rep].survivors[pi]);
    const double sm = stats::mean(surv);
    const double ssd = stats::sample_sd(surv);
    const double sse = ssd / std::sqrt(double(replicates));
    table.rows.push_back({format_double(p_grid[pi]), "survivors-mean",
                          format_double(sm), format_double(sm - 1.96 * sse),
                          format_double(sm + 1.96 * sse),
                          std::to_string(replicates),
                          std::to_string(elapsed)});
    const double expect = std::pow(p_grid[pi] * md, n);
    table.rows.push_back({format_double(p_grid[pi]), "survivors-expected",
                          format_double(expect), format_double(expect),
                          format_double(expect), std::to_string(replicates),
                          std::to_string(elapsed)});
  }

  write_file(opts, "fp-separation.csv",
             csv_text("fp-separation", cfg, opts.seed, table));
  write_file(opts, "fp-separation.svg",
             report::svg_curve(curve, "retention probability",
                               "annulus separation frequency"));
  if (pgm && dim == 2) {
    const auto marks = mandelfp::generate_marks(M, n, dim, Seed{opts.seed, 0});
    const auto state = mandelfp::threshold_marks(marks, p_grid.back());
    std::ostringstream os;
    mandelfp::write_pgm(os, state.grid, n);
    write_file(opts, "fp-separation.pgm", os.str());
  }
  std::cout << "fp-separation: " << np << " retention levels, " << replicates
            << " replicates\n";
  return 0;
}

// ---------------------------------------------------------------------------
// coupling-audit
// ---------------------------------------------------------------------------

struct AuditTotals {
  int64_t tested = 0;
  int64_t violations = 0;
  int64_t skipped = 0;
};

AuditTotals reduce(const std::vector<AuditTotals>& parts) {
  AuditTotals total;
  for (const auto& p : parts) {
    total.tested += p.tested;
    total.violations += p.violations;
    total.skipped += p.skipped;
  }
  return total;
}

int suite_audit(const ExperimentConfig& cfg, const SuiteOptions& opts) {
  const int dim = require_pos_int(cfg, "dim", 3);
  const double h_max = cfg.get_double("h_max", 2.0);
  const double c = cfg.get_double("c", 0.432884741619829312);
  const double r = cfg.get_double("r", 0.5);
  const int pairs = require_pos_int(cfg, "pairs", 1500);
  const int incl_lines = require_pos_int(cfg, "incl_lines", 20000);
  const int shadow_lines = require_pos_int(cfg, "shadow_lines", 50);
  const int shadow_points = require_pos_int(cfg, "shadow_points", 400);
  const int proj_probes = require_pos_int(cfg, "proj_probes", 100000);
  const int coupled_dim = require_pos_int(cfg, "coupled_dim", 2);
  const int coupled_M = require_pos_int(cfg, "coupled_M", 3);
  const int coupled_n = require_pos_int(cfg, "coupled_n", 2);
  const double coupled_lambda = cfg.get_double("coupled_lambda", 0.3);
  const int coupled_probes = require_pos_int(cfg, "coupled_probes", 20000);

  const sampler::LineWindow window(dim, h_max);
  const int kChunks = 64;

  report::CsvTable table;
  table.columns = {"audit", "trials", "violations", "skipped", "elapsed_ms"};
  int64_t total_violations = 0;
  auto push_row = [&](const std::string& name, const AuditTotals& t,
                      long long ms) {
    total_violations += t.violations;
    table.rows.push_back({name, std::to_string(t.tested),
                          std::to_string(t.violations),
                          std::to_string(t.skipped), std::to_string(ms)});
  };

  // 1. Overlapping forward endcaps force the solid cylinders to share a
  //    point, and the constructed witness must lie in both.
  {
    const auto t0 = Clock::now();
    std::vector<AuditTotals> parts(kChunks);
    report::parallel_for(kChunks, opts.workers, [&](int ci) {
      auto stream = stream_for(Seed{opts.seed, (uint64_t)ci}, "audit.pairs");
      AuditTotals t;
      const int n = chunk_share(pairs, kChunks, ci);
      for (int i = 0; i < n; ++i) {
        const auto la = sampler::sample_one_line(window, stream);
        const auto lb = sampler::sample_one_line(window, stream);
        if (!capconn::caps_intersect(geom::endcap(la), geom::endcap(lb))) {
          ++t.skipped;
          continue;
        }
        ++t.tested;
        const auto res = geom::cylinders_intersect(la, lb);
        bool ok = res.intersects;
        if (ok && res.witness)
          ok = geom::cylinder_contains(la, *res.witness) &&
               geom::cylinder_contains(lb, *res.witness);
        if (!ok) ++t.violations;
      }
      parts[ci] = t;
    });
    push_row("endcap-overlap-cylinders-meet", reduce(parts), ms_since(t0));
  }

  // 2. The tilted cap with scaled opening c*gamma sits inside the forward
  //    endcap (center distance plus small radius bounded by the big radius).
  {
    const auto t0 = Clock::now();
    std::vector<AuditTotals> parts(kChunks);
    report::parallel_for(kChunks, opts.workers, [&](int ci) {
      auto stream = stream_for(Seed{opts.seed, (uint64_t)ci}, "audit.scaled");
      AuditTotals t;
      const int n = chunk_share(incl_lines, kChunks, ci);
      for (int i = 0; i < n; ++i) {
        const auto line = sampler::sample_one_line(window, stream);
        std::vector<geom::OrientedLine> one{line};
        const auto scaled =
            sampler::map_caps_scaled(one, c, sampler::TiltChoice::kShadowCenter);
        if (scaled.empty()) {
          ++t.skipped;  // dropped by the mapping (wide shadow)
          continue;
        }
        ++t.tested;
        const auto big = geom::endcap(line);
        const double ds = capconn::sphere_dist(scaled[0].center, big.center);
        if (ds + scaled[0].radius > big.radius + 1e-9) ++t.violations;
      }
      parts[ci] = t;
    });
    push_row("scaled-cap-inside-endcap", reduce(parts), ms_since(t0));
  }

  // 3. Points sampled inside a cylinder project radially into the widened
  //    shadow cap of opening gamma + 2 beta.
  {
    const auto t0 = Clock::now();
    std::vector<AuditTotals> parts(shadow_lines);
    report::parallel_for(shadow_lines, opts.workers, [&](int li) {
      auto stream = stream_for(Seed{opts.seed, (uint64_t)li}, "audit.shadow");
      AuditTotals t;
      geom::OrientedLine line = sampler::sample_one_line(window, stream);
      while (!(norm(line.foot) > r))
        line = sampler::sample_one_line(window, stream);
      const double tfoot = norm(line.foot);
      const double opening =
          geom::gamma_fn(tfoot) + 2.0 * geom::beta_fn(tfoot);
      const Vec axis_dir = geom::radial_direction(line.foot);
      const auto X = geom::lift(geom::BallPoint(line.foot));
      const Vec U = geom::lift_normal(line.normal);
      const auto basis = geom::hyperplane_tangent_basis(X, U);
      for (int j = 0; j < shadow_points; ++j) {
        Vec E(X.m.dim());
        {
          double n2 = 0.0;
          std::vector<double> coef(basis.size());
          do {
            n2 = 0.0;
            for (auto& cf : coef) {
              cf = stream.gauss();
              n2 += cf * cf;
            }
          } while (n2 < 1e-12);
          const double inv = 1.0 / std::sqrt(n2);
          for (size_t k = 0; k < basis.size(); ++k)
            E = E + (coef[k] * inv) * basis[k];
        }
        const double rho = stream.uniform(0.0, 0.999);
        const double along = stream.uniform(-4.0, 4.0);
        const auto foot_pt = geom::geodesic_point(X, E, rho);
        const auto P = geom::geodesic_point(foot_pt, U, along);
        const auto p = geom::drop(P);
        if (!geom::cylinder_contains(line, p)) {
          ++t.skipped;  // construction fell outside (should not happen)
          continue;
        }
        ++t.tested;
        const double ds =
            capconn::sphere_dist(geom::radial_direction(p.coords()), axis_dir);
        if (ds > opening + 1e-9) ++t.violations;
      }
      parts[li] = t;
    });
    push_row("cylinder-radial-shadow", reduce(parts), ms_since(t0));
  }

  // 4. Vertical projection of an upper-hemisphere cap of opening alpha lands
  //    in the disk of the same radius around the projected center.
  {
    const auto t0 = Clock::now();
    std::vector<AuditTotals> parts(kChunks);
    report::parallel_for(kChunks, opts.workers, [&](int ci) {
      auto stream = stream_for(Seed{opts.seed, (uint64_t)ci}, "audit.vproj");
      AuditTotals t;
      const int n = chunk_share(proj_probes, kChunks, ci);
      for (int i = 0; i < n; ++i) {
        Vec z = unit_dir(dim, stream);
        if (z[dim - 1] < 0.0) z = -1.0 * z;
        if (!(z[dim - 1] > 1e-12)) {
          ++t.skipped;
          continue;
        }
        const double alpha = stream.uniform(0.01, kPi / 2.0);
        const auto ball = capconn::project_cap_vert(
            geom::SphericalCap(z, alpha));
        const Vec w = unit_dir_orthogonal(z, stream);
        const double theta = stream.uniform01() * alpha;
        const Vec pt = std::cos(theta) * z + std::sin(theta) * w;
        Vec proj(dim - 1);
        for (int k = 0; k < dim - 1; ++k) proj[k] = pt[k];
        ++t.tested;
        if (dist(proj, ball.center) > ball.radius + 1e-12) ++t.violations;
      }
      parts[ci] = t;
    });
    push_row("cap-vertical-projection", reduce(parts), ms_since(t0));
  }

  // 5. A point whose containing box is untouched at every level lies in no
  //    ball of the configuration that drove the coupling.
  {
    const auto t0 = Clock::now();
    const double r_min = std::pow(double(coupled_M), -coupled_n);
    const sampler::BallProcessSpec spec(
        coupled_dim, Box(Vec(coupled_dim, -1.0), Vec(coupled_dim, 2.0)), r_min,
        1.0, coupled_dim + 1);
    const auto balls =
        sampler::sample_balls(coupled_lambda, spec, Seed{opts.seed, 0});
    const auto coupled =
        mandelfp::couple_from_balls(balls, coupled_M, coupled_n);
    std::vector<AuditTotals> parts(kChunks);
    report::parallel_for(kChunks, opts.workers, [&](int ci) {
      auto stream = stream_for(Seed{opts.seed, (uint64_t)ci}, "audit.coupled");
      AuditTotals t;
      const int n = chunk_share(coupled_probes, kChunks, ci);
      for (int i = 0; i < n; ++i) {
        Vec q(coupled_dim);
        for (int k = 0; k < coupled_dim; ++k) q[k] = stream.uniform01();
        const bool touched =
            mandelfp::point_in_complement(coupled.grid, coupled_n, q);
        ++t.tested;
        if (!touched && fracball::point_covered(balls, q)) ++t.violations;
      }
      parts[ci] = t;
    });
    push_row("coupled-untouched-uncovered", reduce(parts), ms_since(t0));
  }

  write_file(opts, "coupling-audit.csv",
             csv_text("coupling-audit", cfg, opts.seed, table));
  std::cout << "coupling-audit: " << table.rows.size() << " audits, "
            << total_violations << " violations\n";
  return total_violations == 0 ? 0 : 3;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "identity-suite",  "coverage-scan", "cap-connectivity-scan",
      "crossing-scan",   "fp-separation", "coupling-audit"};
  return names;
}

int run_suite(const std::string& name, const report::ExperimentConfig& cfg,
              const SuiteOptions& opts) {
  if (opts.workers < 1)
    throw std::invalid_argument("workers must be at least 1");
  if (name == "identity-suite") return suite_identity(cfg, opts);
  if (name == "coverage-scan") return suite_coverage(cfg, opts);
  if (name == "cap-connectivity-scan") return suite_connectivity(cfg, opts);
  if (name == "crossing-scan") return suite_crossing(cfg, opts);
  if (name == "fp-separation") return suite_fp(cfg, opts);
  if (name == "coupling-audit") return suite_audit(cfg, opts);
  throw std::invalid_argument("unknown suite: " + name);
}

}  // namespace hypercyl::suites
