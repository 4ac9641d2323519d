#pragma once

// Experiment plumbing: flat key=value configuration with lossless
// round-tripping, versioned CSV reports, deterministic SVG plots, and a
// replicate-parallel driver whose results are independent of worker count.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "hypercyl/fracball.hpp"
#include "hypercyl/sampler.hpp"

namespace hypercyl::report {

inline constexpr const char* kToolVersion = "0.1.0";

// Flat key=value text config.  Lines are `key = value`; blank lines and
// lines starting with '#' are ignored.  Keys are unique; serialization is
// canonical (sorted keys), so parse(serialize(x)) == x.
class ExperimentConfig {
 public:
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);

  std::string serialize() const;
  std::uint64_t hash() const;  // FNV-1a over the canonical serialization

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  // Comma-separated list of reals.
  std::vector<double> get_grid(const std::string& key,
                               const std::vector<double>& fallback) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

// Deterministic numeric formatting used for every CSV/SVG number.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> columns;            // elapsed_ms goes last
  std::vector<std::vector<std::string>> rows;  // preformatted cells
};

// Emits the versioned comment header (schema, suite, config hash, seed, tool
// version), the column row, and the data rows.
void write_csv(std::ostream& os, const std::string& suite,
               const ExperimentConfig& cfg, std::uint64_t seed,
               const CsvTable& table);

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Line plot with a confidence band and per-point whiskers; byte-deterministic
// for fixed input.
std::string svg_curve(const std::vector<CurvePoint>& points,
                      const std::string& x_label, const std::string& y_label);

// Draws a planar ball configuration, optionally with annulus boxes.
std::string svg_ball_scene(const sampler::BallConfig& cfg,
                           const fracball::Annulus* annulus);

// Runs fn(0..total-1), distributing indices across up to `workers` threads.
// fn must only write to caller-owned slots indexed by its argument, which
// keeps the merged result independent of scheduling.
void parallel_for(int total, int workers,
                  const std::function<void(int)>& fn);

}  // namespace hypercyl::report
