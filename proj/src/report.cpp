#include "hypercyl/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "hypercyl/rng.hpp"

namespace hypercyl::report {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key");
    if (cfg.kv_.count(key))
      throw std::invalid_argument("config: duplicate key '" + key + "'");
    cfg.kv_[key] = value;
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string ExperimentConfig::serialize() const {
  std::string out;
  for (const auto& [k, v] : kv_) {
    out += k;
    out += " = ";
    out += v;
    out += "\n";
  }
  return out;
}

std::uint64_t ExperimentConfig::hash() const { return rng::fnv1a(serialize()); }

bool ExperimentConfig::has(const std::string& key) const {
  return kv_.count(key) > 0;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

std::string ExperimentConfig::get_string(const std::string& key,
                                         const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double ExperimentConfig::get_double(const std::string& key,
                                    double fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(it->second, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': not a number");
  }
  if (pos != it->second.size())
    throw std::invalid_argument("config key '" + key + "': trailing junk");
  return v;
}

std::int64_t ExperimentConfig::get_int(const std::string& key,
                                       std::int64_t fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::size_t pos = 0;
  long long v;
  try {
    v = std::stoll(it->second, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': not an integer");
  }
  if (pos != it->second.size())
    throw std::invalid_argument("config key '" + key + "': trailing junk");
  return v;
}

std::vector<double> ExperimentConfig::get_grid(
    const std::string& key, const std::vector<double>& fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::vector<double> out;
  std::string item;
  std::istringstream in(it->second);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty())
      throw std::invalid_argument("config key '" + key + "': empty list item");
    std::size_t pos = 0;
    out.push_back(std::stod(item, &pos));
    if (pos != item.size())
      throw std::invalid_argument("config key '" + key + "': bad list item");
  }
  if (out.empty())
    throw std::invalid_argument("config key '" + key + "': empty list");
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_csv(std::ostream& os, const std::string& suite,
               const ExperimentConfig& cfg, std::uint64_t seed,
               const CsvTable& table) {
  char hash_hex[24];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(cfg.hash()));
  os << "# hypercyl-csv v1\n";
  os << "# suite=" << suite << "\n";
  os << "# config_hash=" << hash_hex << "\n";
  os << "# seed=" << seed << "\n";
  os << "# tool_version=" << kToolVersion << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    os << (i ? "," : "") << table.columns[i];
  os << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
}

namespace {

// Fixed-precision coordinate formatting keeps SVG output byte-stable.
std::string coord(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string svg_curve(const std::vector<CurvePoint>& points,
                      const std::string& x_label, const std::string& y_label) {
  const double width = 640, height = 420;
  const double ml = 70, mr = 20, mt = 20, mb = 50;
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  if (!points.empty()) {
    x_lo = x_hi = points.front().x;
    y_lo = y_hi = std::min(points.front().lo, points.front().y);
    for (const auto& p : points) {
      x_lo = std::min(x_lo, p.x);
      x_hi = std::max(x_hi, p.x);
      y_lo = std::min({y_lo, p.lo, p.y});
      y_hi = std::max({y_hi, p.hi, p.y});
    }
    if (x_hi <= x_lo) x_hi = x_lo + 1;
    if (y_hi <= y_lo) y_hi = y_lo + 1;
  }
  auto px = [&](double x) {
    return ml + (x - x_lo) / (x_hi - x_lo) * (width - ml - mr);
  };
  auto py = [&](double y) {
    return height - mb - (y - y_lo) / (y_hi - y_lo) * (height - mt - mb);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
     << width << "\" height=\"" << height << "\" viewBox=\"0 0 " << width
     << " " << height << "\">\n";
  os << "<rect width=\"" << width << "\" height=\"" << height
     << "\" fill=\"white\"/>\n";
  // axes
  os << "<line x1=\"" << coord(ml) << "\" y1=\"" << coord(height - mb)
     << "\" x2=\"" << coord(width - mr) << "\" y2=\"" << coord(height - mb)
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << coord(ml) << "\" y1=\"" << coord(mt) << "\" x2=\""
     << coord(ml) << "\" y2=\"" << coord(height - mb)
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << coord(width / 2) << "\" y=\"" << coord(height - 12)
     << "\" font-size=\"14\" text-anchor=\"middle\">" << x_label
     << "</text>\n";
  os << "<text x=\"16\" y=\"" << coord(height / 2)
     << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << coord(height / 2) << ")\">" << y_label << "</text>\n";
  os << "<text x=\"" << coord(ml) << "\" y=\"" << coord(height - mb + 18)
     << "\" font-size=\"11\" text-anchor=\"middle\">" << format_double(x_lo)
     << "</text>\n";
  os << "<text x=\"" << coord(width - mr) << "\" y=\""
     << coord(height - mb + 18) << "\" font-size=\"11\" text-anchor=\"middle\">"
     << format_double(x_hi) << "</text>\n";
  os << "<text x=\"" << coord(ml - 8) << "\" y=\"" << coord(height - mb + 4)
     << "\" font-size=\"11\" text-anchor=\"end\">" << format_double(y_lo)
     << "</text>\n";
  os << "<text x=\"" << coord(ml - 8) << "\" y=\"" << coord(mt + 4)
     << "\" font-size=\"11\" text-anchor=\"end\">" << format_double(y_hi)
     << "</text>\n";

  if (!points.empty()) {
    // confidence band
    os << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.5\" stroke=\"none\" "
          "points=\"";
    for (const auto& p : points) os << coord(px(p.x)) << "," << coord(py(p.hi)) << " ";
    for (auto it = points.rbegin(); it != points.rend(); ++it)
      os << coord(px(it->x)) << "," << coord(py(it->lo)) << " ";
    os << "\"/>\n";
    // whiskers
    for (const auto& p : points) {
      os << "<line x1=\"" << coord(px(p.x)) << "\" y1=\"" << coord(py(p.lo))
         << "\" x2=\"" << coord(px(p.x)) << "\" y2=\"" << coord(py(p.hi))
         << "\" stroke=\"#3182bd\"/>\n";
    }
    // curve
    os << "<polyline fill=\"none\" stroke=\"#08519c\" stroke-width=\"1.5\" "
          "points=\"";
    for (const auto& p : points) os << coord(px(p.x)) << "," << coord(py(p.y)) << " ";
    os << "\"/>\n";
    for (const auto& p : points) {
      os << "<circle cx=\"" << coord(px(p.x)) << "\" cy=\"" << coord(py(p.y))
         << "\" r=\"3\" fill=\"#08519c\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_ball_scene(const sampler::BallConfig& cfg,
                           const fracball::Annulus* annulus) {
  if (cfg.spec.dim != 2)
    throw std::invalid_argument("svg_ball_scene: planar configurations only");
  const double size = 600;
  const double lo = cfg.spec.window.lo[0], hi = cfg.spec.window.hi[0];
  const double lo1 = cfg.spec.window.lo[1], hi1 = cfg.spec.window.hi[1];
  const double span = std::max(hi - lo, hi1 - lo1);
  auto sx = [&](double x) { return (x - lo) / span * size; };
  auto sy = [&](double y) { return size - (y - lo1) / span * size; };
  auto sr = [&](double r) { return r / span * size; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
     << size << "\" height=\"" << size << "\" viewBox=\"0 0 " << size << " "
     << size << "\">\n";
  os << "<rect width=\"" << size << "\" height=\"" << size
     << "\" fill=\"white\"/>\n";
  for (const auto& ball : cfg.balls) {
    os << "<circle cx=\"" << coord(sx(ball.center[0])) << "\" cy=\""
       << coord(sy(ball.center[1])) << "\" r=\"" << coord(sr(ball.radius))
       << "\" fill=\"#6baed6\" fill-opacity=\"0.6\" stroke=\"#2171b5\" "
          "stroke-width=\"0.5\"/>\n";
  }
  if (annulus) {
    for (double a : {annulus->a, annulus->b}) {
      os << "<rect x=\"" << coord(sx(-a)) << "\" y=\"" << coord(sy(a))
         << "\" width=\"" << coord(2 * sr(a)) << "\" height=\""
         << coord(2 * sr(a))
         << "\" fill=\"none\" stroke=\"#cb181d\" stroke-width=\"1.5\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

void parallel_for(int total, int workers, const std::function<void(int)>& fn) {
  if (total <= 0) return;
  workers = std::max(1, std::min(workers, total));
  if (workers == 1) {
    for (int i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= total || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace hypercyl::report
