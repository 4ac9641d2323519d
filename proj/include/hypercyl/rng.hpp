#pragma once

// Counter-based random streams.  A stream is keyed by (seed, replicate,
// module tag); its i-th output is a bijective 64-bit mix of key + i*phi,
// so replicates are mutually independent and can be evaluated in any order
// (worker scheduling never changes results).

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace hypercyl {

struct Seed {
  std::uint64_t value = 0;
  std::uint64_t replicate = 0;
};

namespace rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// Finalizer from the splitmix64 generator.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

class Stream {
 public:
  Stream(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return mix64(key_ + (++ctr_) * kGolden); }

  // Uniform on [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1): never returns 0 (safe under log).
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  // Standard normal via Box-Muller; pairs are cached.
  double gauss() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = uniform_open();
    double v = uniform01();
    double r = std::sqrt(-2.0 * std::log(u));
    double a = 6.283185307179586476925286766559 * v;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Poisson count with arbitrary non-negative mean.  Means above 500 are
  // split into chunks so the product-of-uniforms loop never underflows;
  // the sum of independent Poissons is exact.
  std::uint64_t poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson: negative mean");
    std::uint64_t total = 0;
    while (mean > 500.0) {
      total += poisson_small(500.0);
      mean -= 500.0;
    }
    return total + poisson_small(mean);
  }

 private:
  std::uint64_t poisson_small(double mean) {
    if (mean <= 0.0) return 0;
    const double floor_p = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    for (;;) {
      p *= uniform_open();
      if (p <= floor_p) break;
      ++k;
    }
    return k;
  }

  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rng

// Stream for a (seed, replicate, module-tag) triple.
inline rng::Stream stream_for(Seed s, std::string_view module_tag) {
  std::uint64_t key = rng::mix64(s.value ^ 0x243f6a8885a308d3ULL);
  key = rng::mix64(key ^ rng::mix64(s.replicate * rng::kGolden + 1));
  key = rng::mix64(key ^ rng::fnv1a(module_tag));
  return rng::Stream(key);
}

}  // namespace hypercyl
