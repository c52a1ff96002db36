#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace cevas {

inline constexpr const char* kVersion = "0.1.0";

/// Raised on malformed configuration. `path` points at the offending
/// field, e.g. "vehicles[2].waypoints[1].t".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message),
        path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// FNV-1a, used for config hashes and golden digests.
inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t seed = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::string& s,
                           std::uint64_t seed = 0xcbf29ce484222325ull) {
  return fnv1a(s.data(), s.size(), seed);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Seeded random stream with distribution code owned here, so that a
/// given seed produces the same draws on every platform and standard
/// library. One stream per (seed, camera, tick) keeps runs reproducible
/// no matter how work is scheduled.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

  static RandomStream for_tick(std::uint64_t seed, std::int64_t camera_id,
                               std::int64_t tick) {
    std::uint64_t h = splitmix64(seed ^ 0x5bd1e995u);
    h = splitmix64(h ^ static_cast<std::uint64_t>(camera_id));
    h = splitmix64(h ^ static_cast<std::uint64_t>(tick));
    return RandomStream(h);
  }

  /// Uniform in [0, 1).
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Box-Muller; the spare value is cached.
  double gaussian(double mean = 0.0, double sigma = 1.0) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + sigma * spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return mean + sigma * r * std::cos(theta);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  std::uint64_t next_u64() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cevas
