#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace pasa {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Combine a base seed with a salt (stage id, parameter name hash, ...).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  return splitmix64(seed ^ splitmix64(salt));
}

// Deterministic random stream. All floating-point draws are derived from
// raw mt19937_64 words with fixed arithmetic, so sequences are reproducible
// independent of the standard library's distribution implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in the open interval (0, 1).
  double next_unit() {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    if (u <= 0.0) return 0x1.0p-53;
    if (u >= 1.0) return 1.0 - 0x1.0p-53;
    return u;
  }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Box-Muller; consumes two words per pair, caches the second value.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Standard Gumbel(0, 1) noise: -log(-log(u)).
  double next_gumbel() { return -std::log(-std::log(next_unit())); }

  // Integer in [0, n).
  std::size_t next_index(std::size_t n) {
    return static_cast<std::size_t>(engine_() % static_cast<std::uint64_t>(n));
  }

  // In-place Fisher-Yates; deterministic unlike std::shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = next_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // Draw from a discrete distribution given by non-negative weights.
  std::size_t next_weighted(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double r = next_unit() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      r -= weights[i];
      if (r <= 0.0) return i;
    }
    return weights.size() - 1;
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pasa
