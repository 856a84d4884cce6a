#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace flipflow {

// Counter-based generator built on the splitmix64 finalizer. The i-th output
// is a pure function of (key, i), so a stream can be positioned in O(1) and
// independent streams are derived by hashing a path of indices into the key.
// Every random quantity in the library is addressed as
// (run seed, stream path..., draw counter), which makes results independent
// of thread scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed + kGamma)) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Child stream addressed by an index path, e.g. {trajectory, draw_block}.
  Rng child(std::initializer_list<std::uint64_t> path) const {
    Rng r(*this);
    for (std::uint64_t x : path) {
      r.key_ = mix(r.key_ + kGamma * (x + 1));
    }
    r.counter_ = 0;
    return r;
  }
  Rng child(std::uint64_t a) const { return child({a}); }
  Rng child(std::uint64_t a, std::uint64_t b) const { return child({a, b}); }

  std::uint64_t next_u64() { return mix(key_ + kGamma * ++counter_); }

  void set_counter(std::uint64_t c) { counter_ = c; }
  std::uint64_t counter() const { return counter_; }

  // Strictly inside (0, 1); both endpoints are unreachable.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Box-Muller; consumes two uniforms per pair, second value cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    double m = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = m * std::sin(a);
    have_spare_ = true;
    return m * std::cos(a);
  }

  double exponential(double rate) { return -std::log(uniform01()) / rate; }

  // Marsaglia-Tsang; shape < 1 handled by the boost u^(1/shape) trick.
  double gamma(double shape, double scale) {
    if (shape < 1.0) {
      double u = uniform01();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return scale * d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
        return scale * d * v;
      }
    }
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace flipflow
