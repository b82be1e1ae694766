#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace rcmc {

/// Seeded RNG used everywhere randomness is needed. The generator and the
/// gaussian transform are pinned ("mt19937_64/boxmuller-v1", recorded in run
/// metadata) so that goldens stay bitwise stable within one build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  static constexpr const char* algorithm() { return "mt19937_64/boxmuller-v1"; }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(eng_()) * n >> 64);
  }

  /// Standard normal via Box-Muller (trig form, cached pair).
  double gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 6.283185307179586476925286766559 * u2;
    cached_ = radius * std::sin(angle);
    have_cached_ = true;
    return radius * std::cos(angle);
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

/// Independent stream for a parallel run: master seed combined with the run
/// index through a splitmix64-style mix, so streams do not overlap even for
/// adjacent indices.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t run_index) {
  std::uint64_t z = seed ^ (run_index + 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace rcmc
