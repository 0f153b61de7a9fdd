#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace simota {

/// splitmix64 generator.
///
/// Streams are addressed by draw site: `child("mosaic.center")` derives an
/// independent stream from the parent's *seed* (not its current state), so
/// adding or reordering draws at one site never shifts the values another
/// site sees. The mapping from site name to stream is FNV-1a 64 of the name
/// xor-folded into the seed and passed through the splitmix finalizer, which
/// any other language can reproduce bit for bit.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : seed_(seed), state_(seed) {}

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  std::uint64_t next() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0. Uses the multiply-high trick;
  /// the bias is below 2^-32 for every n used here.
  std::uint64_t below(std::uint64_t n) noexcept {
    __extension__ using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>(next()) * n) >> 64);
  }

  /// Standard normal via Box-Muller (two uniforms per call, no caching, so
  /// the draw count per call is fixed).
  double normal() noexcept {
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  SplitMix64 child(std::string_view site) const noexcept {
    return SplitMix64(mix(seed_ ^ fnv1a(site)));
  }
  SplitMix64 child(std::string_view site, std::uint64_t index) const noexcept {
    return SplitMix64(mix(mix(seed_ ^ fnv1a(site)) + index));
  }

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace simota
