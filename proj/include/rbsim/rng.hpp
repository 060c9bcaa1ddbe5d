#ifndef RBSIM_RNG_HPP
#define RBSIM_RNG_HPP

#include <cstdint>

namespace rbsim {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based random stream. A stream is an opaque 64-bit key derived by
/// hashing the seed with domain words (purpose tag, sequence length, sequence
/// id, ...); draw i of a stream is mix64(key + i * golden) — the splitmix64
/// sequence starting at the key. Draws are pure functions of (key, i), so any
/// evaluation order, thread count or replay gives identical values.
class RngStream {
 public:
  explicit constexpr RngStream(std::uint64_t seed) : key_(mix64(seed)) {}

  /// Derived substream; use one word per tuple element.
  constexpr RngStream child(std::uint64_t word) const {
    return RngStream(Raw{}, mix64(key_ ^ mix64(word)));
  }

  constexpr std::uint64_t bits(std::uint64_t counter) const {
    return mix64(key_ + counter * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform double in [0, 1), 53 significant bits.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in {0, ..., n-1} for small n.
  std::uint32_t below(std::uint64_t counter, std::uint32_t n) const {
    auto v = static_cast<std::uint32_t>(uniform(counter) * static_cast<double>(n));
    return v >= n ? n - 1 : v;
  }

 private:
  struct Raw {};
  constexpr RngStream(Raw, std::uint64_t key) : key_(key) {}
  std::uint64_t key_;
};

}  // namespace rbsim

#endif
