#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace tcpr {

// splitmix64: a tiny 64-bit generator with a single word of state. It is
// more than strong enough for sampling work, trivially seedable, and —
// unlike std::mt19937 — produces the same stream on every platform and
// standard library, which the byte-identical-output contract depends on.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1), 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound) via Lemire's multiply-shift. The modulo
  // bias is at most bound/2^64 — immaterial for the bounds used here — and
  // the mapping is branch-free and deterministic.
  uint64_t below(uint64_t bound) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  // Standard normal via Box–Muller; the second deviate of each pair is
  // cached so consecutive calls consume one uniform pair per two normals.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite; u2 in [0, 1).
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

 private:
  uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Fixed-point 64-bit mixer (the splitmix64 finalizer). Used to derive
// statistically independent child seeds from a (master seed, index) pair so
// that episode i's stream does not depend on how work was scheduled.
inline uint64_t mix64(uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t index) {
  return mix64(master + 0x9e3779b97f4a7c15ull * (index + 1));
}

}  // namespace tcpr
