#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace posefuse {

// Seeded 64-bit generator (splitmix64) with a polar-method gaussian on top.
// Self-contained so that seeded outputs are identical on every platform the
// project builds on; std::normal_distribution makes no such promise.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal, Marsaglia polar method with a cached spare.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u;
    double v;
    double s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derives a sub-seed from a scenario seed, a role tag and an optional run
// index. Distinct roles and runs get decorrelated streams while the whole
// scenario stays reproducible from one seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view role,
                                 std::uint64_t index = 0) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : role) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  Rng mixer(base ^ h ^ (index * 0x9e3779b97f4a7c15ull + 0x6a09e667f3bcc909ull));
  return mixer.next_u64();
}

}  // namespace posefuse
