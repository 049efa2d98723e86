#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "relucert/detail/pair_math.hpp"

namespace relucert::detail {

// splitmix64. Scrambles consecutive seeds/indices into well-separated states.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Box-Muller over mt19937_64. Self-contained so that artifacts are
// reproducible across standard libraries, not just across runs.
class GaussianStream {
 public:
  explicit GaussianStream(std::mt19937_64& rng) : rng_(rng) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;          // [0, 1)
    const double rad = std::sqrt(-2.0 * std::log(u1));
    spare_ = rad * std::sin(kTwoPi * u2);
    have_spare_ = true;
    return rad * std::cos(kTwoPi * u2);
  }

 private:
  std::mt19937_64& rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace relucert::detail
