#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace mnlrank {

// Seedable generator with a platform-independent output stream. All derived
// draws (uniforms, bounded integers) are computed here rather than through
// <random> distributions, whose algorithms differ across standard libraries.
class SimulationRng {
 public:
  using result_type = std::uint64_t;

  explicit SimulationRng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();

  // Uniform on (0, 1]; safe to pass to log().
  double uniform_positive() { return 1.0 - uniform(); }

  // Uniform integer on [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  // Child stream that is independent of this one and of other children.
  SimulationRng split();

  // UniformRandomBitGenerator interface.
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::uint64_t children_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Fisher-Yates shuffle driven by SimulationRng::below.
template <typename It>
void shuffle(It first, It last, SimulationRng& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = rng.below(i);
    std::swap(first[i - 1], first[j]);
  }
}

}  // namespace mnlrank
