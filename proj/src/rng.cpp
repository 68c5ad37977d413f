#include "mnlrank/rng.hpp"

namespace mnlrank {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

SimulationRng::SimulationRng(std::uint64_t seed)
    : engine_(splitmix64(seed)), seed_(seed) {}

double SimulationRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t SimulationRng::below(std::uint64_t n) {
  // Rejection on the top of the range keeps the result exactly uniform.
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

SimulationRng SimulationRng::split() {
  ++children_;
  return SimulationRng(splitmix64(seed_ ^ splitmix64(children_ * 0xd1b54a32d192ed03ULL)));
}

}  // namespace mnlrank
