#pragma once

#include <cstdint>
#include <random>

namespace mevsim {

// splitmix64 finalizer, used to key independent substreams off a master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Keyed mix of (master_seed, index): experiment results are a function of the
// master seed and the run index only, never of scheduling.
constexpr std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) + splitmix64(index + 1));
}

// A seeded random source with portable output. mt19937_64 is fully specified
// by the standard; the uniform draw below avoids std::*_distribution, whose
// algorithms are implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Skips n draws; one uniform01/bernoulli consumes exactly one draw.
  void discard(std::uint64_t n) { engine_.discard(n); }

  // Uniform in [0,1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mevsim
