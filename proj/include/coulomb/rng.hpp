#pragma once
#include <cmath>
#include <cstdint>

namespace coulomb {

// Counter-based generator: every draw is a pure function of (key, counter),
// so parallel chains are reproducible irrespective of scheduling. The mixing
// is the splitmix64 finalizer applied to the keyed counter.
struct CounterRng {
  uint64_t key = 0;
  uint64_t ctr = 0;

  explicit CounterRng(uint64_t seed, uint64_t stream = 0)
      : key(mix(seed ^ mix(stream + 0x9E3779B97F4A7C15ULL))) {}

  static uint64_t mix(uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  uint64_t next_u64() { return mix(key + 0x632BE59BD9B4E019ULL * ++ctr); }

  // uniform in [0,1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in (0,1], safe under log()
  double next_open_double() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

  // Box-Muller; no rejection so the counter stream stays aligned
  double next_gaussian() {
    double u1 = next_open_double();
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  uint64_t next_below(uint64_t n) { return next_u64() % n; }
};

}  // namespace coulomb
