#pragma once

#include <cstdint>
#include <string_view>

namespace binderlsc {

// Portable seeded generator (splitmix64-seeded xoshiro256**). The standard
// <random> distributions are implementation-defined, so the uniform and
// integer draws are implemented here to keep runs identical across
// toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Standard normal (Box-Muller, one value per call).
  double normal();

 private:
  std::uint64_t s_[4];
};

// Derives an independent sub-seed from a run seed and a stream name, e.g.
// derive_seed(seed, "fold-split"). Every randomized component takes its seed
// through here so that each one can be reproduced on its own.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

}  // namespace binderlsc
