#pragma once

#include <cstdint>
#include <random>

namespace greensentry {

// Seeded pseudo-randomness shared by the simulator, injection, splitting,
// initialization and batch shuffling.
//
// The bit source is std::mt19937_64, whose output sequence is fixed by the
// C++ standard. The library distributions are implementation-defined, so
// values are derived from raw 64-bit draws with these documented mappings:
//
//   uniform01()       (u >> 11) * 2^-53                     in [0, 1)
//   uniform(a, b)     a + (b - a) * uniform01()
//   below(n)          floor(u * n / 2^64)  (128-bit multiply-shift)
//   normal()          Box-Muller, cos branch only, u1 -> 1 - uniform01()
//
// Any implementation reproducing these mappings on top of MT19937-64 with
// the same seed produces the same streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for a (seed, stream id) pair, e.g. one per epoch.
  static Rng derive(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next() { return engine_(); }
  double uniform01();
  double uniform(double lo, double hi);
  std::uint64_t below(std::uint64_t n);
  /// Inclusive integer range [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi);
  double normal();
  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace greensentry
