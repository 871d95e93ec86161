#pragma once

#include <cstdint>
#include <random>

namespace qrna {

// Deterministic randomness used by the solvers and the trainer.
//
// Generator: std::mt19937_64, seeded directly with the given seed.
// Draw sequence (fixed so runs are reproducible across builds):
//   u64()     one raw engine output
//   uniform() one u64 draw mapped to [0,1) as (x >> 11) * 2^-53
//   sign()    one uniform draw; -1 if < 0.5 else +1
//   index(n)  one u64 draw, reduced modulo n
// Independent substreams (per restart, per dataset entry, ...) are derived
// with splitmix64: substream_seed(seed, k) = splitmix64(seed ^ GOLDEN*(k+1)).
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t u64() { return engine_(); }

  double uniform() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  int sign() { return uniform() < 0.5 ? -1 : +1; }

  uint64_t index(uint64_t n) { return u64() % n; }

 private:
  std::mt19937_64 engine_;
};

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline uint64_t substream_seed(uint64_t seed, uint64_t stream) {
  return splitmix64(seed ^ (0x9E3779B97F4A7C15ull * (stream + 1)));
}

}  // namespace qrna
