#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rsearch {

// splitmix64 step; used for seed derivation and hashing small tuples.
std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent per-candidate seed from a master seed and a
// (generation, index) pair. Stable across platforms.
std::uint64_t derive_seed(std::uint64_t master_seed, int generation, int index);

// Deterministic random source. All sampling is implemented on top of a
// xoshiro-free 64-bit generator (splitmix64 stream) so results do not depend
// on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(splitmix64(seed ^ 0x9e3779b97f4a7c15ull)) {}

  std::uint64_t next_u64();

  // Uniform in [0, 1).
  double uniform();

  // Uniform in [lo, hi).
  double uniform(double lo, double hi);

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n);

  // Standard normal via Box-Muller. Consumes two uniforms per pair.
  double normal();

  // Samples an index from unnormalized nonnegative weights.
  int categorical(const std::vector<double>& probs);

  // Fisher-Yates shuffle of an index vector.
  void shuffle(std::vector<int>& v);

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// FNV-1a 64-bit digest of a byte string, as fixed-width lowercase hex.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace rsearch
