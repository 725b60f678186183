#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

// Counter-based pseudo-randomness: every variate is a pure function of
// (key, counter), so derived weights need no storage and trial streams are
// reproducible regardless of scheduling.

namespace cubefpp {

// splitmix64 finalizer (Stafford mix13); full 64-bit avalanche.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Two mixing rounds with the key injected between them.
inline std::uint64_t prf64(std::uint64_t key, std::uint64_t counter) {
  std::uint64_t z = mix64(counter + 0x9e3779b97f4a7c15ull);
  return mix64(z ^ key);
}

// Uniform on the open interval (0,1): 2^53 equispaced midpoints.
inline double u01_open(std::uint64_t bits) {
  // (k + 0.5) * 2^-52 is exact for k < 2^52, so the range is exactly
  // [2^-53, 1 - 2^-53]; a 53-bit variant would round its top value to 1.0.
  return (double(bits >> 12) + 0.5) * 0x1.0p-52;
}

// Exp(1) by inversion, -log(1-U).  U < 1 strictly, so the result is a
// positive finite double.
inline double exp1_from_bits(std::uint64_t bits) {
  return -std::log1p(-u01_open(bits));
}

// Stream tags keep module sub-streams of one master seed disjoint.
inline constexpr std::uint64_t kStreamWeights = 0x77656967687473ull;   // "weights"
inline constexpr std::uint64_t kStreamFpp = 0x667070ull;               // "fpp"
inline constexpr std::uint64_t kStreamBtp = 0x627470ull;               // "btp"
inline constexpr std::uint64_t kStreamWalk = 0x77616c6bull;            // "walk"
inline constexpr std::uint64_t kStreamPilot = 0x70696c6f74ull;         // "pilot"

// Seed for one trial of one module: PRF(PRF(master, tag), trial).
inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial,
                                std::uint64_t stream_tag) {
  return prf64(prf64(master, stream_tag), trial);
}

// Sequential generator over a counter stream.  Satisfies
// UniformRandomBitGenerator so it can drive std distributions when needed.
class CounterRng {
 public:
  using result_type = std::uint64_t;
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return prf64(key_, counter_++); }

  double u01() { return u01_open((*this)()); }
  double exp1() { return exp1_from_bits((*this)()); }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace cubefpp
