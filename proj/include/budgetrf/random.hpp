#pragma once

#include <cstdint>

namespace budgetrf {

namespace detail {

/// splitmix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Named substreams. All randomness in the library flows from one master
/// seed through derive_seed(master, tag, index), so any tree, repeat or
/// sweep point can be reproduced in isolation.
enum class StreamTag : std::uint64_t {
  Tree = 0x74726565,       // stump candidates while growing tree i
  Bootstrap = 0x626f6f74,  // bootstrap sample for tree i
  Alpha = 0x616c7068,      // sweep: impurity-parameter slot i
  Repeat = 0x72657074,     // sweep: repeat slot i
  Split = 0x73706c74,      // train/validation/test shuffling
  Instance = 0x696e7374,   // randomized verification instances
};

/// Deterministic substream derivation: a two-stage splitmix64 chain.
inline std::uint64_t derive_seed(std::uint64_t master, StreamTag tag, std::uint64_t index) {
  return detail::mix64(detail::mix64(master ^ static_cast<std::uint64_t>(tag)) + index);
}

/// Small deterministic generator (splitmix64). Identical output on every
/// platform; no libstdc++ distribution objects are involved, so sequences
/// are stable across standard-library implementations too.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform draw from [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Uniform double in [lo, hi]; returns lo when the range is empty.
  double uniform_double(double lo, double hi) {
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  bool bernoulli(double p) { return uniform_double(0.0, 1.0) < p; }

 private:
  std::uint64_t state_;
};

}  // namespace budgetrf
