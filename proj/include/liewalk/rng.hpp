#pragma once

#include <cstdint>
#include <random>

namespace liewalk {

/// Reproducible random stream.
///
/// A stream is a pure function of (seed, stream_id): the same pair always
/// yields the same sequence, and distinct stream ids give statistically
/// independent sequences.  Child streams derived with fork() depend only on
/// the parent identity and the child index, never on how much of the parent
/// stream has been consumed.  All distributions are generated from the raw
/// engine output by explicit arithmetic, so results do not depend on any
/// library's distribution internals.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  /// Child stream fully determined by (seed, stream_id, child).
  [[nodiscard]] RngStream fork(std::uint64_t child) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1p-53; }

  /// Uniform on (0, 1]; safe as a logarithm argument.
  double uniform_pos() {
    return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1p-53;
  }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_below(std::uint64_t n);

  /// One pair of independent standard normals (Box-Muller).
  void normal_pair(double& z0, double& z1);

  /// Single standard normal (draws a pair, discards one).
  double normal();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 eng_;
};

/// SplitMix64 step; used for stream-id derivation and cheap hashing.
std::uint64_t splitmix64(std::uint64_t& state);

/// Stateless mix of two words into one; pure function of its inputs.
std::uint64_t mix64(std::uint64_t a, std::uint64_t b);

}  // namespace liewalk
