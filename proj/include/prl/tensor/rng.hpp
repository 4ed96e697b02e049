#pragma once

#include <cstdint>
#include <limits>

namespace prl {

/// Counter-based random stream keyed by (seed, stream-id).
///
/// Draw i of a stream is a pure function of (seed, stream-id, i), so a
/// stream can be replayed exactly and `split` derives independent child
/// streams without advancing the parent. Sequences are reproducible within
/// one build; no cross-build guarantee is made.
///
/// Satisfies UniformRandomBitGenerator so it can drive std::shuffle.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();
  result_type operator()() { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n); n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  double normal();
  bool bernoulli(double p);

  /// Child stream whose id is derived from this stream's id and `child`.
  RngStream split(std::uint64_t child) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// 64-bit finalizer (SplitMix64 / Murmur3 style avalanche).
std::uint64_t mix64(std::uint64_t x);

}  // namespace prl
