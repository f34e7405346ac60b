#pragma once

#include <cstdint>

namespace recall {

// Counter-based seeded generator with independent streams. The sequence for a
// given (seed, stream) pair is a pure function of 64-bit integer arithmetic,
// so draws are identical across platforms and across runs regardless of how
// many other streams are in flight. Streams derived for different indices are
// statistically independent (splitmix64 output mixing).
class Rng {
 public:
  static constexpr const char* kAlgorithm = "splitmix64-stream";

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // Derive a child stream from this generator's identity; does not consume
  // draws from this stream.
  Rng split(std::uint64_t substream) const;

  std::uint64_t next_u64();
  // Uniform in [0, 1), 53-bit mantissa.
  double next_double();
  // Uniform integer in [0, n), rejection-sampled (unbiased).
  std::uint64_t next_below(std::uint64_t n);
  // Standard normal via Marsaglia polar; one value cached.
  double next_gaussian();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t counter_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace recall
