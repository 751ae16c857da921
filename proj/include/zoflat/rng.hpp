#pragma once

#include <cstdint>

#include "zoflat/vec.hpp"

namespace zoflat {

// Deterministic random streams addressed by (seed, stream id). The same pair
// reproduces the same sequence bit for bit on a given build, and distinct
// stream ids give statistically independent sequences, so concurrent
// consumers never have to share generator state.

// Reserved stream-id ranges. Optimizer runs use ids in [0, 2^32); service
// streams live above so they can never collide with a run stream.
namespace stream_id {
inline constexpr std::uint64_t kInit = std::uint64_t{1} << 32;  // x0 draw, one per seed
inline constexpr std::uint64_t kFeatureMap = std::uint64_t{1} << 33;
// Single stream for the whole synthetic pool: train and held-out rows are
// consecutive draws against one separating hyperplane.
inline constexpr std::uint64_t kSynth = (std::uint64_t{1} << 33) + 1;
inline constexpr std::uint64_t kVerify = std::uint64_t{1} << 40;  // MC verification suites
}  // namespace stream_id

// SplitMix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    return mix64(z);
  }

 private:
  std::uint64_t state_;
};

// xoshiro256++ with state expanded from (seed, stream id) via SplitMix64.
// Gaussians come from Box-Muller over 53-bit uniforms, which keeps the
// sequence fully specified by this file (std::normal_distribution is
// implementation-defined and would break frozen test values).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  // Uniform on (0, 1] with 53-bit resolution; never 0, so log() stays finite.
  double next_unit();

  // Uniform on [0, n); rejection sampling keeps the draw exactly uniform.
  std::uint64_t next_below(std::uint64_t n);

  // Standard normal. Box-Muller produces two values per transform; the spare
  // is cached, so draw counts stay deterministic but not one-u64-per-call.
  double next_gaussian();

  void fill_gaussian(Vec& out);
  Vec gaussian_vector(std::size_t d);

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace zoflat
