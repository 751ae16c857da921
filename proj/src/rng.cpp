#include "zoflat/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace zoflat {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) {
  // The stream id goes through its own finalizer before entering the
  // expander. Seeding SplitMix64 at (base + id * golden) instead would make
  // neighbouring streams shifted copies of each other, because SplitMix64
  // itself walks its state by the golden-ratio increment.
  SplitMix64 expand(mix64(seed) ^ mix64(~stream));
  for (auto& word : s_) word = expand.next();
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // all-zero state is absorbing
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::next_unit() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

std::uint64_t RngStream::next_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("next_below: n must be positive");
  const std::uint64_t limit = n * (UINT64_MAX / n);
  for (;;) {
    const std::uint64_t v = next_u64();
    if (v < limit) return v % n;
  }
}

double RngStream::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = next_unit();
  const double u2 = next_unit();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

void RngStream::fill_gaussian(Vec& out) {
  for (double& v : out) v = next_gaussian();
}

Vec RngStream::gaussian_vector(std::size_t d) {
  Vec out(d);
  fill_gaussian(out);
  return out;
}

}  // namespace zoflat
