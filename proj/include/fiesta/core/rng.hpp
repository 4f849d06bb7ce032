#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <limits>

namespace fiesta {

// What a random stream is used for.  Streams of different purposes derived
// from one campaign seed are independent of each other.
enum class Purpose : std::uint64_t {
  SplitSeed = 1,
  ModelSeed = 2,
  Posterior = 3,
  Coin = 4,
  Evaluator = 5,
};

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  return mix64(state);
}

// One step of xoshiro256++ on a 4-word state.
constexpr std::uint64_t xoshiro_next(std::array<std::uint64_t, 4>& s) {
  const std::uint64_t result = std::rotl(s[0] + s[3], 23) + s[0];
  const std::uint64_t t = s[1] << 17;
  s[2] ^= s[0];
  s[3] ^= s[1];
  s[1] ^= s[2];
  s[0] ^= s[3];
  s[2] ^= t;
  s[3] = std::rotl(s[3], 45);
  return result;
}

// Maps 64 random bits to a double in the open interval (0, 1).  The top 52
// bits select one of 2^52 equally spaced midpoints.
inline double bits_to_open_unit(std::uint64_t x) {
  const double d = std::bit_cast<double>((x >> 12) | 0x3ff0000000000000ULL);
  return (d - 1.0) + 0x1p-53;
}

// Deterministic xoshiro256++ stream.  Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  // Seeds the state by expanding `seed` through splitmix64.
  explicit RngStream(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return xoshiro_next(state_); }

  double uniform() { return bits_to_open_unit((*this)()); }

  // Unbiased integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

  // Independent child stream; advances this stream by one draw.
  RngStream fork();

  const std::array<std::uint64_t, 4>& state() const { return state_; }

 private:
  std::array<std::uint64_t, 4> state_{};
};

RngStream rng_stream(std::uint64_t campaign_seed, Purpose purpose);

// Stream addressed by (campaign seed, purpose, key_a, key_b), e.g. a
// synthetic arm draw keyed by model index and request sequence.
RngStream keyed_stream(std::uint64_t campaign_seed, Purpose purpose, std::uint64_t key_a,
                       std::uint64_t key_b);

}  // namespace fiesta
