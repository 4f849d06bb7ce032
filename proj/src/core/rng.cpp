#include "fiesta/core/rng.hpp"

namespace fiesta {

RngStream::RngStream(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& w : state_) w = splitmix64(sm);
  // xoshiro must never run from the all-zero state.
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

std::uint64_t RngStream::below(std::uint64_t n) {
  // Reject the 2^64 mod n smallest values so every residue is equally likely.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t x = (*this)();
    if (x >= threshold) return x % n;
  }
}

RngStream RngStream::fork() { return RngStream(mix64((*this)() ^ 0x5851f42d4c957f2dULL)); }

RngStream rng_stream(std::uint64_t campaign_seed, Purpose purpose) {
  const auto p = static_cast<std::uint64_t>(purpose);
  return RngStream(mix64(campaign_seed) ^ mix64(p * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
}

RngStream keyed_stream(std::uint64_t campaign_seed, Purpose purpose, std::uint64_t key_a,
                       std::uint64_t key_b) {
  std::uint64_t h = mix64(campaign_seed + 0x2545f4914f6cdd1dULL);
  h = mix64(h ^ (static_cast<std::uint64_t>(purpose) * 0x9e3779b97f4a7c15ULL));
  h = mix64(h ^ (key_a * 0xd1342543de82ef95ULL + 1));
  h = mix64(h ^ (key_b * 0xaf251af3b0f025b5ULL + 3));
  return RngStream(h);
}

}  // namespace fiesta
