#include <doctest.h>

#include <array>
#include <set>
#include <vector>

#include "fiesta/core/rng.hpp"

using namespace fiesta;

namespace {

std::vector<std::uint64_t> prefix(RngStream s, int n) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < n; ++i) out.push_back(s());
  return out;
}

}  // namespace

TEST_CASE("xoshiro256++ reference output") {
  // First outputs of the reference implementation from state {1, 2, 3, 4}.
  std::array<std::uint64_t, 4> s{1, 2, 3, 4};
  CHECK(xoshiro_next(s) == 41943041ULL);
  CHECK(xoshiro_next(s) == 58720359ULL);
  CHECK(xoshiro_next(s) == 3588806011781223ULL);
}

TEST_CASE("same seed and purpose reproduce the stream") {
  CHECK(prefix(rng_stream(42, Purpose::Posterior), 64) == prefix(rng_stream(42, Purpose::Posterior), 64));
  CHECK(prefix(keyed_stream(42, Purpose::Evaluator, 3, 9), 16) ==
        prefix(keyed_stream(42, Purpose::Evaluator, 3, 9), 16));
}

TEST_CASE("distinct purposes, seeds and keys give distinct streams") {
  std::set<std::vector<std::uint64_t>> seen;
  for (auto p : {Purpose::SplitSeed, Purpose::ModelSeed, Purpose::Posterior, Purpose::Coin,
                 Purpose::Evaluator}) {
    CHECK(seen.insert(prefix(rng_stream(42, p), 8)).second);
    CHECK(seen.insert(prefix(rng_stream(43, p), 8)).second);
  }
  CHECK(seen.insert(prefix(keyed_stream(42, Purpose::Evaluator, 0, 1), 8)).second);
  CHECK(seen.insert(prefix(keyed_stream(42, Purpose::Evaluator, 1, 0), 8)).second);
  CHECK(seen.insert(prefix(keyed_stream(42, Purpose::Evaluator, 1, 1), 8)).second);
}

TEST_CASE("uniform lies strictly inside (0, 1)") {
  CHECK(bits_to_open_unit(0) == 0x1p-53);
  CHECK(bits_to_open_unit(~0ULL) == 1.0 - 0x1p-53);
  CHECK(bits_to_open_unit(~0ULL) < 1.0);
  auto s = rng_stream(1, Purpose::Coin);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("below is in range and roughly uniform") {
  auto s = rng_stream(5, Purpose::Coin);
  std::array<int, 7> hist{};
  for (int i = 0; i < 70000; ++i) {
    const auto v = s.below(7);
    REQUIRE(v < 7);
    ++hist[v];
  }
  for (int h : hist) CHECK(std::abs(h - 10000) < 500);
  CHECK(s.below(1) == 0);
}

TEST_CASE("fork yields an independent child and advances the parent") {
  auto parent = rng_stream(9, Purpose::Posterior);
  const auto before = parent.state();
  auto child = parent.fork();
  CHECK(parent.state() != before);
  CHECK(child.state() != parent.state());
}
