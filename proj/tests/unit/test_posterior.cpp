#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "fiesta/core/errors.hpp"
#include "fiesta/kernels/kernels.hpp"
#include "fiesta/kernels/math.hpp"
#include "fiesta/posterior/posterior.hpp"

using namespace fiesta;

namespace {

ModelStats stats_of(std::initializer_list<double> xs) {
  return ModelStats::from_scores(std::vector<double>(xs));
}

double quantile(std::vector<double> xs, double p) {
  std::sort(xs.begin(), xs.end());
  return xs[static_cast<std::size_t>(p * static_cast<double>(xs.size() - 1))];
}

}  // namespace

TEST_CASE("posterior_from_stats") {
  SUBCASE("degenerate variance hits the floor") {
    const auto p = posterior_from_stats(stats_of({0.5, 0.5, 0.5}));
    CHECK(p.center == 0.5);
    CHECK(p.dof == 1.0);
    CHECK(p.scale == doctest::Approx(std::sqrt(kVarianceFloor / 3.0)).epsilon(1e-12));
    CHECK(p.scale > 0.0);
  }
  SUBCASE("0.6 0.7 0.8") {
    const auto p = posterior_from_stats(stats_of({0.6, 0.7, 0.8}));
    CHECK(p.center == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(p.dof == 1.0);
    CHECK(p.scale == doctest::Approx(0.08164965809277261).epsilon(1e-9));
  }
  SUBCASE("fewer than three evaluations") {
    CHECK_THROWS_AS(posterior_from_stats(stats_of({0.5, 0.6})), InsufficientData);
    CHECK_THROWS_AS(posterior_from_stats(ModelStats{}), InsufficientData);
  }
}

TEST_CASE("posterior_sample") {
  SUBCASE("tiny scale concentrates at the center") {
    auto s = rng_stream(1, Purpose::Posterior);
    const PosteriorParams p{0.42, 1e-12, 5.0};
    for (int i = 0; i < 1000; ++i) CHECK(std::abs(posterior_sample(p, s) - 0.42) < 1e-8);
  }
  SUBCASE("dof 5 passes KS at level 0.01") {
    auto s = rng_stream(2, Purpose::Posterior);
    const PosteriorParams p{1.0, 2.0, 5.0};
    std::vector<double> xs(100000);
    for (auto& x : xs) x = (posterior_sample(p, s) - p.center) / p.scale;
    std::sort(xs.begin(), xs.end());
    const boost::math::students_t dist(5.0);
    double d = 0.0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double f = boost::math::cdf(dist, xs[i]);
      d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    CHECK(d * std::sqrt(n) < 1.628);
  }
  SUBCASE("dof 1 is Cauchy: median at center, quartiles at center +- scale") {
    auto s = rng_stream(3, Purpose::Posterior);
    const PosteriorParams p{0.3, 0.05, 1.0};
    std::vector<double> xs(100000);
    for (auto& x : xs) x = posterior_sample(p, s);
    // Quartile standard error of the Cauchy sample quantile: sqrt(p(1-p)/n)/f(q).
    const double se_median = std::sqrt(0.25 / 1e5) * std::numbers::pi * p.scale;
    const double se_quartile = std::sqrt(0.1875 / 1e5) * 2.0 * std::numbers::pi * p.scale;
    CHECK(std::abs(quantile(xs, 0.5) - p.center) < 4 * se_median);
    CHECK(std::abs(quantile(xs, 0.25) - (p.center - p.scale)) < 4 * se_quartile);
    CHECK(std::abs(quantile(xs, 0.75) - (p.center + p.scale)) < 4 * se_quartile);
  }
}

TEST_CASE("estimate_pi examples") {
  SUBCASE("identical stats are symmetric") {
    const auto st = stats_of({0.61, 0.64, 0.6});
    for (std::size_t n : {2u, 3u, 5u}) {
      std::vector<ModelStats> all(n, st);
      auto s = rng_stream(n, Purpose::Posterior);
      const auto b = estimate_pi(all, 100000, s);
      const double p = 1.0 / static_cast<double>(n);
      const double sigma = std::sqrt(p * (1 - p) / 1e5);
      for (std::size_t m = 0; m < n; ++m) CHECK(std::abs(b.pi(m) - p) <= 3 * sigma);
    }
  }
  SUBCASE("two separated models against the Cauchy-difference oracle") {
    // dof 1 with equal scales s: the difference is Cauchy with scale 2s, so
    // P(second > first) = 1/2 + atan(0.2 / (2s)) / pi = 0.9740676.
    const std::vector<ModelStats> st{stats_of({0.60, 0.61, 0.62}), stats_of({0.80, 0.81, 0.82})};
    auto s = rng_stream(4, Purpose::Posterior);
    const auto b = estimate_pi(st, 100000, s);
    const double oracle = 0.9740676320173076;
    CHECK(std::abs(b.pi(1) - oracle) < 4 * std::sqrt(oracle * (1 - oracle) / 1e5));
  }
  SUBCASE("a single candidate") {
    const std::vector<ModelStats> st{stats_of({0.1, 0.2, 0.3})};
    auto s = rng_stream(5, Purpose::Posterior);
    const auto b = estimate_pi(st, 1000, s);
    CHECK(b.pi() == std::vector<double>{1.0});
  }
  SUBCASE("insufficient data") {
    const std::vector<ModelStats> st{stats_of({0.1, 0.2, 0.3}), stats_of({0.1, 0.2})};
    auto s = rng_stream(6, Purpose::Posterior);
    CHECK_THROWS_AS(estimate_pi(st, 1000, s), InsufficientData);
  }
  SUBCASE("floor-variance twins split evenly") {
    const std::vector<ModelStats> st(2, stats_of({0.5, 0.5, 0.5}));
    auto s = rng_stream(7, Purpose::Posterior);
    const auto b = estimate_pi(st, 20000, s);
    CHECK(b.wins[0] + b.wins[1] == 20000);
    CHECK(std::abs(b.pi(0) - 0.5) < 0.02);
  }
}

TEST_CASE("estimate_pi is a valid probability vector") {
  auto gen = rng_stream(8, Purpose::Coin);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + gen.below(8);
    std::vector<ModelStats> st;
    for (std::size_t m = 0; m < n; ++m) {
      ModelStats x;
      const std::uint64_t count = 3 + gen.below(20);
      for (std::uint64_t i = 0; i < count; ++i) x = x.updated(gen.uniform() * (1 + m % 3));
      st.push_back(x);
    }
    const std::uint64_t mc = 1 + gen.below(5000);
    auto s = rng_stream(100 + trial, Purpose::Posterior);
    const auto b = estimate_pi(st, mc, s);
    REQUIRE(b.size() == n);
    CHECK(std::accumulate(b.wins.begin(), b.wins.end(), std::uint64_t{0}) == mc);
    double sum = 0.0;
    for (double p : b.pi()) {
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
      sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("identity transform leaves the belief bit-identical") {
  const std::vector<double> raw_a{0.61, 0.65, 0.63, 0.7};
  const std::vector<double> raw_b{0.66, 0.62, 0.69};
  ModelStats a, b, ta, tb;
  for (double x : raw_a) {
    a = a.updated(x);
    ta = ta.updated(transform_score(x, TransformMode::identity()));
  }
  for (double x : raw_b) {
    b = b.updated(x);
    tb = tb.updated(transform_score(x, TransformMode::identity()));
  }
  auto s1 = rng_stream(9, Purpose::Posterior);
  auto s2 = rng_stream(9, Purpose::Posterior);
  const std::vector<ModelStats> plain{a, b};
  const std::vector<ModelStats> transformed{ta, tb};
  CHECK(estimate_pi(plain, 50000, s1).wins == estimate_pi(transformed, 50000, s2).wins);
}

TEST_CASE("raising one model's mean never lowers its probability") {
  // With a shared stream the standard-t draws are identical, so shifting one
  // center only moves that row up.
  const std::vector<ModelStats> base{stats_of({0.60, 0.64, 0.62, 0.61}), stats_of({0.63, 0.6, 0.65}),
                                     stats_of({0.59, 0.66, 0.62, 0.64, 0.6})};
  double previous = -1.0;
  for (double shift : {0.0, 0.005, 0.01, 0.02, 0.05}) {
    auto shifted = base;
    std::vector<double> xs{0.63 + shift, 0.6 + shift, 0.65 + shift};
    shifted[1] = ModelStats::from_scores(xs);
    auto s = rng_stream(10, Purpose::Posterior);
    const double p = estimate_pi(shifted, 100000, s).pi(1);
    CHECK(p >= previous);
    previous = p;
  }
}

TEST_CASE("belief does not depend on the kernel instruction set") {
  if (!kernels::isa_supported(kernels::Isa::Avx2)) return;
  const std::vector<ModelStats> st{stats_of({0.65, 0.66, 0.64}), stats_of({0.69, 0.7, 0.68, 0.69}),
                                   stats_of({0.7, 0.71, 0.69}), stats_of({0.71, 0.7, 0.72, 0.73})};
  kernels::set_isa(kernels::Isa::Scalar);
  auto s1 = rng_stream(11, Purpose::Posterior);
  const auto scalar = estimate_pi(st, 30001, s1);
  kernels::set_isa(kernels::Isa::Avx2);
  auto s2 = rng_stream(11, Purpose::Posterior);
  const auto simd = estimate_pi(st, 30001, s2);
  CHECK(scalar.wins == simd.wins);
  CHECK(s1.state() == s2.state());
}

TEST_CASE("transform_score") {
  CHECK(transform_score(0.5, TransformMode::logit()) == 0.0);
  CHECK(transform_score(0.3712, TransformMode::identity()) == 0.3712);
  CHECK(transform_score(-4.0, TransformMode::identity()) == -4.0);
  CHECK(transform_score(1.0, TransformMode::logit(1e-6)) ==
        doctest::Approx(13.815509557963773).epsilon(1e-9));
  CHECK(transform_score(0.0, TransformMode::logit(1e-6)) ==
        doctest::Approx(-13.815509557963773).epsilon(1e-9));
  CHECK_THROWS_AS(TransformMode::logit(0.0), InvalidInput);
  CHECK_THROWS_AS(TransformMode::logit(0.5), InvalidInput);
}

TEST_CASE("credible intervals are calibrated") {
  // Gaussian data with known mean; 10 observations per replication.
  auto data = rng_stream(12, Purpose::Evaluator);
  const double mu = 0.7;
  const double sd = 0.02;
  int covered = 0;
  const int reps = 10000;
  for (int r = 0; r < reps; ++r) {
    ModelStats st;
    for (int i = 0; i < 10; ++i) st = st.updated(mu + sd * kernels::normal_draw(data));
    const auto p = posterior_from_stats(st);
    const double q = boost::math::quantile(boost::math::students_t(p.dof), 0.95);
    if (std::abs(mu - p.center) <= q * p.scale) ++covered;
  }
  const double coverage = static_cast<double>(covered) / reps;
  MESSAGE("90% interval coverage: " << coverage);
  CHECK(coverage >= 0.88);
  CHECK(coverage <= 0.96);
}
