#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

#include "fiesta/algorithms/algorithms.hpp"
#include "fiesta/core/trace.hpp"
#include "fiesta/evaluators/replay.hpp"
#include "fiesta/evaluators/synthetic.hpp"

using namespace fiesta;

namespace {

// Scores fixed per model; completions in submission order.
class ConstantEvaluator final : public Evaluator {
 public:
  explicit ConstantEvaluator(std::vector<double> values) : values_(std::move(values)) {}
  std::size_t max_in_flight() const override { return 64; }
  void submit(const EvaluationRequest& r) override { queue_.push_back(r); }
  Completion next_completion() override {
    auto r = queue_.front();
    queue_.pop_front();
    return Completion{r, values_[r.model.index], {}};
  }
  std::size_t in_flight() const override { return queue_.size(); }
  void cancel_all() override { queue_.clear(); }

 private:
  std::vector<double> values_;
  std::deque<EvaluationRequest> queue_;
};

// Wraps another evaluator and fails the submissions whose ordinals (0-based)
// are listed.
class FlakyEvaluator final : public Evaluator {
 public:
  FlakyEvaluator(Evaluator& inner, std::set<std::uint64_t> fail) : inner_(inner), fail_(std::move(fail)) {}
  std::size_t max_in_flight() const override { return inner_.max_in_flight(); }
  void submit(const EvaluationRequest& r) override {
    if (fail_.count(submitted_++)) {
      failed_.push_back(r);
    } else {
      inner_.submit(r);
    }
  }
  Completion next_completion() override {
    if (!failed_.empty()) {
      auto r = failed_.front();
      failed_.pop_front();
      return Completion{r, std::nullopt, "worker lost"};
    }
    return inner_.next_completion();
  }
  std::size_t in_flight() const override { return inner_.in_flight() + failed_.size(); }
  void cancel_all() override {
    inner_.cancel_all();
    failed_.clear();
  }

 private:
  Evaluator& inner_;
  std::set<std::uint64_t> fail_;
  std::deque<EvaluationRequest> failed_;
  std::uint64_t submitted_ = 0;
};

std::vector<std::string> names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("m" + std::to_string(i));
  return out;
}

std::vector<ArmSpec> gaussian_arms(const std::vector<double>& means, double sd) {
  std::vector<ArmSpec> arms;
  for (std::size_t i = 0; i < means.size(); ++i) arms.push_back({"m" + std::to_string(i), Gaussian{means[i], sd}});
  return arms;
}

const std::vector<double> kFig2Means{0.65, 0.69, 0.69, 0.70, 0.71};

CampaignOptions opts(std::uint64_t seed, std::uint64_t mc = 20000) {
  CampaignOptions o;
  o.seed = seed;
  o.mc_samples = mc;
  return o;
}

template <class T>
std::vector<const T*> events(const SelectionResult& r) {
  std::vector<const T*> out;
  for (const auto& e : r.trace) {
    if (const auto* p = std::get_if<T>(&e.payload)) out.push_back(p);
  }
  return out;
}

std::string trace_text(const SelectionResult& r) {
  std::ostringstream os;
  write_trace(os, r.trace);
  return os.str();
}

void check_common(const SelectionResult& r) {
  CHECK(r.total_evals == std::accumulate(r.eval_counts.begin(), r.eval_counts.end(), std::uint64_t{0}));
  CHECK(events<Evaluated>(r).size() == r.total_evals);
  for (std::size_t i = 0; i < r.trace.size(); ++i) CHECK(r.trace[i].sequence == i);
  REQUIRE(!r.trace.empty());
  CHECK(r.trace.back().kind() == TraceKind::Terminated);
}

void check_confidence(const SelectionResult& r, double delta) {
  check_common(r);
  REQUIRE(r.final_belief);
  for (auto c : r.eval_counts) CHECK(c >= 3);
  CHECK(r.chosen.index == r.final_belief->argmax());
  if (r.terminated_by == Termination::ConfidenceReached) CHECK(r.final_belief->max_pi() > 1.0 - delta);
}

}  // namespace

TEST_CASE("sequential halving N=4 T=16 schedule") {
  const CandidateSet set(names(4));
  SyntheticEvaluator ev(set, gaussian_arms({0.6, 0.7, 0.65, 0.8}, 0.01), 5);
  const auto r = sequential_halving(set, {16}, ev, opts(5));
  check_common(r);
  const auto rounds = events<RoundStarted>(r);
  REQUIRE(rounds.size() == 2);
  CHECK(rounds[0]->models == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(rounds[0]->evals_per_model == 2);
  CHECK(rounds[1]->models == std::vector<std::size_t>{1, 3});
  CHECK(rounds[1]->evals_per_model == 4);
  CHECK(r.eval_counts == std::vector<std::uint64_t>{2, 6, 2, 6});
  CHECK(r.total_evals == 16);
  CHECK(r.chosen.name == "m3");
  CHECK(r.terminated_by == Termination::BudgetExhausted);
  CHECK(!r.final_belief);
  CHECK(events<Eliminated>(r).size() == 3);
  CHECK(events<Terminated>(r).front()->unused_budget == 0);

  // Round-robin order within a round.
  const auto evals = events<Evaluated>(r);
  for (std::size_t i = 0; i < 8; ++i) CHECK(evals[i]->request.model.index == i % 4);
}

TEST_CASE("sequential halving small cases") {
  SUBCASE("N=2 T=10 is one round of five each") {
    const CandidateSet set(names(2));
    ConstantEvaluator ev({0.4, 0.6});
    const auto r = sequential_halving(set, {10}, ev, opts(1));
    CHECK(events<RoundStarted>(r).size() == 1);
    CHECK(r.eval_counts == std::vector<std::uint64_t>{5, 5});
    CHECK(r.chosen.index == 1);
  }
  SUBCASE("N=3 T=12") {
    const CandidateSet set(names(3));
    ConstantEvaluator ev({0.4, 0.6, 0.5});
    const auto r = sequential_halving(set, {12}, ev, opts(1));
    const auto rounds = events<RoundStarted>(r);
    REQUIRE(rounds.size() == 2);
    CHECK(rounds[0]->evals_per_model == 2);
    CHECK(rounds[1]->evals_per_model == 3);
    CHECK(rounds[1]->models == std::vector<std::size_t>{1, 2});
    CHECK(r.total_evals == 12);
    CHECK(r.chosen.index == 1);
  }
  SUBCASE("leftover budget is reported") {
    const CandidateSet set(names(3));
    ConstantEvaluator ev({0.4, 0.6, 0.5});
    const auto r = sequential_halving(set, {13}, ev, opts(1));
    CHECK(r.total_evals == 12);
    CHECK(events<Terminated>(r).front()->unused_budget == 1);
  }
  SUBCASE("preconditions") {
    ConstantEvaluator ev(std::vector<double>(12, 0.5));
    CHECK_THROWS_AS(sequential_halving(CandidateSet(names(12)), {10}, ev, opts(1)), BudgetTooSmall);
    CHECK_THROWS_AS(sequential_halving(CandidateSet(names(12)), {47}, ev, opts(1)), BudgetTooSmall);
    CHECK_NOTHROW(sequential_halving(CandidateSet(names(12)), {48}, ev, opts(1)));
    CHECK_THROWS_AS(sequential_halving(CandidateSet(names(1)), {10}, ev, opts(1)), InvalidInput);
  }
}

TEST_CASE("sequential halving conservation") {
  auto gen = rng_stream(3, Purpose::Coin);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + gen.below(30);
    const std::uint64_t rounds = std::bit_width(n - 1);
    const std::uint64_t t = n * rounds + gen.below(400);
    CAPTURE(n);
    CAPTURE(t);
    const CandidateSet set(names(n));
    std::vector<double> means(n);
    for (auto& m : means) m = gen.uniform();
    SyntheticEvaluator ev(set, gaussian_arms(means, 0.1), trial);
    const auto r = sequential_halving(set, {t}, ev, opts(trial));
    check_common(r);
    const auto rs = events<RoundStarted>(r);
    REQUIRE(rs.size() == rounds);
    std::uint64_t expected = 0;
    std::size_t alive = n;
    for (const auto* round : rs) {
      CHECK(round->models.size() == alive);
      CHECK(round->evals_per_model == t / (alive * rounds));
      CHECK(round->evals_per_model >= 1);
      expected += alive * round->evals_per_model;
      alive -= alive / 2;
    }
    CHECK(alive == 1);
    CHECK(r.total_evals == expected);
    CHECK(r.total_evals <= t);
    CHECK(events<Terminated>(r).front()->unused_budget == t - expected);
  }
}

TEST_CASE("sequential halving gives the final pair more effort than first-round eliminees") {
  // For N = 2 the only round is also the last, so there is no eliminee.
  for (std::size_t n : {4u, 8u, 16u, 32u}) {
    const std::uint64_t rounds = std::bit_width(n - 1);
    for (std::uint64_t t : {n * rounds, n * rounds * 3 + 5, std::uint64_t{1000}}) {
      const CandidateSet set(names(n));
      std::vector<double> means(n);
      for (std::size_t i = 0; i < n; ++i) means[i] = 0.01 * static_cast<double>(i);
      SyntheticEvaluator ev(set, gaussian_arms(means, 0.05), t);
      const auto r = sequential_halving(set, {t}, ev, opts(t));
      const auto last = events<RoundStarted>(r).back()->models;
      REQUIRE(last.size() == 2);
      std::uint64_t eliminee_max = 0;
      for (const auto* e : events<Eliminated>(r)) {
        if (e->round == 0) eliminee_max = std::max(eliminee_max, r.eval_counts[e->model.index]);
      }
      CHECK(eliminee_max > 0);
      for (std::size_t m : last) CHECK(r.eval_counts[m] > eliminee_max);
    }
  }
}

TEST_CASE("sequential halving breaks ties at the cut at random") {
  const CandidateSet set(names(4));
  std::vector<int> survived(4, 0);
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    ConstantEvaluator ev({0.5, 0.5, 0.5, 0.5});
    ++survived[sequential_halving(set, {8}, ev, opts(seed)).chosen.index];
  }
  // Each model wins about 100 times; 4 sigma band.
  for (int s : survived) CHECK(std::abs(s - 100) < 35);
}

TEST_CASE("TTTS stops after initialisation on widely separated arms") {
  const CandidateSet set(names(2));
  SUBCASE("50 sd apart: always after the minimum six evaluations") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      SyntheticEvaluator ev(set, gaussian_arms({0.5, 1.0}, 0.01), seed);
      const auto r = ttts(set, {0.05, 1000}, ev, opts(seed));
      check_confidence(r, 0.05);
      CHECK(r.total_evals == 6);
      CHECK(r.chosen.index == 1);
      CHECK(r.final_belief->pi(1) > 0.95);
      CHECK(r.terminated_by == Termination::ConfidenceReached);
    }
  }
  SUBCASE("10 sd apart: the Cauchy posteriors stop at six evaluations only part of the time") {
    // Oracle: P(1/2 + atan(gap / (s1 + s2)) / pi > 0.95) over the sampling
    // distribution of three-point scales, simulated independently: 0.6225.
    int at_minimum = 0;
    const int runs = 400;
    for (std::uint64_t seed = 0; seed < runs; ++seed) {
      SyntheticEvaluator ev(set, gaussian_arms({0.5, 0.6}, 0.01), seed);
      const auto r = ttts(set, {0.05, 1000}, ev, opts(seed, 20000));
      CHECK(r.chosen.index == 1);
      if (r.total_evals == 6) ++at_minimum;
    }
    const double rate = static_cast<double>(at_minimum) / runs;
    MESSAGE("stopped at six evaluations in " << rate << " of runs");
    CHECK(std::abs(rate - 0.6225) < 4 * std::sqrt(0.6225 * 0.3775 / runs));
  }
}

TEST_CASE("TTTS on the five-arm problem") {
  const CandidateSet set(names(5));
  SyntheticEvaluator ev(set, gaussian_arms(kFig2Means, 0.01), 11);
  const auto r = ttts(set, {0.01, 10000}, ev, opts(11));
  check_confidence(r, 0.01);
  CHECK(r.terminated_by == Termination::ConfidenceReached);
  CHECK(r.chosen.name == "m4");
  // Effort concentrates on the contenders.
  CHECK(r.eval_counts[3] + r.eval_counts[4] > r.eval_counts[0] + r.eval_counts[1] + r.eval_counts[2]);
  CHECK(r.eval_counts[0] < r.eval_counts[4]);

  for (const auto* step : events<RoundStarted>(r)) {
    if (step->round == 0) continue;
    REQUIRE(step->models.size() == 2);
    CHECK(step->models[0] != step->models[1]);
    REQUIRE(step->selected);
    CHECK((*step->selected == step->models[0] || *step->selected == step->models[1]));
  }
}

TEST_CASE("TTTS safeguard on identical arms") {
  const CandidateSet set(names(2));
  ConstantEvaluator ev({0.5, 0.5});
  const auto r = ttts(set, {0.05, 8}, ev, opts(1));
  check_confidence(r, 0.05);
  CHECK(r.terminated_by == Termination::MaxEvalsSafeguard);
  CHECK(r.total_evals == 8);
  CHECK(std::abs(r.final_belief->pi(0) - 0.5) < 0.02);
}

TEST_CASE("TTTS with a single candidate selects it after three evaluations") {
  const CandidateSet set(names(1));
  ConstantEvaluator ev({0.5});
  const auto r = ttts(set, {0.05, 100}, ev, opts(1));
  CHECK(r.total_evals == 3);
  CHECK(r.terminated_by == Termination::ConfidenceReached);
  CHECK(r.final_belief->pi(0) == 1.0);
}

TEST_CASE("confidence policy validation") {
  const CandidateSet set(names(3));
  ConstantEvaluator ev({0.1, 0.2, 0.3});
  CHECK_THROWS_AS(ttts(set, {0.0, 100}, ev, opts(1)), InvalidInput);
  CHECK_THROWS_AS(ttts(set, {1.0, 100}, ev, opts(1)), InvalidInput);
  CHECK_THROWS_AS(ttts(set, {0.1, 8}, ev, opts(1)), InvalidInput);
  CHECK_THROWS_AS(nonadaptive_fixed_confidence(set, {0.1, 8}, ev, opts(1)), InvalidInput);
  CHECK_THROWS_AS(bts(set, {0.1, 100}, {0, BatchMode::Synchronous}, ev, opts(1)), InvalidInput);
  CHECK_NOTHROW(ttts(set, {0.1, 9}, ev, opts(1)));
}

TEST_CASE("fixed-confidence runs satisfy the stopping invariants") {
  auto gen = rng_stream(21, Purpose::Coin);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + gen.below(5);
    std::vector<double> means(n);
    for (auto& m : means) m = 0.6 + 0.05 * gen.uniform();
    const double delta = 0.05 + 0.2 * gen.uniform();
    const CandidateSet set(names(n));
    SyntheticEvaluator ev(set, gaussian_arms(means, 0.01), trial);
    const ConfidencePolicy conf{delta, 200};
    check_confidence(ttts(set, conf, ev, opts(trial, 5000)), delta);
    check_confidence(nonadaptive_fixed_confidence(set, conf, ev, opts(trial, 5000)), delta);
    check_confidence(bts(set, conf, {3, BatchMode::Synchronous}, ev, opts(trial, 5000)), delta);
    check_confidence(bts(set, conf, {3, BatchMode::Asynchronous}, ev, opts(trial, 5000)), delta);
  }
}

TEST_CASE("BTS with B=1: synchronous and asynchronous runs coincide") {
  const CandidateSet set(names(5));
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    SyntheticEvaluator e1(set, gaussian_arms(kFig2Means, 0.01), seed, 1);
    SyntheticEvaluator e2(set, gaussian_arms(kFig2Means, 0.01), seed, 1);
    const auto sync = bts(set, {0.2, 10000}, {1, BatchMode::Synchronous}, e1, opts(seed, 2000));
    const auto async = bts(set, {0.2, 10000}, {1, BatchMode::Asynchronous}, e2, opts(seed, 2000));
    CHECK(sync.eval_counts == async.eval_counts);
    CHECK(sync.chosen == async.chosen);
  }
}

TEST_CASE("synchronous BTS draws B models per step") {
  const CandidateSet set(names(5));
  SyntheticEvaluator ev(set, gaussian_arms(kFig2Means, 0.01), 4);
  const auto r = bts(set, {0.05, 10000}, {4, BatchMode::Synchronous}, ev, opts(4, 5000));
  check_confidence(r, 0.05);
  const auto steps = events<RoundStarted>(r);
  REQUIRE(steps.size() > 1);
  for (std::size_t i = 1; i < steps.size(); ++i) CHECK(steps[i]->models.size() == 4);
  CHECK(r.total_evals == 15 + 4 * (steps.size() - 1));
}

TEST_CASE("synchronous BTS never exceeds the safeguard") {
  const CandidateSet set(names(2));
  ConstantEvaluator ev({0.5, 0.5});
  const auto r = bts(set, {0.05, 13}, {4, BatchMode::Synchronous}, ev, opts(2, 2000));
  CHECK(r.terminated_by == Termination::MaxEvalsSafeguard);
  CHECK(r.total_evals == 13);
}

TEST_CASE("asynchronous BTS keeps B in flight and abandons them at the end") {
  const CandidateSet set(names(5));
  auto arms = gaussian_arms(kFig2Means, 0.01);
  for (std::size_t i = 0; i < arms.size(); ++i) arms[i].duration = 1.0 + 0.37 * static_cast<double>(i);
  SyntheticEvaluator ev(set, arms, 8, 4);
  const auto r = bts(set, {0.05, 10000}, {4, BatchMode::Asynchronous}, ev, opts(8, 5000));
  check_confidence(r, 0.05);
  const auto* end = events<Terminated>(r).front();
  CHECK(end->abandoned_in_flight == 3);
  CHECK(ev.in_flight() == 0);
  // Belief republished after each post-initialisation completion.
  CHECK(events<BeliefUpdated>(r).size() == r.total_evals - 15 + 1);

  SyntheticEvaluator again(set, arms, 8, 4);
  CHECK(trace_text(bts(set, {0.05, 10000}, {4, BatchMode::Asynchronous}, again, opts(8, 5000))) ==
        trace_text(r));

  SyntheticEvaluator narrow(set, arms, 8, 2);
  CHECK_THROWS_AS(bts(set, {0.05, 10000}, {4, BatchMode::Asynchronous}, narrow, opts(8)), InvalidInput);
}

TEST_CASE("BTS retries a failed evaluation once") {
  const CandidateSet set(names(3));
  const auto arms = gaussian_arms({0.5, 0.6, 0.7}, 0.01);
  for (auto mode : {BatchMode::Synchronous, BatchMode::Asynchronous}) {
    CAPTURE(static_cast<int>(mode));
    SUBCASE("single failure is absorbed") {
      SyntheticEvaluator inner(set, arms, 1, 4);
      FlakyEvaluator ev(inner, {2, 12});
      const auto r = bts(set, {0.05, 1000}, {2, mode}, ev, opts(1, 2000));
      check_confidence(r, 0.05);
      CHECK(r.terminated_by == Termination::ConfidenceReached);
    }
    SUBCASE("a second failure aborts with the partial trace") {
      // Depth B keeps the failure point deterministic: with B = 2 the first
      // two submissions are outstanding when submission 2 and its retry fail.
      SyntheticEvaluator inner(set, arms, 1, 2);
      FlakyEvaluator ev(inner, {2, 3});
      try {
        (void)bts(set, {0.05, 1000}, {2, mode}, ev, opts(1, 2000));
        FAIL("expected abort");
      } catch (const CampaignAborted& e) {
        CHECK(e.partial().total_evals == events<Evaluated>(e.partial()).size());
        CHECK(e.partial().total_evals >= 1);
        CHECK(e.partial().total_evals <= 2);
        CHECK_THROWS_AS(std::rethrow_exception(e.cause()), EvaluatorFailure);
      }
    }
  }
  SUBCASE("TTTS does not retry") {
    SyntheticEvaluator inner(set, arms, 1, 4);
    FlakyEvaluator ev(inner, {4});
    CHECK_THROWS_AS(ttts(set, {0.05, 1000}, ev, opts(1, 2000)), CampaignAborted);
  }
}

TEST_CASE("non-adaptive fixed budget") {
  SUBCASE("N=12 T=24 evaluates each model twice") {
    const CandidateSet set(names(12));
    std::vector<double> values(12, 0.5);
    values[7] = 0.9;
    ConstantEvaluator ev(values);
    const auto r = nonadaptive_fixed_budget(set, {24}, ev, opts(1));
    CHECK(r.eval_counts == std::vector<std::uint64_t>(12, 2));
    CHECK(r.chosen.index == 7);
  }
  SUBCASE("N=1") {
    const CandidateSet set(names(1));
    ConstantEvaluator ev({0.3});
    const auto r = nonadaptive_fixed_budget(set, {7}, ev, opts(1));
    CHECK(r.total_evals == 7);
    CHECK(r.chosen.index == 0);
  }
  SUBCASE("N=2 T=5 leaves one unit unused") {
    const CandidateSet set(names(2));
    ConstantEvaluator ev({0.3, 0.4});
    const auto r = nonadaptive_fixed_budget(set, {5}, ev, opts(1));
    CHECK(r.eval_counts == std::vector<std::uint64_t>{2, 2});
    CHECK(events<Terminated>(r).front()->unused_budget == 1);
  }
  SUBCASE("ties are broken at random") {
    const CandidateSet set(names(3));
    std::set<std::size_t> picked;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      ConstantEvaluator ev({0.5, 0.5, 0.5});
      picked.insert(nonadaptive_fixed_budget(set, {6}, ev, opts(seed)).chosen.index);
    }
    CHECK(picked.size() == 3);
  }
  SUBCASE("budget below N") {
    ConstantEvaluator ev({0.5, 0.5, 0.5});
    CHECK_THROWS_AS(nonadaptive_fixed_budget(CandidateSet(names(3)), {2}, ev, opts(1)), BudgetTooSmall);
  }
}

TEST_CASE("non-adaptive fixed confidence") {
  SUBCASE("separated arms stop after initialisation") {
    const CandidateSet set(names(3));
    SyntheticEvaluator ev(set, gaussian_arms({0.3, 0.5, 0.7}, 0.01), 2);
    const auto r = nonadaptive_fixed_confidence(set, {0.05, 1000}, ev, opts(2));
    CHECK(r.total_evals == 9);
    CHECK(r.chosen.index == 2);
  }
  SUBCASE("identical arms hit the safeguard") {
    const CandidateSet set(names(2));
    ConstantEvaluator ev({0.5, 0.5});
    const auto r = nonadaptive_fixed_confidence(set, {0.05, 11}, ev, opts(2));
    CHECK(r.terminated_by == Termination::MaxEvalsSafeguard);
    CHECK(r.total_evals == 10);
  }
  SUBCASE("counts stay equal") {
    const CandidateSet set(names(5));
    SyntheticEvaluator ev(set, gaussian_arms(kFig2Means, 0.01), 3);
    const auto r = nonadaptive_fixed_confidence(set, {0.1, 10000}, ev, opts(3, 5000));
    check_confidence(r, 0.1);
    for (auto c : r.eval_counts) CHECK(c == r.eval_counts[0]);
  }
}

TEST_CASE("complexity_h") {
  CHECK(complexity_h(kFig2Means) == doctest::Approx(15277.777777).epsilon(1e-9));
  CHECK(complexity_h(std::vector<double>{0.0, 1.0}) == 1.0);
  CHECK(complexity_h(std::vector<double>{0.7}) == 0.0);
  CHECK_THROWS_AS(complexity_h(std::vector<double>{0.5, 0.5}), UndefinedComplexity);
  CHECK_THROWS_AS(complexity_h(std::vector<double>{}), UndefinedComplexity);

  auto gen = rng_stream(4, Purpose::Coin);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> means(2 + gen.below(10));
    for (auto& m : means) m = gen.uniform();
    const double h = complexity_h(means);
    const double shift = 10.0 * gen.uniform() - 5.0;
    const double scale = 0.1 + 3.0 * gen.uniform();
    std::vector<double> shifted = means, scaled = means;
    for (auto& m : shifted) m += shift;
    for (auto& m : scaled) m = 0.3 + scale * (m - 0.3);
    CHECK(complexity_h(shifted) == doctest::Approx(h).epsilon(1e-6));
    CHECK(complexity_h(scaled) == doctest::Approx(h / (scale * scale)).epsilon(1e-9));
  }
}

TEST_CASE("same seed reproduces the trace byte for byte") {
  const CandidateSet set(names(5));
  const auto arms = gaussian_arms(kFig2Means, 0.01);
  const auto run = [&](std::uint64_t seed) {
    SyntheticEvaluator ev(set, arms, seed);
    return trace_text(ttts(set, {0.1, 10000}, ev, opts(seed, 5000)));
  };
  CHECK(run(42) == run(42));
  CHECK(run(42) != run(43));
}

TEST_CASE("on_event streams every trace event in order") {
  const CandidateSet set(names(4));
  SyntheticEvaluator ev(set, gaussian_arms({0.1, 0.2, 0.3, 0.4}, 0.01), 1);
  std::vector<std::uint64_t> seen;
  auto o = opts(1);
  o.on_event = [&](const TraceEvent& e) { seen.push_back(e.sequence); };
  const auto r = sequential_halving(set, {16}, ev, o);
  CHECK(seen.size() == r.trace.size());
  for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == i);
}

TEST_CASE("evaluator failure aborts with the partial trace") {
  ReplayTable t;
  t.scores["m0"] = {0.1, 0.2, 0.3, 0.4};
  t.scores["m1"] = {0.5, 0.6};
  t.order = {"m0", "m1"};
  const CandidateSet set(names(2));
  ReplayEvaluator ev(set, t, Exhaustion::Error, 1, 1);
  try {
    (void)sequential_halving(set, {8}, ev, opts(1));
    FAIL("expected abort");
  } catch (const CampaignAborted& e) {
    // The sixth request (m1's third) finds the pool empty.
    CHECK(e.partial().total_evals == 5);
    CHECK(e.partial().eval_counts == std::vector<std::uint64_t>{3, 2});
    CHECK_THROWS_AS(std::rethrow_exception(e.cause()), PoolExhausted);
  }
}

TEST_CASE("logit transform feeds the statistics") {
  const CandidateSet set(names(2));
  ConstantEvaluator ev({0.5, 0.8});
  auto o = opts(1);
  o.transform = TransformMode::logit();
  const auto r = nonadaptive_fixed_budget(set, {6}, ev, o);
  CHECK(r.stats[0].mean() == 0.0);
  CHECK(r.stats[1].mean() == doctest::Approx(std::log(4.0)));
  // The trace keeps raw scores.
  CHECK(events<Evaluated>(r).back()->score == 0.8);
}
