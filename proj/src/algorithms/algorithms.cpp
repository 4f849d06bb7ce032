#include "fiesta/algorithms/algorithms.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "campaign.hpp"

namespace fiesta {
namespace {

using detail::Campaign;

std::uint64_t ceil_log2(std::uint64_t n) { return n <= 1 ? 0 : std::bit_width(n - 1); }

std::vector<std::size_t> all_models(std::size_t n) {
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

// `reps` passes over `models`, round-robin.
std::vector<std::size_t> round_robin(const std::vector<std::size_t>& models, std::uint64_t reps) {
  std::vector<std::size_t> out;
  out.reserve(models.size() * reps);
  for (std::uint64_t r = 0; r < reps; ++r) out.insert(out.end(), models.begin(), models.end());
  return out;
}

void require_models(const CandidateSet& models, std::size_t minimum, const char* algorithm) {
  if (models.size() < minimum) {
    throw InvalidInput(std::string(algorithm) + " needs at least " + std::to_string(minimum) +
                       " candidate model" + (minimum == 1 ? "" : "s"));
  }
}

// Three evaluations of every model, announced as round 0.
void initialise(Campaign& c, bool retry = false) {
  const auto every = all_models(c.size());
  c.emit(RoundStarted{0, every, kMinEvaluations, std::nullopt});
  c.run(round_robin(every, kMinEvaluations), retry);
}

// Termination reason once a belief is available, if any.
std::optional<Termination> stopping(const Belief& b, const Campaign& c, const ConfidencePolicy& conf) {
  if (b.max_pi() > 1.0 - conf.delta) return Termination::ConfidenceReached;
  if (c.total() >= conf.max_total_evals) return Termination::MaxEvalsSafeguard;
  return std::nullopt;
}

SelectionResult bts_async(Campaign& c, const ConfidencePolicy& conf, std::size_t batch) {
  Evaluator& ev = c.evaluator();
  initialise(c, true);
  const Belief* b = &c.update_belief();
  if (auto stop = stopping(*b, c, conf)) return c.finish(*stop, b->argmax());

  std::map<std::uint64_t, std::pair<EvaluationRequest, bool>> flying;  // sequence -> (request, retried)
  std::size_t step = 0;
  for (;;) {
    while (flying.size() < batch && c.total() + flying.size() < conf.max_total_evals) {
      const std::size_t m = c.draw(*b);
      c.emit(RoundStarted{++step, {m}, 1, std::nullopt});
      const auto req = c.make_request(m);
      ev.submit(req);
      flying.emplace(req.sequence, std::pair{req, false});
    }
    Completion done = ev.next_completion();
    const auto it = flying.find(done.request.sequence);
    if (it == flying.end()) {
      throw ProtocolError("completion for unknown request " + std::to_string(done.request.sequence));
    }
    auto [req, retried] = it->second;
    flying.erase(it);
    if (!done.ok()) {
      if (retried) throw EvaluatorFailure(done.error, done.request.sequence);
      const auto again = c.retry_request(req);
      ev.submit(again);
      flying.emplace(again.sequence, std::pair{again, true});
      continue;
    }
    c.fold(req, *done.score);
    b = &c.update_belief();
    if (auto stop = stopping(*b, c, conf)) {
      const std::uint64_t abandoned = flying.size();
      ev.cancel_all();
      return c.finish(*stop, b->argmax(), 0, abandoned);
    }
  }
}

}  // namespace

void ConfidencePolicy::validate(std::size_t n) const {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("delta must lie in (0, 1)");
  if (max_total_evals < kMinEvaluations * n) {
    throw InvalidInput("max_total_evals must be at least 3N = " + std::to_string(kMinEvaluations * n));
  }
}

SelectionResult sequential_halving(const CandidateSet& models, const BudgetPolicy& budget,
                                   Evaluator& evaluator, const CampaignOptions& options) {
  require_models(models, 2, "sequential halving");
  const std::uint64_t n = models.size();
  const std::uint64_t rounds = ceil_log2(n);
  const std::uint64_t t = budget.total_budget;
  if (t < n * rounds) {
    throw BudgetTooSmall("budget too small: sequential halving over " + std::to_string(n) +
                         " models needs at least " + std::to_string(n * rounds) + " evaluations, got " +
                         std::to_string(t));
  }
  Campaign c(models, evaluator, options);
  return c.guarded([&] {
    std::vector<std::size_t> survivors = all_models(models.size());
    for (std::uint64_t r = 0; r < rounds; ++r) {
      const std::uint64_t per_model = t / (survivors.size() * rounds);
      c.emit(RoundStarted{r, survivors, per_model, std::nullopt});
      c.run(round_robin(survivors, per_model));

      // Best first; the shuffle makes ties at the cut uniformly random.
      std::vector<std::size_t> ranked = survivors;
      for (std::size_t i = ranked.size(); i > 1; --i) std::swap(ranked[i - 1], ranked[c.coin().below(i)]);
      std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
        return c.stats()[a].mean() > c.stats()[b].mean();
      });
      const std::size_t keep = ranked.size() - ranked.size() / 2;
      for (std::size_t i = ranked.size(); i-- > keep;) {
        c.emit(Eliminated{models[ranked[i]], r, c.stats()[ranked[i]].mean()});
      }
      survivors.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep));
      std::sort(survivors.begin(), survivors.end());
    }
    return c.finish(Termination::BudgetExhausted, survivors.front(), t - c.total());
  });
}

SelectionResult ttts(const CandidateSet& models, const ConfidencePolicy& confidence,
                     Evaluator& evaluator, const CampaignOptions& options) {
  require_models(models, 1, "TTTS");
  confidence.validate(models.size());
  Campaign c(models, evaluator, options);
  return c.guarded([&] {
    initialise(c);
    for (std::size_t step = 1;; ++step) {
      const Belief& b = c.update_belief();
      if (auto stop = stopping(b, c, confidence)) return c.finish(*stop, b.argmax());
      const std::size_t m1 = c.draw(b);
      const std::size_t m2 = c.draw(b, m1);
      const std::size_t pick = c.coin().below(2) == 0 ? m1 : m2;
      c.emit(RoundStarted{step, {m1, m2}, 1, pick});
      c.run({pick});
    }
  });
}

SelectionResult bts(const CandidateSet& models, const ConfidencePolicy& confidence,
                    const BatchPolicy& batch, Evaluator& evaluator, const CampaignOptions& options) {
  require_models(models, 1, "BTS");
  confidence.validate(models.size());
  if (batch.batch_size == 0) throw InvalidInput("batch_size must be at least 1");
  if (batch.mode == BatchMode::Asynchronous && evaluator.max_in_flight() < batch.batch_size) {
    throw InvalidInput("asynchronous BTS with batch_size " + std::to_string(batch.batch_size) +
                       " needs an evaluator accepting that many concurrent requests, it accepts " +
                       std::to_string(evaluator.max_in_flight()));
  }
  Campaign c(models, evaluator, options);
  return c.guarded([&] {
    if (batch.mode == BatchMode::Asynchronous) return bts_async(c, confidence, batch.batch_size);
    initialise(c, true);
    for (std::size_t step = 1;; ++step) {
      const Belief& b = c.update_belief();
      if (auto stop = stopping(b, c, confidence)) return c.finish(*stop, b.argmax());
      const std::uint64_t room = confidence.max_total_evals - c.total();
      std::vector<std::size_t> draws(std::min<std::uint64_t>(batch.batch_size, room));
      for (auto& m : draws) m = c.draw(b);
      c.emit(RoundStarted{step, draws, 1, std::nullopt});
      c.run(draws, true);
    }
  });
}

SelectionResult nonadaptive_fixed_budget(const CandidateSet& models, const BudgetPolicy& budget,
                                         Evaluator& evaluator, const CampaignOptions& options) {
  require_models(models, 1, "the fixed-budget baseline");
  const std::uint64_t n = models.size();
  if (budget.total_budget < n) {
    throw BudgetTooSmall("budget too small: " + std::to_string(n) + " models need at least " +
                         std::to_string(n) + " evaluations, got " + std::to_string(budget.total_budget));
  }
  Campaign c(models, evaluator, options);
  return c.guarded([&] {
    const auto every = all_models(models.size());
    const std::uint64_t per_model = budget.total_budget / n;
    c.emit(RoundStarted{0, every, per_model, std::nullopt});
    c.run(round_robin(every, per_model));
    double best = c.stats()[0].mean();
    for (const auto& s : c.stats()) best = std::max(best, s.mean());
    std::vector<std::size_t> leaders;
    for (std::size_t m = 0; m < c.size(); ++m) {
      if (c.stats()[m].mean() == best) leaders.push_back(m);
    }
    const std::size_t chosen = leaders.size() == 1 ? leaders[0] : leaders[c.coin().below(leaders.size())];
    return c.finish(Termination::BudgetExhausted, chosen, budget.total_budget - c.total());
  });
}

SelectionResult nonadaptive_fixed_confidence(const CandidateSet& models,
                                             const ConfidencePolicy& confidence,
                                             Evaluator& evaluator, const CampaignOptions& options) {
  require_models(models, 1, "the fixed-confidence baseline");
  confidence.validate(models.size());
  Campaign c(models, evaluator, options);
  return c.guarded([&] {
    initialise(c);
    const auto every = all_models(models.size());
    for (std::size_t round = 1;; ++round) {
      const Belief& b = c.update_belief();
      if (b.max_pi() > 1.0 - confidence.delta) return c.finish(Termination::ConfidenceReached, b.argmax());
      // Whole rounds only, so the counts stay equal.
      if (c.total() + c.size() > confidence.max_total_evals) {
        return c.finish(Termination::MaxEvalsSafeguard, b.argmax());
      }
      c.emit(RoundStarted{round, every, 1, std::nullopt});
      c.run(every);
    }
  });
}

double complexity_h(std::span<const double> true_means) {
  if (true_means.empty()) throw UndefinedComplexity("complexity needs at least one mean");
  for (double m : true_means) {
    if (!std::isfinite(m)) throw InvalidInput("means must be finite");
  }
  const double best = *std::max_element(true_means.begin(), true_means.end());
  if (std::count(true_means.begin(), true_means.end(), best) > 1) {
    throw UndefinedComplexity("complexity is undefined when the best mean is tied");
  }
  double h = 0.0;
  for (double m : true_means) {
    if (m != best) h += 1.0 / ((best - m) * (best - m));
  }
  return h;
}

}  // namespace fiesta
