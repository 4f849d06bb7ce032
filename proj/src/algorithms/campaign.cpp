#include "campaign.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace fiesta::detail {

Campaign::Campaign(const CandidateSet& models, Evaluator& evaluator, const CampaignOptions& options)
    : models_(models),
      evaluator_(evaluator),
      options_(options),
      split_(rng_stream(options.seed, Purpose::SplitSeed)),
      model_seeds_(rng_stream(options.seed, Purpose::ModelSeed)),
      posterior_(rng_stream(options.seed, Purpose::Posterior)),
      coin_(rng_stream(options.seed, Purpose::Coin)),
      stats_(models.size()),
      counts_(models.size(), 0) {
  if (options.mc_samples == 0) throw InvalidInput("mc_samples must be positive");
}

EvaluationRequest Campaign::make_request(std::size_t model) {
  return EvaluationRequest{models_[model], split_(), model_seeds_(), next_request_++};
}

EvaluationRequest Campaign::retry_request(const EvaluationRequest& failed) {
  EvaluationRequest r = failed;
  r.sequence = next_request_++;
  return r;
}

void Campaign::run(const std::vector<std::size_t>& models, bool retry) {
  struct Slot {
    EvaluationRequest request;
    std::optional<double> score;
    bool retried = false;
  };
  std::vector<Slot> slots;
  slots.reserve(models.size());
  for (std::size_t m : models) slots.push_back(Slot{make_request(m), std::nullopt, false});

  std::map<std::uint64_t, std::size_t> slot_of;  // in-flight sequence -> slot
  std::vector<std::size_t> queue;                 // slots waiting to be submitted, back first
  for (std::size_t i = slots.size(); i-- > 0;) queue.push_back(i);
  const std::size_t depth = std::max<std::size_t>(1, evaluator_.max_in_flight());

  const auto fold_done = [&] {
    for (const auto& s : slots) {
      if (s.score) fold(s.request, *s.score);
    }
  };
  try {
    while (!queue.empty() || !slot_of.empty()) {
      while (!queue.empty() && slot_of.size() < depth) {
        const std::size_t i = queue.back();
        queue.pop_back();
        evaluator_.submit(slots[i].request);
        slot_of.emplace(slots[i].request.sequence, i);
      }
      Completion c = evaluator_.next_completion();
      const auto it = slot_of.find(c.request.sequence);
      if (it == slot_of.end()) {
        throw ProtocolError("completion for unknown request " + std::to_string(c.request.sequence));
      }
      const std::size_t i = it->second;
      slot_of.erase(it);
      if (c.ok()) {
        slots[i].score = *c.score;
        continue;
      }
      if (retry && !slots[i].retried) {
        slots[i].retried = true;
        slots[i].request = retry_request(slots[i].request);
        queue.push_back(i);
        continue;
      }
      throw EvaluatorFailure(c.error, c.request.sequence);
    }
  } catch (...) {
    evaluator_.cancel_all();
    fold_done();
    throw;
  }
  fold_done();
}

void Campaign::fold(const EvaluationRequest& request, double score) {
  const std::size_t m = request.model.index;
  stats_[m] = stats_[m].updated(transform_score(score, options_.transform));
  ++counts_[m];
  ++total_;
  emit(Evaluated{request, score});
}

const Belief& Campaign::update_belief() {
  belief_ = estimate_pi(stats_, options_.mc_samples, posterior_);
  emit(BeliefUpdated{total_, belief_->pi()});
  return *belief_;
}

void Campaign::emit(decltype(TraceEvent::payload) payload) {
  trace_.push_back(TraceEvent{next_event_++, std::move(payload)});
  if (options_.on_event) options_.on_event(trace_.back());
}

std::size_t Campaign::draw(const Belief& belief, std::optional<std::size_t> exclude) {
  const std::size_t n = belief.size();
  std::uint64_t mass = belief.mc_samples;
  if (exclude) mass -= belief.wins[*exclude];
  if (mass == 0) {
    std::size_t k = static_cast<std::size_t>(coin_.below(exclude ? n - 1 : n));
    if (exclude && k >= *exclude) ++k;
    return k;
  }
  std::uint64_t r = coin_.below(mass);
  for (std::size_t m = 0; m < n; ++m) {
    if (exclude && m == *exclude) continue;
    if (r < belief.wins[m]) return m;
    r -= belief.wins[m];
  }
  return n - 1;  // unreachable: the wins sum to mass
}

SelectionResult Campaign::snapshot() const {
  SelectionResult r;
  r.final_belief = belief_;
  r.stats = stats_;
  r.eval_counts = counts_;
  r.total_evals = total_;
  r.trace = trace_;
  return r;
}

SelectionResult Campaign::finish(Termination reason, std::size_t chosen, std::uint64_t unused_budget,
                                 std::uint64_t abandoned) {
  emit(Terminated{reason, models_[chosen], total_, unused_budget, abandoned});
  SelectionResult r = snapshot();
  r.chosen = models_[chosen];
  r.terminated_by = reason;
  return r;
}

void Campaign::abort() {
  const auto cause = std::current_exception();
  std::string what = "unknown error";
  try {
    std::rethrow_exception(cause);
  } catch (const std::exception& e) {
    what = e.what();
  } catch (...) {
  }
  throw CampaignAborted("campaign aborted after " + std::to_string(total_) + " evaluations: " + what,
                        snapshot(), cause);
}

}  // namespace fiesta::detail
