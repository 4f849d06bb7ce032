#pragma once

#include <optional>
#include <vector>

#include "fiesta/algorithms/algorithms.hpp"
#include "fiesta/core/rng.hpp"

namespace fiesta::detail {

// Single coordinator owning a campaign's mutable state: streams, counters,
// statistics and the trace.
class Campaign {
 public:
  Campaign(const CandidateSet& models, Evaluator& evaluator, const CampaignOptions& options);

  std::size_t size() const { return models_.size(); }
  const std::vector<ModelStats>& stats() const { return stats_; }
  std::uint64_t total() const { return total_; }
  RngStream& coin() { return coin_; }
  Evaluator& evaluator() { return evaluator_; }

  // Fresh request with the next sequence number and fresh seeds.
  EvaluationRequest make_request(std::size_t model);
  // Same model and seeds under a new sequence number.
  EvaluationRequest retry_request(const EvaluationRequest& failed);

  // Evaluates one request per entry of `models`, keeping the evaluator's
  // pipeline full, then folds the scores in request order.  With `retry` a
  // failed evaluation is resubmitted once before the failure propagates.
  void run(const std::vector<std::size_t>& models, bool retry = false);

  void fold(const EvaluationRequest& request, double score);
  const Belief& update_belief();
  const std::optional<Belief>& belief() const { return belief_; }

  void emit(decltype(TraceEvent::payload) payload);

  // Index drawn with probability wins[m] / (sum of wins), skipping `exclude`;
  // uniform over the remaining models when they have no wins at all.
  std::size_t draw(const Belief& belief, std::optional<std::size_t> exclude = std::nullopt);

  SelectionResult finish(Termination reason, std::size_t chosen, std::uint64_t unused_budget = 0,
                         std::uint64_t abandoned = 0);

  // Runs `body`; any failure is rethrown as CampaignAborted with the partial
  // result attached.
  template <class Body>
  SelectionResult guarded(Body&& body) {
    try {
      return body();
    } catch (...) {
      abort();
    }
  }

 private:
  [[noreturn]] void abort();
  SelectionResult snapshot() const;

  const CandidateSet& models_;
  Evaluator& evaluator_;
  const CampaignOptions& options_;
  RngStream split_;
  RngStream model_seeds_;
  RngStream posterior_;
  RngStream coin_;
  std::uint64_t next_request_ = 0;
  std::uint64_t next_event_ = 0;
  std::vector<ModelStats> stats_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  std::optional<Belief> belief_;
  std::vector<TraceEvent> trace_;
};

}  // namespace fiesta::detail
