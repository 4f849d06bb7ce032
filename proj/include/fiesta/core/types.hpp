#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fiesta/core/stats.hpp"

namespace fiesta {

struct ModelId {
  std::string name;
  std::size_t index = 0;

  friend bool operator==(const ModelId&, const ModelId&) = default;
};

// The N candidate models.  Names are unique; indices are 0..N-1 in the order
// the names were given.
class CandidateSet {
 public:
  CandidateSet() = default;
  // Throws InvalidInput on empty or duplicate names.
  explicit CandidateSet(const std::vector<std::string>& names);

  std::size_t size() const { return models_.size(); }
  bool empty() const { return models_.empty(); }
  const ModelId& operator[](std::size_t i) const { return models_[i]; }
  const std::vector<ModelId>& models() const { return models_; }
  std::vector<std::string> names() const;
  std::optional<std::size_t> find(std::string_view name) const;

  auto begin() const { return models_.begin(); }
  auto end() const { return models_.end(); }

 private:
  std::vector<ModelId> models_;
};

// One unit of work.  `sequence` doubles as the wire-protocol request id.
struct EvaluationRequest {
  ModelId model;
  std::uint64_t split_seed = 0;
  std::uint64_t model_seed = 0;
  std::uint64_t sequence = 0;
};

struct EvaluationScore {
  EvaluationRequest request;
  double score = 0.0;
};

// Probability that each model is the best one, estimated as relative
// frequencies over `mc_samples` Monte-Carlo rounds.  `wins` sums to exactly
// `mc_samples`.
struct Belief {
  std::vector<std::uint64_t> wins;
  std::vector<ModelStats> stats;
  std::uint64_t mc_samples = 0;

  std::size_t size() const { return wins.size(); }
  double pi(std::size_t m) const {
    return static_cast<double>(wins[m]) / static_cast<double>(mc_samples);
  }
  std::vector<double> pi() const;
  double max_pi() const;
  // Lowest index among the models with the most wins.
  std::size_t argmax() const;
};

enum class Termination { BudgetExhausted, ConfidenceReached, MaxEvalsSafeguard };

std::string_view to_string(Termination t);

enum class TraceKind { Evaluated, Eliminated, RoundStarted, BeliefUpdated, Terminated };

std::string_view to_string(TraceKind k);

struct Evaluated {
  EvaluationRequest request;
  double score = 0.0;
};

struct Eliminated {
  ModelId model;
  std::size_t round = 0;
  double mean = 0.0;
};

// Start of an SH round, a TTTS step (models = {m1, m2}, selected = the coin
// winner) or a BTS batch (models = the batch draws).
struct RoundStarted {
  std::size_t round = 0;
  std::vector<std::size_t> models;
  std::uint64_t evals_per_model = 0;
  std::optional<std::size_t> selected;
};

struct BeliefUpdated {
  std::uint64_t total_evals = 0;
  std::vector<double> pi;
};

struct Terminated {
  Termination reason = Termination::BudgetExhausted;
  ModelId chosen;
  std::uint64_t total_evals = 0;
  std::uint64_t unused_budget = 0;
  std::uint64_t abandoned_in_flight = 0;
};

struct TraceEvent {
  std::uint64_t sequence = 0;
  std::variant<Evaluated, Eliminated, RoundStarted, BeliefUpdated, Terminated> payload;

  TraceKind kind() const { return static_cast<TraceKind>(payload.index()); }
};

struct SelectionResult {
  ModelId chosen;
  std::optional<Belief> final_belief;  // set on the fixed-confidence paths
  std::vector<ModelStats> stats;
  std::vector<std::uint64_t> eval_counts;
  std::uint64_t total_evals = 0;
  std::vector<TraceEvent> trace;
  Termination terminated_by = Termination::BudgetExhausted;
};

}  // namespace fiesta
