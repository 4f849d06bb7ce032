#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <span>
#include <string>

#include "fiesta/core/errors.hpp"
#include "fiesta/core/types.hpp"
#include "fiesta/evaluators/evaluator.hpp"
#include "fiesta/posterior/posterior.hpp"

namespace fiesta {

inline constexpr std::uint64_t kDefaultMaxEvals = 10000;

struct BudgetPolicy {
  std::uint64_t total_budget = 0;
};

struct ConfidencePolicy {
  double delta = 0.05;
  std::uint64_t max_total_evals = kDefaultMaxEvals;

  // Throws InvalidInput unless 0 < delta < 1 and max_total_evals >= 3n.
  void validate(std::size_t n) const;
};

enum class BatchMode { Synchronous, Asynchronous };

struct BatchPolicy {
  std::size_t batch_size = 1;
  BatchMode mode = BatchMode::Synchronous;
};

// Everything a campaign needs besides the candidates, policy and evaluator.
// All randomness derives from `seed`.
struct CampaignOptions {
  std::uint64_t seed = 0;
  std::uint64_t mc_samples = kDefaultMcSamples;
  TransformMode transform;
  // Called for every trace event as it is recorded.
  std::function<void(const TraceEvent&)> on_event;
};

// An evaluation failed mid-campaign.  partial() holds the trace and the
// statistics gathered up to the failure; cause() the original exception.
class CampaignAborted : public Error {
 public:
  CampaignAborted(const std::string& what, SelectionResult partial, std::exception_ptr cause)
      : Error(what), partial_(std::move(partial)), cause_(std::move(cause)) {}

  const SelectionResult& partial() const { return partial_; }
  std::exception_ptr cause() const { return cause_; }

 private:
  SelectionResult partial_;
  std::exception_ptr cause_;
};

// Fixed budget.  ceil(log2 N) rounds; each survivor gets
// floor(T / (|S| ceil(log2 N))) evaluations per round, then the worse half by
// cumulative mean is dropped.  Throws InvalidInput for N < 2 and
// BudgetTooSmall when T < N ceil(log2 N).
SelectionResult sequential_halving(const CandidateSet& models, const BudgetPolicy& budget,
                                   Evaluator& evaluator, const CampaignOptions& options);

// Fixed confidence, top-two Thompson sampling.  Three evaluations per model,
// then one evaluation per step until max pi > 1 - delta.
SelectionResult ttts(const CandidateSet& models, const ConfidencePolicy& confidence,
                     Evaluator& evaluator, const CampaignOptions& options);

// Fixed confidence, batch Thompson sampling.  Synchronous mode evaluates B
// draws from pi per step; asynchronous mode keeps B evaluations in flight and
// republishes pi after each completion.  A failed evaluation is retried once.
SelectionResult bts(const CandidateSet& models, const ConfidencePolicy& confidence,
                    const BatchPolicy& batch, Evaluator& evaluator, const CampaignOptions& options);

// floor(T/N) evaluations of every model, then the best empirical mean.
SelectionResult nonadaptive_fixed_budget(const CandidateSet& models, const BudgetPolicy& budget,
                                         Evaluator& evaluator, const CampaignOptions& options);

// Every model once per round until max pi > 1 - delta.
SelectionResult nonadaptive_fixed_confidence(const CandidateSet& models,
                                             const ConfidencePolicy& confidence,
                                             Evaluator& evaluator, const CampaignOptions& options);

// H = sum over sub-optimal m of 1 / (mu* - mu_m)^2.  Throws
// UndefinedComplexity unless the maximum is unique.
double complexity_h(std::span<const double> true_means);

}  // namespace fiesta
