#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fiesta/cli/config.hpp"
#include "fiesta/core/types.hpp"
#include "fiesta/evaluators/evaluator.hpp"

namespace fiesta::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitSafeguard = 2;

// Evaluator for a resolved config.  Warnings (e.g. replay rows for unknown
// models) are appended to `warnings`.
std::unique_ptr<Evaluator> make_evaluator(const CampaignConfig& c, const CandidateSet& models,
                                          std::vector<std::string>* warnings = nullptr);

// Runs the configured algorithm once.  `c` must be resolved.
SelectionResult execute(const CampaignConfig& c,
                        const std::function<void(const TraceEvent&)>& on_event = {});

// First trace line: the resolved config.
std::string trace_header(const CampaignConfig& c);

// `names` defaults to the names seen in the trace.
void write_summary(std::ostream& out, const SelectionResult& r, std::vector<std::string> names = {});

// Resolves and runs, writes the summary to `out` and the trace to
// c.trace_path as events happen; errors go to `err`.  Returns the exit code:
// 0 on success, 2 on safeguard termination, 1 on any error.
int run_campaign(const CampaignConfig& c, std::ostream& out, std::ostream& err);

struct ReplicationReport {
  std::vector<std::string> models;
  std::uint64_t replications = 0;
  std::vector<std::uint64_t> selected;  // per model
  std::uint64_t min_evals = 0;
  double mean_evals = 0.0;
  std::uint64_t max_evals = 0;
  std::uint64_t confidence_reached = 0;
  std::uint64_t budget_exhausted = 0;
  std::uint64_t safeguard = 0;
  std::optional<std::size_t> true_best;
  std::uint64_t correct = 0;
  double correct_lo = 0.0;  // 99% Clopper-Pearson interval
  double correct_hi = 0.0;

  double correct_rate() const {
    return replications ? static_cast<double>(correct) / static_cast<double>(replications) : 0.0;
  }
};

// Exact binomial interval for k successes out of n at the given level.
std::pair<double, double> clopper_pearson(std::uint64_t k, std::uint64_t n, double level);

// Runs the campaign with seeds c.seed, c.seed + 1, ...  Subprocess
// evaluators are refused unless `allow_subprocess`.  The trace path is
// ignored.  Throws on the first failed replication.
ReplicationReport run_replications(const CampaignConfig& c, std::uint64_t replications,
                                   const std::optional<std::string>& true_best = std::nullopt,
                                   bool allow_subprocess = false);

void write_report(std::ostream& out, const ReplicationReport& r);

}  // namespace fiesta::cli
