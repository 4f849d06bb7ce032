#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fiesta/core/types.hpp"
#include "fiesta/evaluators/evaluator.hpp"

namespace fiesta {

enum class Exhaustion { Error, Cycle, ResampleWithReplacement };

std::string_view to_string(Exhaustion e);
// Accepts "error", "cycle" and "resample"; throws InvalidInput otherwise.
Exhaustion parse_exhaustion(std::string_view s);

// Recorded scores per model name, in file order.
struct ReplayTable {
  std::map<std::string, std::vector<double>> scores;
  std::vector<std::string> order;  // model names by first appearance

  // CSV with header "model,score".  Throws InvalidInput on malformed rows or
  // non-finite scores.
  static ReplayTable parse_csv(std::istream& in);
  static ReplayTable load_csv(const std::filesystem::path& path);
};

// Replays recorded scores.  Ordered policies hand out each model's scores in
// file order as requests are submitted; ResampleWithReplacement picks one
// uniformly using a stream keyed by (seed, model index, request sequence).
class ReplayEvaluator final : public Evaluator {
 public:
  static constexpr std::size_t kDefaultMaxInFlight = 1024;

  // Every candidate must have at least one recorded score.  Names in the
  // table that are not candidates are listed in warnings().
  ReplayEvaluator(const CandidateSet& models, const ReplayTable& table, Exhaustion policy,
                  std::uint64_t seed, std::size_t max_in_flight = kDefaultMaxInFlight);

  std::size_t max_in_flight() const override { return max_in_flight_; }
  // Throws PoolExhausted under the Error policy once a model's scores run out.
  void submit(const EvaluationRequest& request) override;
  Completion next_completion() override;
  std::size_t in_flight() const override { return queue_.size(); }
  void cancel_all() override { queue_.clear(); }

  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::vector<std::vector<double>> pools_;  // by model index
  std::vector<std::size_t> cursors_;
  Exhaustion policy_;
  std::uint64_t seed_;
  std::size_t max_in_flight_;
  std::deque<Completion> queue_;
  std::vector<std::string> warnings_;
};

}  // namespace fiesta
