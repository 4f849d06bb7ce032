#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fiesta/core/types.hpp"
#include "fiesta/evaluators/evaluator.hpp"

namespace fiesta {

struct Gaussian {
  double mean = 0.0;
  double sd = 1.0;
};

struct TruncatedGaussian {
  double mean = 0.0;
  double sd = 1.0;
  double lo = 0.0;
  double hi = 1.0;
};

struct BetaArm {
  double alpha = 1.0;
  double beta = 1.0;
};

// A simulated model.  `duration` is the virtual time one evaluation takes;
// it only affects the order in which concurrent requests complete.
struct ArmSpec {
  std::string name;
  std::variant<Gaussian, TruncatedGaussian, BetaArm> family;
  double duration = 1.0;

  // Throws InvalidInput on sd <= 0, lo >= hi, non-positive shapes or duration.
  void validate() const;
  double mean() const;
};

// JSON array of {"name", "family": "gaussian"|"truncated_gaussian"|"beta",
// "mean", "sd", "lo", "hi", "alpha", "beta", "duration"?}.
std::vector<ArmSpec> parse_arm_specs(const nlohmann::json& j);
std::vector<ArmSpec> load_arm_specs(const std::filesystem::path& path);
nlohmann::json arm_specs_json(const std::vector<ArmSpec>& arms);

// One score for `request` drawn from a stream keyed by (seed, model index,
// request sequence).
double synthetic_draw(const ArmSpec& arm, std::uint64_t seed, const EvaluationRequest& request);

// Evaluator over simulated arms.  Concurrent requests complete in order of
// virtual finish time (submission time + duration), ties by sequence, which
// makes asynchronous campaigns deterministic.
class SyntheticEvaluator final : public Evaluator {
 public:
  static constexpr std::size_t kDefaultMaxInFlight = 1024;

  // `arms` are matched to candidates by name; every candidate needs an arm.
  SyntheticEvaluator(const CandidateSet& models, const std::vector<ArmSpec>& arms,
                     std::uint64_t seed, std::size_t max_in_flight = kDefaultMaxInFlight);

  std::size_t max_in_flight() const override { return max_in_flight_; }
  void submit(const EvaluationRequest& request) override;
  Completion next_completion() override;
  std::size_t in_flight() const override { return pending_.size(); }
  void cancel_all() override { pending_.clear(); }

  const ArmSpec& arm(std::size_t model_index) const { return arms_[model_index]; }
  double now() const { return clock_; }

 private:
  std::vector<ArmSpec> arms_;  // by model index
  std::uint64_t seed_;
  std::size_t max_in_flight_;
  double clock_ = 0.0;
  // (finish time, sequence) -> request
  std::map<std::pair<double, std::uint64_t>, EvaluationRequest> pending_;
};

}  // namespace fiesta
