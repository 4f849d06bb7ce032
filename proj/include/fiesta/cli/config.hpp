#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fiesta/algorithms/algorithms.hpp"
#include "fiesta/evaluators/replay.hpp"
#include "fiesta/evaluators/synthetic.hpp"

namespace fiesta::cli {

enum class Mode { FixedBudget, FixedConfidence, BatchFixedConfidence, NonAdaptiveFB, NonAdaptiveFC };

// Subcommand spelling: fb, fc, fc-batch, baseline-fb, baseline-fc.
std::string_view to_string(Mode m);
Mode parse_mode(std::string_view s);

enum class EvaluatorKind { Synthetic, Subprocess, Replay };

std::string_view to_string(EvaluatorKind k);

struct CampaignConfig {
  Mode mode = Mode::FixedConfidence;
  std::uint64_t budget = 0;
  double delta = 0.05;
  std::uint64_t max_evals = kDefaultMaxEvals;
  std::size_t batch_size = 1;
  bool async = false;

  EvaluatorKind evaluator = EvaluatorKind::Synthetic;
  // Synthetic: arms inline, or loaded from arms_file when arms is empty.
  std::string arms_file;
  std::vector<ArmSpec> arms;
  // Subprocess.
  std::string command;
  std::vector<std::string> args;
  std::size_t max_in_flight = 1;  // pipeline depth; replay uses it too
  std::optional<double> timeout_seconds;
  // Replay.
  std::string csv_file;
  Exhaustion exhaustion = Exhaustion::ResampleWithReplacement;

  std::vector<std::string> models;  // empty: every arm / every replay model
  std::uint64_t seed = 0;
  std::uint64_t mc_samples = kDefaultMcSamples;
  TransformMode transform;
  std::optional<std::string> trace_path;
};

bool operator==(const CampaignConfig& a, const CampaignConfig& b);

// Missing fields keep their defaults.  Throws ConfigError naming the field.
CampaignConfig parse_config(const nlohmann::json& j);
CampaignConfig load_config(const std::string& path);
nlohmann::json to_json(const CampaignConfig& c);

// Loads arm files and fills `models` from the evaluator when it is empty,
// then checks every precondition of the selected algorithm.  Throws
// ConfigError naming the offending field before any evaluation is issued.
CampaignConfig resolve(CampaignConfig c);

}  // namespace fiesta::cli
