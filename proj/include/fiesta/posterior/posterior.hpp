#pragma once

#include <cstdint>
#include <span>

#include "fiesta/core/rng.hpp"
#include "fiesta/core/stats.hpp"
#include "fiesta/core/types.hpp"

namespace fiesta {

// Sums of squared deviations below this are replaced by it so the posterior
// scale stays positive for constant-score models.
inline constexpr double kVarianceFloor = 1e-12;
inline constexpr std::uint64_t kDefaultMcSamples = 100000;
inline constexpr std::uint64_t kMinEvaluations = 3;

// Location-scale Student-t posterior over a model's mean score.
struct PosteriorParams {
  double center = 0.0;
  double scale = 1.0;
  double dof = 1.0;
};

struct TransformMode {
  enum class Kind { Identity, Logit };
  Kind kind = Kind::Identity;
  double epsilon = 1e-6;  // Logit clamps scores into [epsilon, 1 - epsilon]

  static TransformMode identity() { return {}; }
  // Throws InvalidInput unless 0 < epsilon < 0.5.
  static TransformMode logit(double epsilon = 1e-6);

  friend bool operator==(const TransformMode&, const TransformMode&) = default;
};

double transform_score(double score, const TransformMode& mode);

// Uniform prior on (mean, sd): sqrt(T(T-2)/S) (mu - mean) ~ t_{T-2}, with S
// the sum of squared deviations.  Throws InsufficientData when count < 3.
PosteriorParams posterior_from_stats(const ModelStats& stats);

double posterior_sample(const PosteriorParams& params, RngStream& stream);

// Monte-Carlo estimate of the probability that each model has the largest
// mean: the fraction of `mc_samples` joint posterior draws in which it is the
// maximum, exact ties broken uniformly at random.  Throws InsufficientData if
// any model has fewer than three evaluations.
Belief estimate_pi(std::span<const ModelStats> stats, std::uint64_t mc_samples, RngStream& stream);

}  // namespace fiesta
