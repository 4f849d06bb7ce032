#pragma once

#include <cstdint>
#include <span>

namespace fiesta {

// Online sufficient statistics of one model's scores: count, running mean and
// the sum of squared deviations from that mean.  Immutable value; updates
// return a new value.
class ModelStats {
 public:
  ModelStats() = default;

  static ModelStats from_scores(std::span<const double> scores);

  std::uint64_t count() const { return count_; }
  double mean() const { return mean_; }
  double sq_dev_sum() const { return sq_dev_sum_; }

  // Throws InvalidInput for a non-finite score.
  [[nodiscard]] ModelStats updated(double score) const;

  friend bool operator==(const ModelStats&, const ModelStats&) = default;

 private:
  ModelStats(std::uint64_t count, double mean, double sq_dev_sum)
      : count_(count), mean_(mean), sq_dev_sum_(sq_dev_sum) {}

  friend ModelStats stats_merge(const ModelStats& a, const ModelStats& b);

  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double sq_dev_sum_ = 0.0;
};

inline ModelStats stats_update(const ModelStats& stats, double score) {
  return stats.updated(score);
}

// Statistics of the concatenation of both underlying sequences.
ModelStats stats_merge(const ModelStats& a, const ModelStats& b);

}  // namespace fiesta
