#include "fiesta/core/stats.hpp"

#include <cmath>
#include <string>

#include "fiesta/core/errors.hpp"

namespace fiesta {

ModelStats ModelStats::from_scores(std::span<const double> scores) {
  ModelStats s;
  for (double x : scores) s = s.updated(x);
  return s;
}

ModelStats ModelStats::updated(double score) const {
  if (!std::isfinite(score)) {
    throw InvalidInput("score must be finite, got " + std::to_string(score));
  }
  const std::uint64_t n = count_ + 1;
  const double delta = score - mean_;
  const double mean = mean_ + delta / static_cast<double>(n);
  const double sq = sq_dev_sum_ + delta * (score - mean);
  return ModelStats(n, mean, sq < 0.0 ? 0.0 : sq);
}

ModelStats stats_merge(const ModelStats& a, const ModelStats& b) {
  if (a.count_ == 0) return b;
  if (b.count_ == 0) return a;
  const std::uint64_t n = a.count_ + b.count_;
  const double na = static_cast<double>(a.count_);
  const double nb = static_cast<double>(b.count_);
  const double delta = b.mean_ - a.mean_;
  const double mean = a.mean_ + delta * (nb / static_cast<double>(n));
  const double sq = a.sq_dev_sum_ + b.sq_dev_sum_ + delta * delta * (na * nb / static_cast<double>(n));
  return ModelStats(n, mean, sq);
}

}  // namespace fiesta
