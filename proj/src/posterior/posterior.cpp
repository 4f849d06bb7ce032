#include "fiesta/posterior/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fiesta/core/errors.hpp"
#include "fiesta/kernels/kernels.hpp"

namespace fiesta {
namespace {

// Columns of the draw matrix processed per pass; keeps N rows in cache.
constexpr std::uint64_t kChunkColumns = 2048;

}  // namespace

TransformMode TransformMode::logit(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw InvalidInput("logit epsilon must lie in (0, 0.5), got " + std::to_string(epsilon));
  }
  return TransformMode{Kind::Logit, epsilon};
}

double transform_score(double score, const TransformMode& mode) {
  if (mode.kind == TransformMode::Kind::Identity) return score;
  const double s = std::clamp(score, mode.epsilon, 1.0 - mode.epsilon);
  return std::log(s / (1.0 - s));
}

PosteriorParams posterior_from_stats(const ModelStats& stats) {
  if (stats.count() < kMinEvaluations) {
    throw InsufficientData("posterior needs at least 3 evaluations, have " +
                           std::to_string(stats.count()));
  }
  const double t = static_cast<double>(stats.count());
  const double s = std::max(stats.sq_dev_sum(), kVarianceFloor);
  return PosteriorParams{stats.mean(), std::sqrt(s / (t * (t - 2.0))), t - 2.0};
}

double posterior_sample(const PosteriorParams& params, RngStream& stream) {
  const auto k = kernels::make_student_t(params.dof);
  return params.center + params.scale * kernels::student_t_draw(stream, k);
}

Belief estimate_pi(std::span<const ModelStats> stats, std::uint64_t mc_samples, RngStream& stream) {
  if (mc_samples == 0) throw InvalidInput("mc_samples must be positive");
  const std::size_t n = stats.size();
  if (n == 0) throw InvalidInput("belief needs at least one model");

  std::vector<PosteriorParams> params;
  std::vector<kernels::StudentTConstants> consts;
  params.reserve(n);
  consts.reserve(n);
  for (const auto& s : stats) {
    params.push_back(posterior_from_stats(s));
    consts.push_back(kernels::make_student_t(params.back().dof));
  }

  Belief belief;
  belief.stats.assign(stats.begin(), stats.end());
  belief.mc_samples = mc_samples;
  belief.wins.assign(n, 0);
  if (n == 1) {
    belief.wins[0] = mc_samples;
    return belief;
  }

  auto lanes = kernels::LaneState::from_stream(stream);
  std::vector<double> draws(n * kChunkColumns);
  std::vector<const double*> rows(n);
  for (std::size_t m = 0; m < n; ++m) rows[m] = draws.data() + m * kChunkColumns;
  std::vector<std::size_t> tied;
  std::vector<std::size_t> leaders;

  for (std::uint64_t done = 0; done < mc_samples;) {
    const std::size_t cols = static_cast<std::size_t>(std::min(kChunkColumns, mc_samples - done));
    for (std::size_t m = 0; m < n; ++m) {
      std::span<double> row(draws.data() + m * kChunkColumns, cols);
      kernels::fill_student_t(lanes, consts[m], row);
      kernels::affine(row, params[m].center, params[m].scale);
    }
    tied.clear();
    kernels::count_row_maxima(rows, cols, belief.wins, tied);
    for (std::size_t col : tied) {
      double best = rows[0][col];
      for (std::size_t m = 1; m < n; ++m) best = std::max(best, rows[m][col]);
      leaders.clear();
      for (std::size_t m = 0; m < n; ++m) {
        if (rows[m][col] == best) leaders.push_back(m);
      }
      ++belief.wins[leaders[stream.below(leaders.size())]];
    }
    done += cols;
  }
  return belief;
}

}  // namespace fiesta
