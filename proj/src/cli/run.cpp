#include "fiesta/cli/run.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>

#include <boost/math/distributions/beta.hpp>

#include "fiesta/core/errors.hpp"
#include "fiesta/core/trace.hpp"
#include "fiesta/evaluators/subprocess.hpp"

namespace fiesta::cli {
namespace {

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string pad(std::string s, std::size_t width, bool left = false) {
  if (s.size() >= width) return s;
  return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

// Builds evaluators for one resolved config; the replay table is read once.
class EvaluatorFactory {
 public:
  explicit EvaluatorFactory(const CampaignConfig& c) : c_(c), models_(c.models) {
    if (c.evaluator == EvaluatorKind::Replay) table_ = ReplayTable::load_csv(c.csv_file);
  }

  const CandidateSet& models() const { return models_; }

  std::unique_ptr<Evaluator> make(std::uint64_t seed, std::vector<std::string>* warnings) const {
    switch (c_.evaluator) {
      case EvaluatorKind::Synthetic:
        return std::make_unique<SyntheticEvaluator>(models_, c_.arms, seed);
      case EvaluatorKind::Replay: {
        // Replay completes instantly; the depth only bounds how much is lost
        // when the pool runs dry mid-pipeline.
        const std::size_t depth =
            c_.mode == Mode::BatchFixedConfidence && c_.async ? std::max(c_.max_in_flight, c_.batch_size) : c_.max_in_flight;
        auto e = std::make_unique<ReplayEvaluator>(models_, table_, c_.exhaustion, seed, depth);
        if (warnings) warnings->insert(warnings->end(), e->warnings().begin(), e->warnings().end());
        return e;
      }
      case EvaluatorKind::Subprocess: {
        SubprocessOptions o;
        o.command = c_.command;
        o.args = c_.args;
        o.max_in_flight = c_.max_in_flight;
        if (c_.timeout_seconds) {
          o.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(*c_.timeout_seconds * 1000.0));
        }
        return std::make_unique<SubprocessEvaluator>(models_, std::move(o));
      }
    }
    throw ConfigError("unknown evaluator kind");
  }

 private:
  const CampaignConfig& c_;
  CandidateSet models_;
  ReplayTable table_;
};

SelectionResult run_algorithm(const CampaignConfig& c, const CandidateSet& models, Evaluator& ev,
                              std::uint64_t seed, const std::function<void(const TraceEvent&)>& on_event) {
  CampaignOptions o;
  o.seed = seed;
  o.mc_samples = c.mc_samples;
  o.transform = c.transform;
  o.on_event = on_event;
  const ConfidencePolicy conf{c.delta, c.max_evals};
  switch (c.mode) {
    case Mode::FixedBudget: return sequential_halving(models, {c.budget}, ev, o);
    case Mode::FixedConfidence: return ttts(models, conf, ev, o);
    case Mode::BatchFixedConfidence:
      return bts(models, conf,
                 {c.batch_size, c.async ? BatchMode::Asynchronous : BatchMode::Synchronous}, ev, o);
    case Mode::NonAdaptiveFB: return nonadaptive_fixed_budget(models, {c.budget}, ev, o);
    case Mode::NonAdaptiveFC: return nonadaptive_fixed_confidence(models, conf, ev, o);
  }
  throw ConfigError("unknown mode");
}

}  // namespace

std::unique_ptr<Evaluator> make_evaluator(const CampaignConfig& c, const CandidateSet& models,
                                          std::vector<std::string>* warnings) {
  CampaignConfig copy = c;
  copy.models = models.names();
  return EvaluatorFactory(copy).make(c.seed, warnings);
}

SelectionResult execute(const CampaignConfig& c, const std::function<void(const TraceEvent&)>& on_event) {
  const EvaluatorFactory factory(c);
  auto ev = factory.make(c.seed, nullptr);
  return run_algorithm(c, factory.models(), *ev, c.seed, on_event);
}

std::string trace_header(const CampaignConfig& c) {
  return nlohmann::json{{"kind", "header"}, {"config", to_json(c)}}.dump();
}

void write_summary(std::ostream& out, const SelectionResult& r, std::vector<std::string> names) {
  out << "chosen: " << r.chosen.name << '\n';
  out << "terminated_by: " << to_string(r.terminated_by) << '\n';
  out << "total_evals: " << r.total_evals << '\n';
  if (names.size() != r.eval_counts.size()) {
    names.assign(r.eval_counts.size(), "");
    for (const auto& e : r.trace) {
      if (const auto* ev = std::get_if<Evaluated>(&e.payload)) names[ev->request.model.index] = ev->request.model.name;
    }
  }
  std::size_t width = 5;
  for (const auto& n : names) width = std::max(width, n.size());
  out << pad("model", width, true) << pad("evals", 8) << pad("mean", 12) << pad("pi", 10) << '\n';
  for (std::size_t m = 0; m < r.eval_counts.size(); ++m) {
    out << pad(names[m], width, true) << pad(std::to_string(r.eval_counts[m]), 8)
        << pad(r.eval_counts[m] ? fixed(r.stats[m].mean(), 6) : "-", 12)
        << pad(r.final_belief ? fixed(r.final_belief->pi(m), 6) : "-", 10) << '\n';
  }
}

int run_campaign(const CampaignConfig& config, std::ostream& out, std::ostream& err) {
  CampaignConfig c;
  try {
    c = resolve(config);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }

  std::ofstream trace;
  if (c.trace_path) {
    trace.open(*c.trace_path, std::ios::trunc);
    if (!trace) {
      err << "error: cannot open trace file " << *c.trace_path << '\n';
      return kExitError;
    }
    trace << trace_header(c) << '\n';
  }
  const auto on_event = [&](const TraceEvent& e) {
    if (trace.is_open()) trace << trace_line(e) << '\n' << std::flush;
  };

  try {
    const EvaluatorFactory factory(c);
    std::vector<std::string> warnings;
    auto ev = factory.make(c.seed, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << '\n';
    const auto r = run_algorithm(c, factory.models(), *ev, c.seed, on_event);
    write_summary(out, r, c.models);
    return r.terminated_by == Termination::MaxEvalsSafeguard ? kExitSafeguard : kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

std::pair<double, double> clopper_pearson(std::uint64_t k, std::uint64_t n, double level) {
  if (n == 0 || k > n) throw InvalidInput("clopper_pearson needs 0 <= k <= n, n > 0");
  const double alpha = 1.0 - level;
  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  const double lo = k == 0 ? 0.0 : boost::math::quantile(boost::math::beta_distribution<>(kd, nd - kd + 1), alpha / 2);
  const double hi =
      k == n ? 1.0 : boost::math::quantile(boost::math::beta_distribution<>(kd + 1, nd - kd), 1 - alpha / 2);
  return {lo, hi};
}

ReplicationReport run_replications(const CampaignConfig& config, std::uint64_t replications,
                                   const std::optional<std::string>& true_best, bool allow_subprocess) {
  if (replications == 0) throw ConfigError("config field 'replications': must be positive");
  CampaignConfig c = resolve(config);
  if (c.evaluator == EvaluatorKind::Subprocess && !allow_subprocess) {
    throw ConfigError(
        "replications against a subprocess evaluator are refused without --allow-subprocess");
  }
  c.trace_path.reset();
  const EvaluatorFactory factory(c);

  ReplicationReport r;
  r.models = c.models;
  r.selected.assign(c.models.size(), 0);
  if (true_best) {
    r.true_best = factory.models().find(*true_best);
    if (!r.true_best) throw ConfigError("config field 'true_best': unknown model '" + *true_best + "'");
  }
  double sum = 0.0;
  for (std::uint64_t i = 0; i < replications; ++i) {
    const std::uint64_t seed = c.seed + i;
    auto ev = factory.make(seed, nullptr);
    const auto res = run_algorithm(c, factory.models(), *ev, seed, {});
    ++r.selected[res.chosen.index];
    r.min_evals = i == 0 ? res.total_evals : std::min(r.min_evals, res.total_evals);
    r.max_evals = std::max(r.max_evals, res.total_evals);
    sum += static_cast<double>(res.total_evals);
    switch (res.terminated_by) {
      case Termination::ConfidenceReached: ++r.confidence_reached; break;
      case Termination::BudgetExhausted: ++r.budget_exhausted; break;
      case Termination::MaxEvalsSafeguard: ++r.safeguard; break;
    }
    if (r.true_best && res.chosen.index == *r.true_best) ++r.correct;
  }
  r.replications = replications;
  r.mean_evals = sum / static_cast<double>(replications);
  if (r.true_best) std::tie(r.correct_lo, r.correct_hi) = clopper_pearson(r.correct, replications, 0.99);
  return r;
}

void write_report(std::ostream& out, const ReplicationReport& r) {
  out << "replications: " << r.replications << '\n';
  out << "total_evals: min " << r.min_evals << "  mean " << fixed(r.mean_evals, 2) << "  max " << r.max_evals
      << '\n';
  out << "terminated: ConfidenceReached " << r.confidence_reached << "  BudgetExhausted " << r.budget_exhausted
      << "  MaxEvalsSafeguard " << r.safeguard << '\n';
  std::size_t width = 5;
  for (const auto& m : r.models) width = std::max(width, m.size());
  out << pad("model", width, true) << pad("selected", 10) << pad("frequency", 11) << '\n';
  for (std::size_t m = 0; m < r.models.size(); ++m) {
    out << pad(r.models[m], width, true) << pad(std::to_string(r.selected[m]), 10)
        << pad(fixed(static_cast<double>(r.selected[m]) / static_cast<double>(r.replications), 4), 11) << '\n';
  }
  if (r.true_best) {
    out << "correct: " << r.correct << "/" << r.replications << " = " << fixed(r.correct_rate(), 4)
        << "  99% CI [" << fixed(r.correct_lo, 4) << ", " << fixed(r.correct_hi, 4) << "]\n";
  }
}

}  // namespace fiesta::cli
