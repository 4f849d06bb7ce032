#include "fiesta/cli/main.hpp"

#include <CLI11.hpp>
#include <ostream>
#include <sstream>

#include "fiesta/cli/run.hpp"
#include "fiesta/core/errors.hpp"

namespace fiesta::cli {
namespace {

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  std::string trace;
  std::uint64_t mc_samples = 0;
  std::string transform;
  std::vector<std::string> models;
  std::uint64_t budget = 0;
  double delta = 0.0;
  std::uint64_t max_evals = 0;
  std::size_t batch_size = 0;
  bool async = false;
  std::string synthetic;
  std::string exec;
  std::string replay;
  std::size_t max_in_flight = 0;
  double timeout = 0.0;
  std::string exhaustion;
  // replicate
  std::uint64_t replications = 0;
  std::string algorithm;
  std::string true_best;
  bool allow_subprocess = false;
};

void add_campaign_flags(CLI::App* s, Flags& f) {
  s->add_option("--config", f.config, "JSON config file; flags override its fields")->check(CLI::ExistingFile);
  s->add_option("--seed", f.seed, "campaign seed");
  s->add_option("--trace", f.trace, "write the JSON-lines trace here");
  s->add_option("--mc-samples", f.mc_samples, "Monte-Carlo rounds per belief update")->check(CLI::PositiveNumber);
  s->add_option("--transform", f.transform, "score transform")->check(CLI::IsMember({"identity", "logit"}));
  s->add_option("--models", f.models, "candidate subset")->delimiter(',');
  s->add_option("--budget", f.budget, "total evaluation budget (fixed budget)");
  s->add_option("--delta", f.delta, "error probability (fixed confidence)");
  s->add_option("--max-evals", f.max_evals, "safeguard on total evaluations");
  s->add_option("--batch-size", f.batch_size, "BTS batch size");
  s->add_flag("--async", f.async, "asynchronous BTS");
  s->add_option("--synthetic", f.synthetic, "synthetic arms file");
  s->add_option("--exec", f.exec, "evaluator command, run through /bin/sh");
  s->add_option("--replay", f.replay, "replay score table (CSV)");
  s->add_option("--max-in-flight", f.max_in_flight, "pipeline depth for --exec")->check(CLI::PositiveNumber);
  s->add_option("--timeout", f.timeout, "per-evaluation timeout in seconds for --exec")->check(CLI::PositiveNumber);
  s->add_option("--exhaustion", f.exhaustion, "replay pool exhaustion policy")
      ->check(CLI::IsMember({"error", "cycle", "resample"}));
}

CampaignConfig build_config(const CLI::App& s, const Flags& f) {
  CampaignConfig c = f.config.empty() ? CampaignConfig{} : load_config(f.config);
  const auto given = [&](const char* name) { return s.count(name) > 0; };

  if (given("--seed")) c.seed = f.seed;
  if (given("--trace")) c.trace_path = f.trace;
  if (given("--mc-samples")) c.mc_samples = f.mc_samples;
  if (given("--transform")) c.transform = f.transform == "logit" ? TransformMode::logit() : TransformMode::identity();
  if (given("--models")) c.models = f.models;
  if (given("--budget")) c.budget = f.budget;
  if (given("--delta")) c.delta = f.delta;
  if (given("--max-evals")) c.max_evals = f.max_evals;
  if (given("--batch-size")) c.batch_size = f.batch_size;
  if (given("--async")) c.async = f.async;

  const int sources = given("--synthetic") + given("--exec") + given("--replay");
  if (sources > 1) throw ConfigError("config field 'evaluator': give only one of --synthetic, --exec, --replay");
  if (given("--synthetic")) {
    c.evaluator = EvaluatorKind::Synthetic;
    c.arms_file = f.synthetic;
    c.arms.clear();
  }
  if (given("--exec")) {
    c.evaluator = EvaluatorKind::Subprocess;
    c.command = f.exec;
    c.args.clear();
  }
  if (given("--replay")) {
    c.evaluator = EvaluatorKind::Replay;
    c.csv_file = f.replay;
  }
  if (given("--max-in-flight")) c.max_in_flight = f.max_in_flight;
  if (given("--timeout")) c.timeout_seconds = f.timeout;
  if (given("--exhaustion")) c.exhaustion = parse_exhaustion(f.exhaustion);
  return c;
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Statistically grounded selection among noisy candidate models"};
  app.name("fiesta");
  app.require_subcommand(1);
  Flags f;

  const std::pair<const char*, const char*> modes[] = {
      {"fb", "fixed budget: sequential halving"},
      {"fc", "fixed confidence: top-two Thompson sampling"},
      {"fc-batch", "fixed confidence: batch Thompson sampling"},
      {"baseline-fb", "non-adaptive fixed budget"},
      {"baseline-fc", "non-adaptive fixed confidence"},
  };
  for (const auto& [name, help] : modes) add_campaign_flags(app.add_subcommand(name, help), f);

  auto* rep = app.add_subcommand("replicate", "repeat a campaign over consecutive seeds");
  add_campaign_flags(rep, f);
  rep->add_option("--replications", f.replications, "number of campaigns")->required()->check(CLI::PositiveNumber);
  rep->add_option("--algorithm", f.algorithm, "mode to replicate (default: the config file's)")
      ->check(CLI::IsMember({"fb", "fc", "fc-batch", "baseline-fb", "baseline-fc"}));
  rep->add_option("--true-best", f.true_best, "model counted as the correct selection");
  rep->add_flag("--allow-subprocess", f.allow_subprocess, "permit replications against --exec");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    CampaignConfig c = build_config(*sub, f);
    if (name != "replicate") {
      c.mode = parse_mode(name);
      return run_campaign(c, out, err);
    }
    if (!f.algorithm.empty()) c.mode = parse_mode(f.algorithm);
    std::optional<std::string> best;
    if (!f.true_best.empty()) best = f.true_best;
    const auto report = run_replications(c, f.replications, best, f.allow_subprocess);
    write_report(out, report);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace fiesta::cli
