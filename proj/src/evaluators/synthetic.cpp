#include "fiesta/evaluators/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include <boost/math/distributions/normal.hpp>

#include "fiesta/core/errors.hpp"
#include "fiesta/core/rng.hpp"
#include "fiesta/kernels/math.hpp"

namespace fiesta {
namespace {

using nlohmann::json;

double number(const json& j, const char* key, const std::string& arm) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw InvalidInput("arm '" + arm + "': missing numeric field '" + key + "'");
  }
  return j[key].get<double>();
}

double truncated_draw(const TruncatedGaussian& f, RngStream& s) {
  const boost::math::normal_distribution<> unit;
  const double a = boost::math::cdf(unit, (f.lo - f.mean) / f.sd);
  const double b = boost::math::cdf(unit, (f.hi - f.mean) / f.sd);
  const double p = a + s.uniform() * (b - a);
  // p can only hit 0 or 1 when the window sits entirely in a far tail.
  if (!(p > 0.0 && p < 1.0)) return p <= 0.0 ? f.lo : f.hi;
  return std::clamp(f.mean + f.sd * boost::math::quantile(unit, p), f.lo, f.hi);
}

}  // namespace

void ArmSpec::validate() const {
  const auto bad = [&](const std::string& why) { throw InvalidInput("arm '" + name + "': " + why); };
  if (name.empty()) throw InvalidInput("arm with empty name");
  if (!(duration > 0.0) || !std::isfinite(duration)) bad("duration must be positive");
  if (const auto* g = std::get_if<Gaussian>(&family)) {
    if (!std::isfinite(g->mean)) bad("mean must be finite");
    if (!(g->sd > 0.0) || !std::isfinite(g->sd)) bad("sd must be positive");
  } else if (const auto* t = std::get_if<TruncatedGaussian>(&family)) {
    if (!std::isfinite(t->mean)) bad("mean must be finite");
    if (!(t->sd > 0.0) || !std::isfinite(t->sd)) bad("sd must be positive");
    if (!(t->lo < t->hi) || !std::isfinite(t->lo) || !std::isfinite(t->hi)) bad("need lo < hi");
  } else {
    const auto& b = std::get<BetaArm>(family);
    if (!(b.alpha > 0.0) || !(b.beta > 0.0) || !std::isfinite(b.alpha) || !std::isfinite(b.beta)) {
      bad("alpha and beta must be positive");
    }
  }
}

double ArmSpec::mean() const {
  if (const auto* g = std::get_if<Gaussian>(&family)) return g->mean;
  if (const auto* t = std::get_if<TruncatedGaussian>(&family)) {
    const boost::math::normal_distribution<> unit;
    const double a = (t->lo - t->mean) / t->sd;
    const double b = (t->hi - t->mean) / t->sd;
    const double z = boost::math::cdf(unit, b) - boost::math::cdf(unit, a);
    return t->mean + t->sd * (boost::math::pdf(unit, a) - boost::math::pdf(unit, b)) / z;
  }
  const auto& b = std::get<BetaArm>(family);
  return b.alpha / (b.alpha + b.beta);
}

std::vector<ArmSpec> parse_arm_specs(const json& j) {
  if (!j.is_array()) throw InvalidInput("arm specs must be a JSON array");
  std::vector<ArmSpec> arms;
  for (const auto& a : j) {
    if (!a.is_object() || !a.contains("name") || !a["name"].is_string()) {
      throw InvalidInput("every arm needs a string 'name'");
    }
    ArmSpec arm;
    arm.name = a["name"].get<std::string>();
    const std::string family = a.value("family", std::string("gaussian"));
    if (family == "gaussian") {
      arm.family = Gaussian{number(a, "mean", arm.name), number(a, "sd", arm.name)};
    } else if (family == "truncated_gaussian") {
      arm.family = TruncatedGaussian{number(a, "mean", arm.name), number(a, "sd", arm.name),
                                     number(a, "lo", arm.name), number(a, "hi", arm.name)};
    } else if (family == "beta") {
      arm.family = BetaArm{number(a, "alpha", arm.name), number(a, "beta", arm.name)};
    } else {
      throw InvalidInput("arm '" + arm.name + "': unknown family '" + family + "'");
    }
    if (a.contains("duration")) arm.duration = number(a, "duration", arm.name);
    arm.validate();
    arms.push_back(std::move(arm));
  }
  return arms;
}

std::vector<ArmSpec> load_arm_specs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open arms file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput("arms file " + path.string() + ": " + e.what());
  }
  return parse_arm_specs(j);
}

json arm_specs_json(const std::vector<ArmSpec>& arms) {
  json out = json::array();
  for (const auto& arm : arms) {
    json a{{"name", arm.name}};
    if (const auto* g = std::get_if<Gaussian>(&arm.family)) {
      a["family"] = "gaussian";
      a["mean"] = g->mean;
      a["sd"] = g->sd;
    } else if (const auto* t = std::get_if<TruncatedGaussian>(&arm.family)) {
      a["family"] = "truncated_gaussian";
      a["mean"] = t->mean;
      a["sd"] = t->sd;
      a["lo"] = t->lo;
      a["hi"] = t->hi;
    } else {
      const auto& b = std::get<BetaArm>(arm.family);
      a["family"] = "beta";
      a["alpha"] = b.alpha;
      a["beta"] = b.beta;
    }
    a["duration"] = arm.duration;
    out.push_back(std::move(a));
  }
  return out;
}

double synthetic_draw(const ArmSpec& arm, std::uint64_t seed, const EvaluationRequest& request) {
  auto s = keyed_stream(seed, Purpose::Evaluator, request.model.index, request.sequence);
  if (const auto* g = std::get_if<Gaussian>(&arm.family)) {
    return g->mean + g->sd * kernels::normal_draw(s);
  }
  if (const auto* t = std::get_if<TruncatedGaussian>(&arm.family)) return truncated_draw(*t, s);
  const auto& b = std::get<BetaArm>(arm.family);
  const double x = kernels::gamma_draw(s, kernels::make_gamma(b.alpha));
  const double y = kernels::gamma_draw(s, kernels::make_gamma(b.beta));
  // Both gammas can underflow for tiny shapes; fall back on the larger shape.
  if (!(x + y > 0.0)) return b.alpha >= b.beta ? 1.0 : 0.0;
  return x / (x + y);
}

SyntheticEvaluator::SyntheticEvaluator(const CandidateSet& models, const std::vector<ArmSpec>& arms,
                                       std::uint64_t seed, std::size_t max_in_flight)
    : seed_(seed), max_in_flight_(max_in_flight) {
  if (max_in_flight == 0) throw InvalidInput("max_in_flight must be positive");
  std::unordered_map<std::string, const ArmSpec*> by_name;
  for (const auto& a : arms) {
    a.validate();
    if (!by_name.emplace(a.name, &a).second) throw InvalidInput("duplicate arm '" + a.name + "'");
  }
  for (const auto& m : models) {
    const auto it = by_name.find(m.name);
    if (it == by_name.end()) throw InvalidInput("no arm spec for model '" + m.name + "'");
    arms_.push_back(*it->second);
  }
}

void SyntheticEvaluator::submit(const EvaluationRequest& request) {
  if (request.model.index >= arms_.size()) throw InvalidInput("request for unknown model");
  if (pending_.size() >= max_in_flight_) throw InvalidInput("synthetic evaluator is saturated");
  const double finish = clock_ + arms_[request.model.index].duration;
  pending_.emplace(std::make_pair(finish, request.sequence), request);
}

Completion SyntheticEvaluator::next_completion() {
  if (pending_.empty()) throw EvaluatorFailure("no request in flight");
  auto node = pending_.extract(pending_.begin());
  clock_ = node.key().first;
  const EvaluationRequest& req = node.mapped();
  return Completion{req, synthetic_draw(arms_[req.model.index], seed_, req), {}};
}

}  // namespace fiesta
