#include "fiesta/cli/config.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <set>

#include "fiesta/core/errors.hpp"

namespace fiesta::cli {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw ConfigError("config field '" + field + "': " + why);
}

const json* member(const json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

void read(const json& j, const char* key, const std::string& path, std::uint64_t& out) {
  if (const json* v = member(j, key)) {
    if (!v->is_number_unsigned()) fail(path + key, "expected a non-negative integer");
    out = v->get<std::uint64_t>();
  }
}

void read_size(const json& j, const char* key, const std::string& path, std::size_t& out) {
  std::uint64_t v = out;
  read(j, key, path, v);
  out = static_cast<std::size_t>(v);
}

void read(const json& j, const char* key, const std::string& path, double& out) {
  if (const json* v = member(j, key)) {
    if (!v->is_number()) fail(path + key, "expected a number");
    out = v->get<double>();
  }
}

void read(const json& j, const char* key, const std::string& path, bool& out) {
  if (const json* v = member(j, key)) {
    if (!v->is_boolean()) fail(path + key, "expected true or false");
    out = v->get<bool>();
  }
}

void read(const json& j, const char* key, const std::string& path, std::string& out) {
  if (const json* v = member(j, key)) {
    if (!v->is_string()) fail(path + key, "expected a string");
    out = v->get<std::string>();
  }
}

void read(const json& j, const char* key, const std::string& path, std::vector<std::string>& out) {
  if (const json* v = member(j, key)) {
    if (!v->is_array()) fail(path + key, "expected an array of strings");
    out.clear();
    for (const auto& s : *v) {
      if (!s.is_string()) fail(path + key, "expected an array of strings");
      out.push_back(s.get<std::string>());
    }
  }
}

const json& object(const json& j, const char* key, const json& fallback) {
  const json* v = member(j, key);
  if (!v) return fallback;
  if (!v->is_object()) fail(key, "expected an object");
  return *v;
}

EvaluatorKind parse_evaluator_kind(std::string_view s) {
  if (s == "synthetic") return EvaluatorKind::Synthetic;
  if (s == "subprocess") return EvaluatorKind::Subprocess;
  if (s == "replay") return EvaluatorKind::Replay;
  fail("evaluator.kind", "expected synthetic, subprocess or replay, got '" + std::string(s) + "'");
}

bool fixed_confidence(Mode m) {
  return m == Mode::FixedConfidence || m == Mode::BatchFixedConfidence || m == Mode::NonAdaptiveFC;
}

}  // namespace

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::FixedBudget: return "fb";
    case Mode::FixedConfidence: return "fc";
    case Mode::BatchFixedConfidence: return "fc-batch";
    case Mode::NonAdaptiveFB: return "baseline-fb";
    case Mode::NonAdaptiveFC: return "baseline-fc";
  }
  return "?";
}

Mode parse_mode(std::string_view s) {
  for (Mode m : {Mode::FixedBudget, Mode::FixedConfidence, Mode::BatchFixedConfidence,
                 Mode::NonAdaptiveFB, Mode::NonAdaptiveFC}) {
    if (to_string(m) == s) return m;
  }
  fail("mode.kind", "expected fb, fc, fc-batch, baseline-fb or baseline-fc, got '" + std::string(s) + "'");
}

std::string_view to_string(EvaluatorKind k) {
  switch (k) {
    case EvaluatorKind::Synthetic: return "synthetic";
    case EvaluatorKind::Subprocess: return "subprocess";
    case EvaluatorKind::Replay: return "replay";
  }
  return "?";
}

bool operator==(const CampaignConfig& a, const CampaignConfig& b) { return to_json(a) == to_json(b); }

CampaignConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  CampaignConfig c;
  const json empty = json::object();

  const json& mode = object(j, "mode", empty);
  if (const json* kind = member(mode, "kind")) {
    if (!kind->is_string()) fail("mode.kind", "expected a string");
    c.mode = parse_mode(kind->get<std::string>());
  }
  read(mode, "budget", "mode.", c.budget);
  read(mode, "delta", "mode.", c.delta);
  read(mode, "max_evals", "mode.", c.max_evals);
  read_size(mode, "batch_size", "mode.", c.batch_size);
  read(mode, "async", "mode.", c.async);

  const json& ev = object(j, "evaluator", empty);
  if (const json* kind = member(ev, "kind")) {
    if (!kind->is_string()) fail("evaluator.kind", "expected a string");
    c.evaluator = parse_evaluator_kind(kind->get<std::string>());
  }
  read(ev, "arms_file", "evaluator.", c.arms_file);
  if (const json* arms = member(ev, "arms")) {
    try {
      c.arms = parse_arm_specs(*arms);
    } catch (const InvalidInput& e) {
      fail("evaluator.arms", e.what());
    }
  }
  read(ev, "command", "evaluator.", c.command);
  read(ev, "args", "evaluator.", c.args);
  read_size(ev, "max_in_flight", "evaluator.", c.max_in_flight);
  if (const json* t = member(ev, "timeout_seconds")) {
    if (!t->is_number()) fail("evaluator.timeout_seconds", "expected a number");
    c.timeout_seconds = t->get<double>();
  }
  read(ev, "csv_file", "evaluator.", c.csv_file);
  if (const json* p = member(ev, "exhaustion")) {
    if (!p->is_string()) fail("evaluator.exhaustion", "expected a string");
    try {
      c.exhaustion = parse_exhaustion(p->get<std::string>());
    } catch (const InvalidInput& e) {
      fail("evaluator.exhaustion", e.what());
    }
  }

  read(j, "models", "", c.models);
  read(j, "seed", "", c.seed);
  read(j, "mc_samples", "", c.mc_samples);
  if (const json* t = member(j, "transform")) {
    std::string kind;
    double epsilon = 1e-6;
    if (t->is_string()) {
      kind = t->get<std::string>();
    } else if (t->is_object()) {
      read(*t, "kind", "transform.", kind);
      read(*t, "epsilon", "transform.", epsilon);
    } else {
      fail("transform", "expected \"identity\", \"logit\" or an object");
    }
    if (kind == "identity") {
      c.transform = TransformMode::identity();
    } else if (kind == "logit") {
      try {
        c.transform = TransformMode::logit(epsilon);
      } catch (const InvalidInput& e) {
        fail("transform.epsilon", e.what());
      }
    } else {
      fail("transform.kind", "expected identity or logit, got '" + kind + "'");
    }
  }
  if (const json* t = member(j, "trace")) {
    if (!t->is_string()) fail("trace", "expected a path string");
    c.trace_path = t->get<std::string>();
  }
  return c;
}

CampaignConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    return parse_config(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
}

json to_json(const CampaignConfig& c) {
  json j;
  j["mode"] = {{"kind", to_string(c.mode)},     {"budget", c.budget},         {"delta", c.delta},
               {"max_evals", c.max_evals},      {"batch_size", c.batch_size}, {"async", c.async}};
  json ev{{"kind", to_string(c.evaluator)},
          {"arms_file", c.arms_file},
          {"arms", arm_specs_json(c.arms)},
          {"command", c.command},
          {"args", c.args},
          {"max_in_flight", c.max_in_flight},
          {"timeout_seconds", c.timeout_seconds ? json(*c.timeout_seconds) : json(nullptr)},
          {"csv_file", c.csv_file},
          {"exhaustion", to_string(c.exhaustion)}};
  j["evaluator"] = std::move(ev);
  j["models"] = c.models;
  j["seed"] = c.seed;
  j["mc_samples"] = c.mc_samples;
  j["transform"] = c.transform.kind == TransformMode::Kind::Logit
                       ? json{{"kind", "logit"}, {"epsilon", c.transform.epsilon}}
                       : json{{"kind", "identity"}};
  j["trace"] = c.trace_path ? json(*c.trace_path) : json(nullptr);
  return j;
}

CampaignConfig resolve(CampaignConfig c) {
  switch (c.evaluator) {
    case EvaluatorKind::Synthetic:
      if (c.arms.empty()) {
        if (c.arms_file.empty()) fail("evaluator.arms_file", "synthetic evaluator needs arms or an arms file");
        try {
          c.arms = load_arm_specs(c.arms_file);
        } catch (const InvalidInput& e) {
          fail("evaluator.arms_file", e.what());
        }
      }
      if (c.models.empty()) {
        for (const auto& a : c.arms) c.models.push_back(a.name);
      }
      for (const auto& m : c.models) {
        bool found = false;
        for (const auto& a : c.arms) found = found || a.name == m;
        if (!found) fail("models", "no synthetic arm named '" + m + "'");
      }
      break;
    case EvaluatorKind::Replay: {
      if (c.csv_file.empty()) fail("evaluator.csv_file", "replay evaluator needs a CSV file");
      ReplayTable table;
      try {
        table = ReplayTable::load_csv(c.csv_file);
      } catch (const InvalidInput& e) {
        fail("evaluator.csv_file", e.what());
      }
      if (c.models.empty()) c.models = table.order;
      for (const auto& m : c.models) {
        if (!table.scores.count(m)) fail("models", "replay file has no scores for '" + m + "'");
      }
      break;
    }
    case EvaluatorKind::Subprocess:
      if (c.command.empty()) fail("evaluator.command", "subprocess evaluator needs a command");
      if (c.models.empty()) fail("models", "subprocess evaluator needs explicit model names");
      if (c.max_in_flight == 0) fail("evaluator.max_in_flight", "must be at least 1");
      if (c.timeout_seconds && !(*c.timeout_seconds > 0.0)) fail("evaluator.timeout_seconds", "must be positive");
      break;
  }

  if (c.models.empty()) fail("models", "no candidate models");
  if (std::set<std::string>(c.models.begin(), c.models.end()).size() != c.models.size()) {
    fail("models", "model names must be unique");
  }
  for (const auto& m : c.models) {
    if (m.empty()) fail("models", "model names must be non-empty");
  }
  if (c.mc_samples == 0) fail("mc_samples", "must be positive");

  const std::uint64_t n = c.models.size();
  if (c.mode == Mode::FixedBudget) {
    if (n < 2) fail("models", "sequential halving needs at least 2 models");
    const std::uint64_t need = n * static_cast<std::uint64_t>(std::bit_width(n - 1));
    if (c.budget < need) {
      fail("mode.budget", "budget too small: " + std::to_string(n) + " models need at least " +
                              std::to_string(need) + " evaluations, got " + std::to_string(c.budget));
    }
  }
  if (c.mode == Mode::NonAdaptiveFB && c.budget < n) {
    fail("mode.budget", "budget too small: " + std::to_string(n) + " models need at least " +
                            std::to_string(n) + " evaluations, got " + std::to_string(c.budget));
  }
  if (fixed_confidence(c.mode)) {
    if (!(c.delta > 0.0 && c.delta < 1.0)) fail("mode.delta", "must lie in (0, 1)");
    if (c.max_evals < 3 * n) fail("mode.max_evals", "must be at least 3N = " + std::to_string(3 * n));
  }
  if (c.mode == Mode::BatchFixedConfidence) {
    if (c.batch_size == 0) fail("mode.batch_size", "must be at least 1");
    if (c.async && c.evaluator == EvaluatorKind::Subprocess && c.max_in_flight < c.batch_size) {
      fail("evaluator.max_in_flight", "asynchronous batches of " + std::to_string(c.batch_size) +
                                          " need at least that many requests in flight");
    }
  }
  return c;
}

}  // namespace fiesta::cli
