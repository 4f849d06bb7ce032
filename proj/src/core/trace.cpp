#include "fiesta/core/trace.hpp"

#include <ostream>

namespace fiesta {
namespace {

using nlohmann::json;

json model_json(const ModelId& m) { return json{{"name", m.name}, {"index", m.index}}; }

struct PayloadJson {
  json& j;

  void operator()(const Evaluated& e) const {
    j["model"] = model_json(e.request.model);
    j["request"] = e.request.sequence;
    j["split_seed"] = e.request.split_seed;
    j["model_seed"] = e.request.model_seed;
    j["score"] = e.score;
  }
  void operator()(const Eliminated& e) const {
    j["model"] = model_json(e.model);
    j["round"] = e.round;
    j["mean"] = e.mean;
  }
  void operator()(const RoundStarted& e) const {
    j["round"] = e.round;
    j["models"] = e.models;
    j["evals_per_model"] = e.evals_per_model;
    if (e.selected) j["selected"] = *e.selected;
  }
  void operator()(const BeliefUpdated& e) const {
    j["total_evals"] = e.total_evals;
    j["pi"] = e.pi;
  }
  void operator()(const Terminated& e) const {
    j["reason"] = to_string(e.reason);
    j["chosen"] = model_json(e.chosen);
    j["total_evals"] = e.total_evals;
    j["unused_budget"] = e.unused_budget;
    j["abandoned_in_flight"] = e.abandoned_in_flight;
  }
};

}  // namespace

nlohmann::json to_json(const TraceEvent& event) {
  json j;
  j["seq"] = event.sequence;
  j["kind"] = to_string(event.kind());
  std::visit(PayloadJson{j}, event.payload);
  return j;
}

std::string trace_line(const TraceEvent& event) { return to_json(event).dump(); }

void write_trace(std::ostream& out, std::span<const TraceEvent> events) {
  for (const auto& e : events) out << trace_line(e) << '\n';
}

}  // namespace fiesta
