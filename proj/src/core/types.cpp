#include "fiesta/core/types.hpp"

#include <algorithm>
#include <unordered_set>

#include "fiesta/core/errors.hpp"

namespace fiesta {

CandidateSet::CandidateSet(const std::vector<std::string>& names) {
  std::unordered_set<std::string> seen;
  models_.reserve(names.size());
  for (const auto& name : names) {
    if (name.empty()) throw InvalidInput("model names must be non-empty");
    if (!seen.insert(name).second) throw InvalidInput("duplicate model name '" + name + "'");
    models_.push_back(ModelId{name, models_.size()});
  }
}

std::vector<std::string> CandidateSet::names() const {
  std::vector<std::string> out;
  out.reserve(models_.size());
  for (const auto& m : models_) out.push_back(m.name);
  return out;
}

std::optional<std::size_t> CandidateSet::find(std::string_view name) const {
  for (const auto& m : models_) {
    if (m.name == name) return m.index;
  }
  return std::nullopt;
}

std::vector<double> Belief::pi() const {
  std::vector<double> out(wins.size());
  for (std::size_t m = 0; m < wins.size(); ++m) out[m] = pi(m);
  return out;
}

double Belief::max_pi() const { return wins.empty() ? 0.0 : pi(argmax()); }

std::size_t Belief::argmax() const {
  return static_cast<std::size_t>(std::max_element(wins.begin(), wins.end()) - wins.begin());
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::BudgetExhausted: return "BudgetExhausted";
    case Termination::ConfidenceReached: return "ConfidenceReached";
    case Termination::MaxEvalsSafeguard: return "MaxEvalsSafeguard";
  }
  return "?";
}

std::string_view to_string(TraceKind k) {
  switch (k) {
    case TraceKind::Evaluated: return "evaluated";
    case TraceKind::Eliminated: return "eliminated";
    case TraceKind::RoundStarted: return "round_started";
    case TraceKind::BeliefUpdated: return "belief_updated";
    case TraceKind::Terminated: return "terminated";
  }
  return "?";
}

}  // namespace fiesta
