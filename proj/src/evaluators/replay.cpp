#include "fiesta/evaluators/replay.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "fiesta/core/errors.hpp"
#include "fiesta/core/rng.hpp"

namespace fiesta {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view to_string(Exhaustion e) {
  switch (e) {
    case Exhaustion::Error: return "error";
    case Exhaustion::Cycle: return "cycle";
    case Exhaustion::ResampleWithReplacement: return "resample";
  }
  return "?";
}

Exhaustion parse_exhaustion(std::string_view s) {
  if (s == "error") return Exhaustion::Error;
  if (s == "cycle") return Exhaustion::Cycle;
  if (s == "resample") return Exhaustion::ResampleWithReplacement;
  throw InvalidInput("unknown exhaustion policy '" + std::string(s) + "'");
}

ReplayTable ReplayTable::parse_csv(std::istream& in) {
  ReplayTable table;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    const auto comma = row.find(',');
    if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos) {
      throw InvalidInput("replay csv line " + std::to_string(line_no) + ": expected two columns");
    }
    const auto name = trim(row.substr(0, comma));
    const auto value = trim(row.substr(comma + 1));
    if (!header) {
      if (name != "model" || value != "score") {
        throw InvalidInput("replay csv must start with the header 'model,score'");
      }
      header = true;
      continue;
    }
    double score = 0.0;
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), score);
    if (ec != std::errc() || end != value.data() + value.size() || !std::isfinite(score) ||
        name.empty()) {
      throw InvalidInput("replay csv line " + std::to_string(line_no) + ": bad row '" +
                         std::string(row) + "'");
    }
    auto [it, fresh] = table.scores.try_emplace(std::string(name));
    if (fresh) table.order.emplace_back(name);
    it->second.push_back(score);
  }
  if (!header) throw InvalidInput("replay csv is empty");
  return table;
}

ReplayTable ReplayTable::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open replay file " + path.string());
  return parse_csv(in);
}

ReplayEvaluator::ReplayEvaluator(const CandidateSet& models, const ReplayTable& table,
                                 Exhaustion policy, std::uint64_t seed, std::size_t max_in_flight)
    : policy_(policy), seed_(seed), max_in_flight_(max_in_flight) {
  if (max_in_flight == 0) throw InvalidInput("max_in_flight must be positive");
  for (const auto& m : models) {
    const auto it = table.scores.find(m.name);
    if (it == table.scores.end() || it->second.empty()) {
      throw InvalidInput("replay table has no scores for model '" + m.name + "'");
    }
    pools_.push_back(it->second);
  }
  cursors_.assign(pools_.size(), 0);
  for (const auto& name : table.order) {
    if (!models.find(name)) warnings_.push_back("replay table model '" + name + "' is not a candidate; ignored");
  }
}

void ReplayEvaluator::submit(const EvaluationRequest& request) {
  const std::size_t m = request.model.index;
  if (m >= pools_.size()) throw InvalidInput("request for unknown model");
  if (queue_.size() >= max_in_flight_) throw InvalidInput("replay evaluator is saturated");
  const auto& pool = pools_[m];
  double score = 0.0;
  switch (policy_) {
    case Exhaustion::ResampleWithReplacement: {
      auto s = keyed_stream(seed_, Purpose::Evaluator, m, request.sequence);
      score = pool[s.below(pool.size())];
      break;
    }
    case Exhaustion::Cycle:
      score = pool[cursors_[m]++ % pool.size()];
      break;
    case Exhaustion::Error:
      if (cursors_[m] >= pool.size()) {
        throw PoolExhausted("replay scores for model '" + request.model.name + "' exhausted after " +
                            std::to_string(pool.size()) + " evaluations");
      }
      score = pool[cursors_[m]++];
      break;
  }
  queue_.push_back(Completion{request, score, {}});
}

Completion ReplayEvaluator::next_completion() {
  if (queue_.empty()) throw EvaluatorFailure("no request in flight");
  Completion c = std::move(queue_.front());
  queue_.pop_front();
  return c;
}

}  // namespace fiesta
