#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "fiesta/core/types.hpp"

namespace fiesta {

// Outcome of one request.  Exactly one of `score` and `error` is meaningful:
// an evaluation that the back-end reports as failed carries `error`.
struct Completion {
  EvaluationRequest request;
  std::optional<double> score;
  std::string error;

  bool ok() const { return score.has_value(); }
};

// Source of noisy scores.  Requests are submitted and completions collected
// separately so callers can keep up to max_in_flight() requests outstanding;
// completions may arrive in any order and are matched by request sequence.
class Evaluator {
 public:
  virtual ~Evaluator() = default;

  // 1 means serial.
  virtual std::size_t max_in_flight() const = 0;

  virtual void submit(const EvaluationRequest& request) = 0;

  // Blocks until one submitted request completes.  Throws EvaluatorFailure
  // when the back-end itself is gone (e.g. the child process exited).
  virtual Completion next_completion() = 0;

  virtual std::size_t in_flight() const = 0;

  // Forgets every outstanding request; their results are never returned.
  virtual void cancel_all() = 0;

  // submit + next_completion for a single request on an idle evaluator.
  // Throws EvaluatorFailure if the evaluation fails.
  EvaluationScore evaluate(const EvaluationRequest& request);
};

}  // namespace fiesta
