#include "fiesta/evaluators/evaluator.hpp"

#include "fiesta/core/errors.hpp"

namespace fiesta {

EvaluationScore Evaluator::evaluate(const EvaluationRequest& request) {
  if (in_flight() != 0) throw InvalidInput("evaluate() needs an idle evaluator");
  submit(request);
  Completion c = next_completion();
  if (c.request.sequence != request.sequence) {
    throw ProtocolError("completion for request " + std::to_string(c.request.sequence) +
                        " while waiting for " + std::to_string(request.sequence));
  }
  if (!c.ok()) throw EvaluatorFailure(c.error, request.sequence);
  return EvaluationScore{c.request, *c.score};
}

}  // namespace fiesta
