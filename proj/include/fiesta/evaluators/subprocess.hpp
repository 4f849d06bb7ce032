#pragma once

#include <sys/types.h>

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fiesta/core/types.hpp"
#include "fiesta/evaluators/evaluator.hpp"

namespace fiesta {

struct SubprocessOptions {
  // With no args the command line is run through /bin/sh -c.
  std::string command;
  std::vector<std::string> args;
  // Requested pipeline depth; the child's advertised limit caps it.
  std::size_t max_in_flight = 1;
  // Longest wait for any single response.  None waits forever.
  std::optional<std::chrono::milliseconds> timeout;
};

// Long-lived child process speaking line-delimited JSON on stdin/stdout:
//   -> {"fiesta_protocol":1,"models":[...]}    <- {"ok":true,"max_in_flight":k}
//   -> {"id":n,"model":"m","split_seed":s,"model_seed":t}
//   <- {"id":n,"score":x} or {"id":n,"error":"..."}
//   -> {"shutdown":true}
// Responses may come back in any order and are matched by id.
class SubprocessEvaluator final : public Evaluator {
 public:
  // Spawns the child and completes the handshake.  Throws EvaluatorFailure if
  // the child cannot be started or dies, ProtocolError on a bad handshake.
  SubprocessEvaluator(const CandidateSet& models, SubprocessOptions options);
  ~SubprocessEvaluator() override;

  SubprocessEvaluator(const SubprocessEvaluator&) = delete;
  SubprocessEvaluator& operator=(const SubprocessEvaluator&) = delete;

  std::size_t max_in_flight() const override { return max_in_flight_; }
  void submit(const EvaluationRequest& request) override;
  // Throws ProtocolError on malformed responses or ids that match no
  // outstanding request, EvaluatorFailure on child exit or timeout.
  Completion next_completion() override;
  std::size_t in_flight() const override { return pending_.size(); }
  // Outstanding requests are abandoned; late responses to them are dropped.
  void cancel_all() override;

  // Sends the shutdown record and waits for the child to exit.
  void shutdown();

  // Last few kilobytes the child wrote to stderr.
  const std::string& stderr_tail() const { return err_tail_; }
  std::size_t child_limit() const { return child_limit_; }

 private:
  std::string read_line();
  void write_line(const std::string& line);
  void drain_stderr();
  [[noreturn]] void child_gone(const std::string& what);
  void close_fds();

  SubprocessOptions options_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  int err_from_child_ = -1;
  std::string out_buf_;
  std::string err_tail_;
  std::size_t max_in_flight_ = 1;
  std::size_t child_limit_ = 1;
  std::map<std::uint64_t, EvaluationRequest> pending_;
  std::set<std::uint64_t> abandoned_;
};

}  // namespace fiesta
