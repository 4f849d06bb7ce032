#include "fiesta/evaluators/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <thread>

#include <json.hpp>

#include "fiesta/core/errors.hpp"

extern char** environ;

namespace fiesta {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr std::size_t kStderrTail = 4096;
constexpr auto kExitGrace = std::chrono::seconds(5);

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

// Waits up to `grace` for the child to exit, then kills it.  Returns the
// wait status.
int reap(pid_t pid, Clock::duration grace) {
  const auto deadline = Clock::now() + grace;
  int status = 0;
  for (;;) {
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) return status;
    if (r < 0 && errno != EINTR) return 0;
    if (Clock::now() >= deadline) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  ::kill(pid, SIGKILL);
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  return status;
}

std::string describe_status(int status) {
  if (WIFEXITED(status)) return "exit status " + std::to_string(WEXITSTATUS(status));
  if (WIFSIGNALED(status)) return "killed by signal " + std::to_string(WTERMSIG(status));
  return "unknown status";
}

json parse_record(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error&) {
    throw ProtocolError("malformed record from evaluator: '" + line + "'");
  }
  if (!j.is_object()) throw ProtocolError("evaluator record is not an object: '" + line + "'");
  return j;
}

}  // namespace

SubprocessEvaluator::SubprocessEvaluator(const CandidateSet& models, SubprocessOptions options)
    : options_(std::move(options)) {
  if (options_.command.empty()) throw InvalidInput("subprocess command is empty");
  if (options_.max_in_flight == 0) throw InvalidInput("max_in_flight must be positive");
  // A dead child must surface as EPIPE, not kill the coordinator.
  ::signal(SIGPIPE, SIG_IGN);

  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw EvaluatorFailure(errno_text("pipe"));
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw EvaluatorFailure(errno_text("pipe"));
  }
  if (::pipe2(err_pipe, O_CLOEXEC) != 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    throw EvaluatorFailure(errno_text("pipe"));
  }

  std::vector<std::string> argv_store;
  if (options_.args.empty()) {
    argv_store = {"/bin/sh", "-c", options_.command};
  } else {
    argv_store.push_back(options_.command);
    argv_store.insert(argv_store.end(), options_.args.begin(), options_.args.end());
  }
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  argv.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  posix_spawn_file_actions_adddup2(&actions, err_pipe[1], STDERR_FILENO);
  const int rc = ::posix_spawnp(&pid_, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  err_from_child_ = err_pipe[0];
  if (rc != 0) {
    pid_ = -1;
    close_fds();
    throw EvaluatorFailure("cannot start evaluator '" + options_.command + "': " + std::strerror(rc));
  }

  try {
    write_line(json{{"fiesta_protocol", 1}, {"models", models.names()}}.dump());
    const json reply = parse_record(read_line());
    if (!reply.contains("ok") || reply["ok"] != true) {
      throw ProtocolError("evaluator refused the handshake: " + reply.dump());
    }
    if (!reply.contains("max_in_flight") || !reply["max_in_flight"].is_number_unsigned() ||
        reply["max_in_flight"].get<std::uint64_t>() < 1) {
      throw ProtocolError("handshake reply needs max_in_flight >= 1: " + reply.dump());
    }
    child_limit_ = reply["max_in_flight"].get<std::size_t>();
    max_in_flight_ = std::min(child_limit_, options_.max_in_flight);
  } catch (...) {
    if (pid_ > 0) {
      ::kill(pid_, SIGKILL);
      reap(pid_, kExitGrace);
      pid_ = -1;
    }
    close_fds();
    throw;
  }
}

SubprocessEvaluator::~SubprocessEvaluator() {
  try {
    shutdown();
  } catch (...) {
  }
  close_fds();
}

void SubprocessEvaluator::close_fds() {
  close_fd(to_child_);
  close_fd(from_child_);
  close_fd(err_from_child_);
}

void SubprocessEvaluator::shutdown() {
  if (pid_ <= 0) return;
  if (to_child_ >= 0) {
    const std::string line = json{{"shutdown", true}}.dump() + "\n";
    // Best effort: the child may already be gone.
    [[maybe_unused]] const auto n = ::write(to_child_, line.data(), line.size());
    close_fd(to_child_);
  }
  reap(pid_, kExitGrace);
  pid_ = -1;
  drain_stderr();
}

void SubprocessEvaluator::drain_stderr() {
  char buf[4096];
  while (err_from_child_ >= 0) {
    pollfd p{err_from_child_, POLLIN, 0};
    if (::poll(&p, 1, 0) <= 0) return;
    const ssize_t n = ::read(err_from_child_, buf, sizeof buf);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      close_fd(err_from_child_);
      return;
    }
    err_tail_.append(buf, static_cast<std::size_t>(n));
    if (err_tail_.size() > kStderrTail) err_tail_.erase(0, err_tail_.size() - kStderrTail);
  }
}

void SubprocessEvaluator::child_gone(const std::string& what) {
  std::string msg = "evaluator process " + what;
  if (pid_ > 0) {
    // Give the child a moment to finish writing its diagnostics.
    const int status = reap(pid_, std::chrono::milliseconds(500));
    pid_ = -1;
    msg += " (" + describe_status(status) + ")";
  }
  drain_stderr();
  close_fd(to_child_);
  if (!err_tail_.empty()) msg += "; stderr: " + err_tail_;
  throw EvaluatorFailure(msg);
}

void SubprocessEvaluator::write_line(const std::string& line) {
  if (to_child_ < 0) child_gone("is not running");
  const std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(to_child_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EPIPE) child_gone("stopped reading requests");
      throw EvaluatorFailure(errno_text("write to evaluator"));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::string SubprocessEvaluator::read_line() {
  std::optional<Clock::time_point> deadline;
  if (options_.timeout) deadline = Clock::now() + *options_.timeout;
  char buf[4096];
  for (;;) {
    if (const auto pos = out_buf_.find('\n'); pos != std::string::npos) {
      std::string line = out_buf_.substr(0, pos);
      out_buf_.erase(0, pos + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      return line;
    }
    if (from_child_ < 0) child_gone("is not running");
    int wait_ms = -1;
    if (deadline) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(*deadline - Clock::now());
      if (left.count() <= 0) {
        if (pid_ > 0) ::kill(pid_, SIGKILL);
        child_gone("timed out after " + std::to_string(options_.timeout->count()) + " ms");
      }
      wait_ms = static_cast<int>(left.count()) + 1;
    }
    pollfd fds[2] = {{from_child_, POLLIN, 0}, {err_from_child_, POLLIN, 0}};
    const int r = ::poll(fds, err_from_child_ >= 0 ? 2 : 1, wait_ms);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw EvaluatorFailure(errno_text("poll"));
    }
    if (r == 0) continue;  // deadline check above
    if (err_from_child_ >= 0 && fds[1].revents) drain_stderr();
    if (fds[0].revents) {
      const ssize_t n = ::read(from_child_, buf, sizeof buf);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw EvaluatorFailure(errno_text("read from evaluator"));
      }
      if (n == 0) child_gone("exited");
      out_buf_.append(buf, static_cast<std::size_t>(n));
    }
  }
}

void SubprocessEvaluator::submit(const EvaluationRequest& request) {
  if (pending_.size() >= max_in_flight_) throw InvalidInput("subprocess evaluator is saturated");
  if (pending_.count(request.sequence) || abandoned_.count(request.sequence)) {
    throw InvalidInput("request id " + std::to_string(request.sequence) + " reused");
  }
  write_line(json{{"id", request.sequence},
                  {"model", request.model.name},
                  {"split_seed", request.split_seed},
                  {"model_seed", request.model_seed}}
                 .dump());
  pending_.emplace(request.sequence, request);
}

Completion SubprocessEvaluator::next_completion() {
  if (pending_.empty()) throw EvaluatorFailure("no request in flight");
  for (;;) {
    const std::string line = read_line();
    const json j = parse_record(line);
    if (!j.contains("id") || !j["id"].is_number_unsigned()) {
      throw ProtocolError("response without a valid id: '" + line + "'");
    }
    const auto id = j["id"].get<std::uint64_t>();
    if (abandoned_.erase(id)) continue;
    const auto it = pending_.find(id);
    if (it == pending_.end()) {
      throw ProtocolError("response id " + std::to_string(id) + " matches no outstanding request");
    }
    Completion c{it->second, std::nullopt, {}};
    if (j.contains("error")) {
      c.error = j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump();
    } else if (j.contains("score") && j["score"].is_number()) {
      const double s = j["score"].get<double>();
      if (!std::isfinite(s)) throw ProtocolError("non-finite score in '" + line + "'");
      c.score = s;
    } else {
      throw ProtocolError("response has neither score nor error: '" + line + "'");
    }
    pending_.erase(it);
    return c;
  }
}

void SubprocessEvaluator::cancel_all() {
  for (const auto& [id, req] : pending_) abandoned_.insert(id);
  pending_.clear();
}

}  // namespace fiesta
