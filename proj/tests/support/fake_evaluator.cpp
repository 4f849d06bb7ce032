// Scripted evaluator child for protocol tests.  Speaks the line-delimited
// JSON protocol on stdin/stdout and can misbehave on request.

#include <poll.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

using nlohmann::json;

namespace {

struct Options {
  std::uint64_t max_in_flight = 1;
  std::size_t reorder = 1;
  int idle_ms = 20;
  int delay_ms = 0;
  std::uint64_t crash_after = 0;
  std::set<std::uint64_t> error_at;
  bool wrong_id = false;
  bool garbage = false;
  bool refuse = false;
  std::map<std::string, double> means;
  double sd = 0.0;
};

struct Pending {
  std::uint64_t id;
  std::string model;
  std::uint64_t split_seed;
  std::uint64_t model_seed;
  std::uint64_t ordinal;
};

void emit(const json& j) {
  std::cout << j.dump() << '\n';
  std::cout.flush();
}

// Deterministic in the request seeds, so the parent can recompute it.
double echo_score(const Options& o, const Pending& p, std::size_t model_index) {
  const double u = static_cast<double>(p.model_seed >> 11) * 0x1p-53;
  const auto it = o.means.find(p.model);
  if (it != o.means.end()) return it->second + o.sd * (u - 0.5) * 3.4641016151377544;
  return static_cast<double>(model_index) + u;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  std::vector<std::string> means;
  CLI::App app{"scripted evaluator child"};
  app.add_option("--max-in-flight", o.max_in_flight);
  app.add_option("--reorder", o.reorder, "answer in shuffled batches of this size");
  app.add_option("--idle-ms", o.idle_ms, "flush a partial batch after this much silence");
  app.add_option("--delay-ms", o.delay_ms);
  app.add_option("--crash-after", o.crash_after, "exit after reading this many requests");
  app.add_option("--error-at", o.error_at, "reply with an error to these request ordinals");
  app.add_flag("--wrong-id", o.wrong_id);
  app.add_flag("--garbage", o.garbage);
  app.add_flag("--refuse", o.refuse);
  app.add_option("--mean", means, "name=mean pairs");
  app.add_option("--sd", o.sd);
  CLI11_PARSE(app, argc, argv);
  for (const auto& m : means) {
    const auto eq = m.find('=');
    o.means[m.substr(0, eq)] = std::stod(m.substr(eq + 1));
  }

  std::vector<std::string> models;
  std::vector<Pending> batch;
  std::mt19937_64 shuffle_gen(1);
  std::uint64_t received = 0;
  std::string buf;
  bool handshaken = false;

  const auto index_of = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(models.begin(), models.end(), name) - models.begin());
  };
  const auto flush = [&] {
    std::shuffle(batch.begin(), batch.end(), shuffle_gen);
    for (const auto& p : batch) {
      if (o.delay_ms) std::this_thread::sleep_for(std::chrono::milliseconds(o.delay_ms));
      const std::uint64_t id = o.wrong_id ? p.id + 1 : p.id;
      if (o.garbage) {
        std::cout << "this is not json\n" << std::flush;
      } else if (o.error_at.count(p.ordinal)) {
        emit(json{{"id", id}, {"error", "OOM"}});
      } else {
        emit(json{{"id", id}, {"score", echo_score(o, p, index_of(p.model))}});
      }
    }
    batch.clear();
  };

  for (;;) {
    const auto nl = buf.find('\n');
    if (nl == std::string::npos) {
      pollfd p{STDIN_FILENO, POLLIN, 0};
      const int r = ::poll(&p, 1, batch.empty() ? -1 : o.idle_ms);
      if (r == 0) {
        flush();
        continue;
      }
      char chunk[4096];
      const ssize_t n = ::read(STDIN_FILENO, chunk, sizeof chunk);
      if (n <= 0) {
        flush();
        return 0;
      }
      buf.append(chunk, static_cast<std::size_t>(n));
      continue;
    }
    const json j = json::parse(buf.substr(0, nl));
    buf.erase(0, nl + 1);

    if (!handshaken) {
      models = j.at("models").get<std::vector<std::string>>();
      handshaken = true;
      if (o.refuse) {
        emit(json{{"ok", false}});
        return 0;
      }
      emit(json{{"ok", true}, {"max_in_flight", o.max_in_flight}});
      continue;
    }
    if (j.contains("shutdown")) {
      flush();
      return 0;
    }
    ++received;
    if (o.crash_after && received > o.crash_after) {
      std::fprintf(stderr, "fake evaluator: simulated crash after %llu requests\n",
                   static_cast<unsigned long long>(o.crash_after));
      std::fflush(stderr);
      std::_Exit(3);
    }
    batch.push_back(Pending{j.at("id").get<std::uint64_t>(), j.at("model").get<std::string>(),
                            j.at("split_seed").get<std::uint64_t>(),
                            j.at("model_seed").get<std::uint64_t>(), received});
    if (batch.size() >= o.reorder) flush();
  }
}
