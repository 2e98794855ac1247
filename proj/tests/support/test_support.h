#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "tellerflow/config.h"
#include "tellerflow/model_backend.h"
#include "tellerflow/runtime.h"

namespace tftest {

using namespace tellerflow;

// Repository data/ and tests/data/.
std::string data_path(const std::string& name);
std::string test_data_path(const std::string& name);

// The shipped config with the audit file switched off.
AppConfig shipped_config();

std::shared_ptr<Runtime> fixture_runtime(AppConfig config = shipped_config());

// Adapter spec from the shipped adapter file.
AdapterSpec adapter(AgentName agent);

// Replies from a queue per agent; falls through to a FixtureBackend once
// the queue for that agent is empty. Records every request.
class ScriptedBackend : public ModelBackend {
 public:
  ScriptedBackend();
  void push(AgentName agent, std::string reply);
  // Next call for `agent` throws BackendUnavailable.
  void fail_next(AgentName agent, int times = 1);
  void clear_failures();
  std::string complete(const CompletionRequest& request) override;
  std::vector<CompletionRequest> requests() const;
  std::size_t calls(AgentName agent) const;

 private:
  mutable std::mutex mu_;
  std::deque<std::string> queues_[4];
  int failures_[4] = {0, 0, 0, 0};
  std::vector<CompletionRequest> log_;
  std::shared_ptr<ModelBackend> fallback_;
};

// Delegates to the fixture after sleeping; used to hold a turn in flight.
class SlowBackend : public ModelBackend {
 public:
  explicit SlowBackend(std::chrono::milliseconds delay);
  std::string complete(const CompletionRequest& request) override;

 private:
  std::chrono::milliseconds delay_;
  std::shared_ptr<ModelBackend> inner_;
};

// Manually advanced clock.
struct FakeClock {
  Timestamp now = Timestamp{} + std::chrono::hours(24 * 20000);
  std::function<Timestamp()> fn() {
    return [this] { return now; };
  }
};

}  // namespace tftest
