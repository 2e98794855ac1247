#include "test_support.h"

#include <filesystem>
#include <thread>

#include "tellerflow/errors.h"
#include "tellerflow/fixture_backend.h"

namespace tftest {

std::string data_path(const std::string& name) {
  return (std::filesystem::path(default_data_dir()) / name).string();
}

std::string test_data_path(const std::string& name) {
  return (std::filesystem::path(TELLERFLOW_TEST_DATA_DIR) / name).string();
}

AppConfig shipped_config() {
  AppConfig c = load_config(data_path("config.json"));
  c.audit_path.clear();
  return c;
}

std::shared_ptr<Runtime> fixture_runtime(AppConfig config) { return build_runtime(config); }

AdapterSpec adapter(AgentName agent) {
  static const AdapterRegistry registry = AdapterRegistry::load_file(data_path("adapters.json"));
  return registry.get(agent);
}

ScriptedBackend::ScriptedBackend() : fallback_(std::make_shared<FixtureBackend>()) {}

void ScriptedBackend::push(AgentName agent, std::string reply) {
  std::lock_guard lock(mu_);
  queues_[static_cast<int>(agent)].push_back(std::move(reply));
}

void ScriptedBackend::fail_next(AgentName agent, int times) {
  std::lock_guard lock(mu_);
  failures_[static_cast<int>(agent)] += times;
}

void ScriptedBackend::clear_failures() {
  std::lock_guard lock(mu_);
  for (int& f : failures_) f = 0;
}

std::string ScriptedBackend::complete(const CompletionRequest& request) {
  {
    std::lock_guard lock(mu_);
    log_.push_back(request);
    int a = static_cast<int>(request.agent);
    if (failures_[a] > 0) {
      --failures_[a];
      throw Error(ErrorCode::kBackendUnavailable, "scripted outage");
    }
    if (!queues_[a].empty()) {
      std::string reply = std::move(queues_[a].front());
      queues_[a].pop_front();
      return reply;
    }
  }
  return fallback_->complete(request);
}

std::vector<CompletionRequest> ScriptedBackend::requests() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::size_t ScriptedBackend::calls(AgentName agent) const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& r : log_) n += r.agent == agent;
  return n;
}

SlowBackend::SlowBackend(std::chrono::milliseconds delay)
    : delay_(delay), inner_(std::make_shared<FixtureBackend>()) {}

std::string SlowBackend::complete(const CompletionRequest& request) {
  std::this_thread::sleep_for(delay_);
  return inner_->complete(request);
}

}  // namespace tftest
