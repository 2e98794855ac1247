#pragma once

#include <array>
#include <atomic>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tellerflow/model_backend.h"

namespace tellerflow {

// Deterministic stand-in for the hosted model. A call is answered from the
// exact-match fixture table first (keyed by a digest of agent, task and the
// normalized latest user message), then by the ordered rule set for the
// agent. Everything the rules know comes from the request itself: the bank
// list and knowledge context are read back out of the rendered prompt.
class FixtureBackend : public ModelBackend {
 public:
  FixtureBackend() = default;

  // JSON object: {"entries": [{"agent", "task", "input", "output"}]}.
  void load_table_file(const std::string& path);
  void add_table_entry(AgentName agent, std::string_view task, std::string_view input,
                       std::string output_json);

  static std::string table_key(AgentName agent, std::string_view task, std::string_view input);

  std::string complete(const CompletionRequest& request) override;

  std::size_t calls(AgentName agent) const {
    return call_counts_[static_cast<std::size_t>(agent)].load();
  }
  std::size_t total_calls() const;

 private:
  std::map<std::string, std::string> table_;
  std::array<std::atomic<std::size_t>, 4> call_counts_{};
};

// Prompt fragments the fixture rules parse back out. Agents render their
// bindings with these helpers so a real model sees the same text.
std::string render_bank_list_line(std::string_view bank_name,
                                  const std::vector<std::string>& aliases);
std::string render_knowledge_block(std::string_view doc_id, std::string_view title,
                                   std::string_view body);

namespace fixture_rules {

// Exposed for unit tests. Each returns the JSON text the fixture emits.
std::string classify_guardrails(const CompletionRequest& request);
std::string classify_intent(const CompletionRequest& request);
std::string extract_payment(const CompletionRequest& request);
std::string reformulate_faq(const CompletionRequest& request);
std::string answer_faq(const CompletionRequest& request);

}  // namespace fixture_rules

}  // namespace tellerflow
