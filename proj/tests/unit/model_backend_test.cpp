#include <gtest/gtest.h>

#include <random>
#include <regex>

#include "tellerflow/errors.h"
#include "tellerflow/fixture_backend.h"
#include "tellerflow/model_backend.h"
#include "test_support.h"

using namespace tellerflow;
using tftest::ScriptedBackend;

namespace {

// Independent token counter: regex alternation instead of the state machine.
std::int64_t oracle_tokens(const std::string& s) {
  static const std::regex kToken(R"([A-Za-z\x80-\xff]+|[0-9]+|[^\sA-Za-z0-9\x80-\xff])");
  return std::distance(std::sregex_iterator(s.begin(), s.end(), kToken), std::sregex_iterator());
}

AdapterSpec spec_with(const std::string& tmpl) {
  return AdapterSpec{AgentName::kGuardrails, "a-1", tmpl, std::string(kSchemaGuardrailVerdict)};
}

}  // namespace

TEST(Prompt, PlaceholdersIgnoreJsonBraces) {
  std::string tmpl = R"(Banks: {bank_list} lang={language} reply {"isSafe": true} {Not_A_Name} {x1})";
  EXPECT_EQ(template_placeholders(tmpl), (std::vector<std::string>{"bank_list", "language", "x1"}));
}

TEST(Prompt, RenderSubstitutesEveryBinding) {
  AdapterSpec spec = spec_with("A {a} B {b} C {\"k\": 1}");
  EXPECT_EQ(render_prompt(spec, {{"a", "1"}, {"b", "{b}"}}), "A 1 B {b} C {\"k\": 1}");
}

TEST(Prompt, MissingBindingNamesThePlaceholder) {
  try {
    render_prompt(spec_with("x {language} {bank_list}"), {{"language", "EN"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingBinding);
    EXPECT_NE(std::string(e.what()).find("bank_list"), std::string::npos);
  }
}

TEST(Prompt, ShippedAdaptersBindExactlyTheirSlots) {
  auto slots = [](AgentName a) {
    auto v = template_placeholders(tftest::adapter(a).prompt_template);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  EXPECT_EQ(slots(AgentName::kGuardrails), (std::vector<std::string>{"language"}));
  EXPECT_EQ(slots(AgentName::kIntent), (std::vector<std::string>{"language"}));
  EXPECT_EQ(slots(AgentName::kPayment), (std::vector<std::string>{"bank_list", "language"}));
  EXPECT_EQ(slots(AgentName::kFaq), (std::vector<std::string>{"knowledge_context", "language"}));
}

TEST(Adapters, RegistryRejectsDuplicatesAndUnknownSchemas) {
  const char* dup = R"([
    {"agentName":"guardrails","adapterId":"a","promptTemplate":"x","outputSchemaId":"guardrail_verdict"},
    {"agentName":"guardrails","adapterId":"b","promptTemplate":"y","outputSchemaId":"guardrail_verdict"}])";
  EXPECT_THROW(AdapterRegistry::parse(dup), Error);
  AdapterRegistry r;
  EXPECT_THROW(r.set(AdapterSpec{AgentName::kFaq, "f", "t", "nope"}), Error);
}

TEST(Tokens, MatchesRegexOracleOnRandomText) {
  std::mt19937 rng(3);
  const std::string alphabet = "abcXYZ0189 .,!?{}\"'\n\t-_\xc3\xa9";
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    int n = static_cast<int>(rng() % 60);
    for (int k = 0; k < n; ++k) s.push_back(alphabet[rng() % alphabet.size()]);
    ASSERT_EQ(count_tokens(s), oracle_tokens(s)) << s;
  }
  EXPECT_EQ(count_tokens("Transfer RM1000 to John's account"), 8);
}

TEST(ExtractJson, FindsFirstBalancedObject) {
  EXPECT_EQ(extract_json_object("```json\n{\"a\": \"}\"}\n```"), "{\"a\": \"}\"}");
  EXPECT_EQ(extract_json_object("noise {broken then {\"ok\":1}"), "{\"ok\":1}");
  EXPECT_FALSE(extract_json_object("no object here"));
}

TEST(Structured, RetriesWithRepairSuffixThenSucceeds) {
  ScriptedBackend backend;
  backend.push(AgentName::kGuardrails, "I think it is safe");
  backend.push(AgentName::kGuardrails, R"({"isSafe": "maybe"})");
  backend.push(AgentName::kGuardrails, R"({"isSafe": true, "guardrailViolation": null, "message": null})");
  auto result = complete_structured(backend, tftest::adapter(AgentName::kGuardrails), "P",
                                    {ChatTurn::user("hello")});
  EXPECT_EQ(result.record.attempt, 3);
  EXPECT_TRUE(std::get<GuardrailVerdict>(result.output).is_safe);
  auto reqs = backend.requests();
  ASSERT_EQ(reqs.size(), 3u);
  EXPECT_EQ(reqs[0].system_prompt, "P");
  EXPECT_NE(reqs[1].system_prompt.find(kRepairSuffix), std::string::npos);
  EXPECT_EQ(reqs[2].attempt, 3);
}

TEST(Structured, GivesUpAfterRetryLimit) {
  ScriptedBackend backend;
  for (int i = 0; i < 3; ++i) backend.push(AgentName::kGuardrails, "nope");
  try {
    complete_structured(backend, tftest::adapter(AgentName::kGuardrails), "P", {ChatTurn::user("x")});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaViolation);
  }
  EXPECT_EQ(backend.calls(AgentName::kGuardrails), 3u);
}

TEST(Structured, TransportFailurePropagates) {
  ScriptedBackend backend;
  backend.fail_next(AgentName::kIntent);
  try {
    complete_structured(backend, tftest::adapter(AgentName::kIntent), "P", {ChatTurn::user("x")});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBackendUnavailable);
  }
}

TEST(Structured, TokenAccountingUsesPromptConversationAndReply) {
  ScriptedBackend backend;
  std::string reply = R"({"message": "two words"})";
  backend.push(AgentName::kFaq, reply);
  AdapterSpec spec{AgentName::kFaq, "faq-1", "unused", std::string(kSchemaFaqAnswer)};
  auto r = complete_structured(backend, spec, "sys prompt", {ChatTurn::user("hi there")});
  EXPECT_EQ(r.record.prompt_tokens, oracle_tokens("sys prompt") + oracle_tokens("hi there"));
  EXPECT_EQ(r.record.completion_tokens, oracle_tokens(reply));
  EXPECT_EQ(r.record.adapter_id, "faq-1");
}

TEST(FixtureBackend, TableEntriesWinOverRules) {
  FixtureBackend backend;
  backend.add_table_entry(AgentName::kIntent, "classify", "  Hello   THERE ",
                          R"({"intent":"FAQ","clarificationNeeded":false,"message":null})");
  CompletionRequest req;
  req.agent = AgentName::kIntent;
  req.task = "classify";
  req.conversation = {ChatTurn::user("hello there")};
  EXPECT_NE(backend.complete(req).find("FAQ"), std::string::npos);
  req.conversation = {ChatTurn::user("hello friend")};
  EXPECT_NE(backend.complete(req).find("CHAT"), std::string::npos);
  EXPECT_EQ(backend.calls(AgentName::kIntent), 2u);
}
