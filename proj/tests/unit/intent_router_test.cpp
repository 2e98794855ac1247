#include <gtest/gtest.h>

#include "tellerflow/errors.h"
#include "tellerflow/fixture_backend.h"
#include "tellerflow/intent_router.h"
#include "test_support.h"

using namespace tellerflow;
using tftest::ScriptedBackend;

namespace {

IntentResult classify(const std::string& text, std::vector<ChatTurn> history = {}) {
  IntentClassifier c(std::make_shared<FixtureBackend>(), tftest::adapter(AgentName::kIntent));
  return c.classify_intent(ChatTurn::user(text), history);
}

struct CountingHandler : ActionHandler {
  int calls = 0;
  ActionOutput handle(PipelineEnvelope&) override {
    ++calls;
    return ActionOutput{};
  }
};

}  // namespace

TEST(Intent, PublishedListingsClassifyExactly) {
  EXPECT_EQ(classify("tsfr 200 to bank acc").intent, IntentCategory::kPayment);
  EXPECT_EQ(classify("What's the interest rate for savings acc?").intent, IntentCategory::kFaq);
  EXPECT_FALSE(classify("tsfr 200 to bank acc").clarification_needed);
}

TEST(Intent, InformalAndMixedLanguageRequests) {
  struct Row {
    const char* text;
    IntentCategory intent;
  } rows[] = {
      {"pay people I owe", IntentCategory::kPayment},
      {"nak bayar RM50 kat Ali", IntentCategory::kPayment},
      {"semak baki saya", IntentCategory::kAccountInquiry},
      {"show me my recent transactions", IntentCategory::kHistoryInquiry},
      {"how much did I spend last month?", IntentCategory::kInsight},
      {"How do I transfer money overseas?", IntentCategory::kFaq},
      {"hello", IntentCategory::kChat},
  };
  for (const auto& r : rows) EXPECT_EQ(classify(r.text).intent, r.intent) << r.text;
}

TEST(Intent, FollowUpUsesConversationContext) {
  std::vector<ChatTurn> history{ChatTurn::user("I want to transfer money to Jane for lunch."),
                                ChatTurn::assistant("Could you provide the bank account details of Jane?")};
  EXPECT_EQ(classify("Bank ABC (account no. 7712345678)", history).intent, IntentCategory::kPayment);
  EXPECT_TRUE(classify("Bank ABC (account no. 7712345678)").clarification_needed);
}

TEST(Intent, UnusableReplyBecomesClarification) {
  auto backend = std::make_shared<ScriptedBackend>();
  for (int i = 0; i < 3; ++i) backend->push(AgentName::kIntent, R"({"intent":"SHOPPING"})");
  IntentClassifier c(backend, tftest::adapter(AgentName::kIntent));
  auto r = c.classify_intent(ChatTurn::user("whatever"), {});
  EXPECT_TRUE(r.clarification_needed);
  EXPECT_EQ(r.message, kRephraseMessage);
  backend->fail_next(AgentName::kIntent);
  EXPECT_TRUE(c.classify_intent(ChatTurn::user("whatever"), {}).clarification_needed);
}

TEST(Router, DispatchesToTheRegisteredHandler) {
  ActionRouter router;
  auto pay = std::make_shared<CountingHandler>();
  router.register_handler(IntentCategory::kPayment, pay);
  PipelineEnvelope env;
  router.dispatch(IntentCategory::kPayment).handle(env);
  EXPECT_EQ(pay->calls, 1);
  try {
    router.dispatch(IntentCategory::kFaq);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnroutableIntent);
  }
}

TEST(Router, TotalityCheckNamesTheGap) {
  ActionRouter router;
  for (int i = 0; i < kIntentCategoryCount; ++i) {
    auto intent = static_cast<IntentCategory>(i);
    if (intent != IntentCategory::kInsight) router.register_handler(intent, std::make_shared<CountingHandler>());
  }
  try {
    router.assert_total();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError);
    EXPECT_NE(std::string(e.what()).find("INSIGHT"), std::string::npos);
  }
  router.register_handler(IntentCategory::kInsight, std::make_shared<CountingHandler>());
  EXPECT_NO_THROW(router.assert_total());
}

TEST(Router, ShippedRuntimeIsTotal) {
  auto rt = tftest::fixture_runtime();
  EXPECT_NO_THROW(rt->registry.actions->assert_total());
}

TEST(Intent, ImageOnlyTurnIsAPaymentWithoutModelCall) {
  auto backend = std::make_shared<ScriptedBackend>();
  IntentClassifier c(backend, tftest::adapter(AgentName::kIntent));
  PipelineEnvelope env;
  env.turn = ChatTurn::user("", {{"bill-01", "png"}});
  auto out = c.classify(env);
  EXPECT_EQ(std::get<IntentResult>(out.output).intent, IntentCategory::kPayment);
  EXPECT_FALSE(out.call);
  EXPECT_EQ(backend->requests().size(), 0u);
}
