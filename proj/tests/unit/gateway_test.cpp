#include <gtest/gtest.h>

#include <thread>

#include "tellerflow/errors.h"
#include "tellerflow/session_gateway.h"
#include "test_support.h"

using namespace tellerflow;

namespace {

constexpr const char* kJohn = "Transfer RM1000 to John's account at Bank ABC account  number 5512345678";

AppConfig dev_config() {
  AppConfig c = tftest::shipped_config();
  c.dev_mode = true;
  c.admin_token = "t0ken";
  return c;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kConfigError;
}

class GatewayTest : public ::testing::Test {
 protected:
  tftest::FakeClock clock;
  std::shared_ptr<Runtime> rt = build_runtime(dev_config(), nullptr, clock.fn());
  Gateway gw{rt, clock.fn()};
};

}  // namespace

TEST_F(GatewayTest, OpenRequiresKnownAccount) {
  EXPECT_EQ(code_of([&] { gw.open_session("acc-nope"); }), ErrorCode::kUnknownAccount);
  auto id = gw.open_session("acc-1001");
  EXPECT_EQ(id.rfind("s-", 0), 0u);
  EXPECT_NE(gw.open_session("acc-1001"), id);
  EXPECT_EQ(gw.open_sessions(), 2u);
}

TEST_F(GatewayTest, TransferNeedsSecondFactorThenExecutes) {
  auto sid = gw.open_session("acc-1001");
  auto reply = gw.post_message(sid, kJohn);
  ASSERT_TRUE(reply.preview);
  EXPECT_EQ(reply.stage_trace.size(), 4u);
  const auto& req = reply.preview->request;
  EXPECT_TRUE(req.requires_2fa);
  EXPECT_EQ(req.draft.amount, Money::from_minor(100000));
  EXPECT_EQ(reply.preview->actions, (std::vector<std::string>{"approve", "decline", "edit"}));

  EXPECT_EQ(code_of([&] { gw.post_decision(sid, req.tx_id, DecisionKind::kApprove); }), ErrorCode::kTwoFaRequired);
  auto code = gw.dev_peek_code(sid);
  ASSERT_TRUE(code);
  auto done = gw.post_decision(sid, req.tx_id, DecisionKind::kApprove, {}, code);
  EXPECT_EQ(done.state, TxState::kExecuted);
  EXPECT_EQ(done.balance, Money::from_minor(400000));
  EXPECT_FALSE(gw.view(sid)->preview);
}

TEST_F(GatewayTest, MultiTurnUsesSessionHistory) {
  auto sid = gw.open_session("acc-1001");
  EXPECT_FALSE(gw.post_message(sid, "I want to transfer money to Jane for lunch.").preview);
  gw.post_message(sid, "Bank ABC (account no. 7712345678)");
  auto reply = gw.post_message(sid, "RM500");
  ASSERT_TRUE(reply.preview);
  const auto& d = reply.preview->request.draft;
  EXPECT_EQ(d.recipient_name, "Jane");
  EXPECT_EQ(d.account_number, "7712345678");
  EXPECT_EQ(d.amount, Money::from_minor(50000));
  EXPECT_EQ(d.reference, "Lunch");
  EXPECT_EQ(gw.view(sid)->history.size(), 6u);
}

TEST_F(GatewayTest, EditThenDecline) {
  auto sid = gw.open_session("acc-1001");
  auto tx = gw.post_message(sid, "Send RM100 to Ali at Maybank 1234567890").preview->request.tx_id;
  auto edited = gw.post_decision(sid, tx, DecisionKind::kEdit, {{"amount", "120.50"}, {"bankName", "mbb"}});
  EXPECT_EQ(edited.state, TxState::kAwaitingDecision);
  ASSERT_TRUE(edited.preview);
  EXPECT_EQ(edited.preview->request.draft.amount, Money::from_minor(12050));
  EXPECT_EQ(edited.preview->request.draft.bank_name, "Maybank");
  EXPECT_EQ(code_of([&] { gw.post_decision(sid, tx, DecisionKind::kEdit, {{"colour", "red"}}); }),
            ErrorCode::kStaleEdit);
  EXPECT_EQ(code_of([&] { gw.post_decision(sid, tx, DecisionKind::kEdit, {{"amount", "lots"}}); }),
            ErrorCode::kStaleEdit);
  EXPECT_EQ(code_of([&] { gw.post_decision(sid, tx, DecisionKind::kEdit, {{"bankName", "Bank Zeta"}}); }),
            ErrorCode::kStaleEdit);
  auto declined = gw.post_decision(sid, tx, DecisionKind::kDecline);
  EXPECT_EQ(declined.state, TxState::kDeclined);
  EXPECT_EQ(rt->bank->query_account("acc-1001").available_balance, Money::from_major(5000));
}

TEST_F(GatewayTest, DecisionsAreScopedToTheirSession) {
  auto a = gw.open_session("acc-1001");
  auto b = gw.open_session("acc-1002");
  auto tx = gw.post_message(a, "Send RM100 to Ali at Maybank 1234567890").preview->request.tx_id;
  EXPECT_EQ(code_of([&] { gw.post_decision(b, tx, DecisionKind::kApprove); }), ErrorCode::kUnknownTransaction);
  EXPECT_EQ(code_of([&] { gw.post_decision(a, "tx-424242", DecisionKind::kApprove); }),
            ErrorCode::kUnknownTransaction);
}

TEST_F(GatewayTest, BlankMessageRejected) {
  auto sid = gw.open_session("acc-1001");
  EXPECT_EQ(code_of([&] { gw.post_message(sid, "  "); }), ErrorCode::kInputRejected);
  // The session is released again afterwards.
  EXPECT_NO_THROW(gw.post_message(sid, "hello"));
}

TEST_F(GatewayTest, ClosedSessionLeavesNothingBehind) {
  auto sid = gw.open_session("acc-1001");
  gw.post_message(sid, "Send RM300 to Zubaidah at Maybank 1234567890 for tuition");
  auto before = gw.view(sid);
  ASSERT_TRUE(before && before->preview);
  std::string tx = before->preview->request.tx_id;
  ASSERT_TRUE(gw.dev_peek_code(sid));

  gw.close_session(sid);
  EXPECT_FALSE(gw.view(sid));
  EXPECT_FALSE(gw.dev_peek_code(sid));
  EXPECT_EQ(code_of([&] { gw.post_message(sid, "hello"); }), ErrorCode::kUnknownSession);
  EXPECT_EQ(code_of([&] { gw.post_decision(sid, tx, DecisionKind::kApprove); }), ErrorCode::kUnknownSession);
  EXPECT_EQ(code_of([&] { gw.close_session(sid); }), ErrorCode::kUnknownSession);
  auto after = rt->bank->transaction(tx);
  EXPECT_EQ(after.state, TxState::kDeclined);
  EXPECT_EQ(after.reason, "expired");
  for (const auto& e : rt->audit->events()) {
    std::string line = audit_event_to_json_line(e);
    for (const char* secret : {"Zubaidah", "1234567890", "tuition", "Tuition", "300.00"}) {
      EXPECT_EQ(line.find(secret), std::string::npos) << line;
    }
  }
}

TEST(GatewayConcurrency, SecondMessageWhileBusyIsRejected) {
  auto rt = build_runtime(dev_config(), std::make_shared<tftest::SlowBackend>(std::chrono::milliseconds(150)));
  Gateway gw(rt);
  auto sid = gw.open_session("acc-1001");
  std::thread first([&] { gw.post_message(sid, "hello"); });
  std::this_thread::sleep_for(std::chrono::milliseconds(60));
  EXPECT_EQ(code_of([&] { gw.post_message(sid, "again"); }), ErrorCode::kPipelineBusy);
  auto busy_view = gw.view(sid);
  ASSERT_TRUE(busy_view);
  EXPECT_TRUE(busy_view->history.empty());
  first.join();
  EXPECT_EQ(gw.view(sid)->history.size(), 2u);
}

TEST(GatewayConcurrency, CloseDuringTurnDiscardsWhenTurnEnds) {
  auto rt = build_runtime(dev_config(), std::make_shared<tftest::SlowBackend>(std::chrono::milliseconds(100)));
  Gateway gw(rt);
  auto sid = gw.open_session("acc-1001");
  std::optional<MessageReply> reply;
  std::thread turn([&] { reply = gw.post_message(sid, "Send RM100 to Ali at Maybank 1234567890"); });
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  gw.close_session(sid);
  turn.join();
  ASSERT_TRUE(reply && reply->preview);
  EXPECT_FALSE(gw.view(sid));
  EXPECT_EQ(rt->bank->transaction(reply->preview->request.tx_id).state, TxState::kDeclined);
}

TEST_F(GatewayTest, IdleSessionsExpire) {
  auto idle = gw.open_session("acc-1001");
  auto tx = gw.post_message(idle, "Send RM100 to Ali at Maybank 1234567890").preview->request.tx_id;
  clock.now += std::chrono::minutes(10);
  auto active = gw.open_session("acc-1002");
  clock.now += std::chrono::minutes(6);
  EXPECT_EQ(gw.expire_idle(), 1u);
  EXPECT_FALSE(gw.view(idle));
  EXPECT_TRUE(gw.view(active));
  EXPECT_EQ(rt->bank->transaction(tx).state, TxState::kDeclined);
}

TEST_F(GatewayTest, AdminOpsRequireToken) {
  EXPECT_EQ(code_of([&] { gw.admin_reload_blocklist("wrong"); }), ErrorCode::kAuthFailure);
  EXPECT_EQ(code_of([&] { gw.admin_ingest_knowledge("", "{}"); }), ErrorCode::kAuthFailure);
  EXPECT_EQ(code_of([&] { gw.admin_export_transactions("nope"); }), ErrorCode::kAuthFailure);

  auto v = gw.admin_reload_blocklist("t0ken", R"({"version":1,"entries":[{"phrase":"purple monkey","category":"Hate"}]})");
  auto sid = gw.open_session("acc-1001");
  auto reply = gw.post_message(sid, "purple monkey dishwasher");
  EXPECT_EQ(reply.stage_trace.size(), 1u);
  EXPECT_EQ(code_of([&] { gw.admin_reload_blocklist("t0ken", "nope"); }), ErrorCode::kParseError);
  EXPECT_EQ(rt->blocklist->current()->version, v);

  auto k1 = rt->knowledge->snapshot()->version;
  EXPECT_EQ(gw.admin_ingest_knowledge("t0ken", R"({"docId":"kb-x","title":"X","body":"Parking is free."})"), k1 + 1);
  EXPECT_EQ(code_of([&] { gw.admin_ingest_knowledge("t0ken", "{bad"); }), ErrorCode::kParseError);
  EXPECT_EQ(rt->knowledge->snapshot()->version, k1 + 1);
  EXPECT_EQ(gw.admin_export_transactions("t0ken"), "");
}

TEST(GatewayDevMode, CodeChannelClosedOutsideDevMode) {
  auto rt = tftest::fixture_runtime();
  Gateway gw(rt);
  auto sid = gw.open_session("acc-1001");
  EXPECT_TRUE(gw.post_message(sid, kJohn).preview->request.requires_2fa);
  EXPECT_FALSE(gw.dev_peek_code(sid));
}
