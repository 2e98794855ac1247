#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include <unistd.h>

#include "tellerflow/audit.h"
#include "tellerflow/canonical.h"
#include "tellerflow/errors.h"

using namespace tellerflow;

TEST(Audit, SequenceIsGapFreeUnderConcurrency) {
  AuditLog log;
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&log, t] {
      for (int i = 0; i < 250; ++i) log.append("s-" + std::to_string(t), "Gateway", "turn", "", "x");
    });
  }
  for (auto& th : threads) th.join();
  auto events = log.events();
  ASSERT_EQ(events.size(), 2000u);
  for (std::size_t i = 0; i < events.size(); ++i) EXPECT_EQ(events[i].sequence, i + 1);
  EXPECT_EQ(log.last_sequence(), 2000u);
}

TEST(Audit, FileMirrorsEventsAsJsonLines) {
  auto path = std::filesystem::temp_directory_path() / ("tellerflow_audit_" + std::to_string(::getpid()) + ".jsonl");
  std::filesystem::remove(path);
  {
    AuditLog log(path.string());
    log.append("s-1", "Guardrails", "verdict", std::string(64, 'a'), "Violent Crimes");
    log.append("s-1", "Intent", "verdict", std::string(64, 'b'), "PAYMENT", false);
  }
  std::ifstream in(path);
  std::string line, first;
  std::vector<Json> rows;
  while (std::getline(in, line)) {
    if (rows.empty()) first = line;
    rows.push_back(Json::parse(line));
  }
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0]["sequence"], 1);
  EXPECT_EQ(rows[0]["label"], "Violent Crimes");
  EXPECT_EQ(rows[1]["redactionApplied"], false);
  EXPECT_TRUE(rows[1]["timestamp"].get<std::string>().ends_with("Z"));
  // Keys come out sorted.
  EXPECT_EQ(first.find("{\"eventKind\""), 0u);
  std::filesystem::remove(path);
}

TEST(Audit, UnwritablePathIsReported) {
  try {
    AuditLog log("/nonexistent-dir/audit.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFileUnreadable);
  }
}
