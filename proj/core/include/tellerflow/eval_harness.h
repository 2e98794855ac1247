#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tellerflow/canonical.h"
#include "tellerflow/config.h"
#include "tellerflow/types.h"

namespace tellerflow::eval {

inline constexpr std::size_t kMaxPastExchanges = 10;

struct PastExchange {
  std::string user;
  std::string assistant;
};

struct Prompt {
  std::string message;
  Language language = Language::kAuto;
  std::vector<PastExchange> past_message_histories;
};

struct TransfersTruth {
  std::vector<TransferDraft> transfers;
};
struct IntentTruth {
  IntentCategory intent = IntentCategory::kChat;
};
struct GuardrailTruth {
  bool is_safe = true;
  std::optional<ViolationCategory> violation;
};
// Expected grounding documents, or an expected fallback.
struct FaqTruth {
  std::vector<std::string> doc_ids;
  bool expect_fallback = false;
};
using GroundTruth = std::variant<TransfersTruth, IntentTruth, GuardrailTruth, FaqTruth>;

std::string_view ground_truth_kind(const GroundTruth& truth);

struct TestCase {
  std::string id;
  std::size_t line = 0;
  Prompt prompt;
  GroundTruth ground_truth;
};

struct SuiteIssue {
  std::size_t line = 0;
  std::string reason;
};

struct Suite {
  std::vector<TestCase> cases;
  std::vector<SuiteIssue> issues;
};

// Accepts JSON Lines, a JSON array of cases, or concatenated objects. The
// published case layout writes "transfers" as a bracketed list of bare
// key/value pairs; that form is accepted and read as one transfer object.
// Throws Error(kFileUnreadable) when the file cannot be read.
Suite load_suite(const std::string& path);
Suite parse_suite(std::string_view text);

// Rewrites `"transfers": [ "k": v, ... ]` into `"transfers": [{ "k": v, ... }]`.
std::string repair_transfer_lists(std::string_view text);

struct CaseResult {
  std::string id;
  std::string kind;
  bool correct = false;
  std::string detail;
  double latency_ms = 0.0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  double cost = 0.0;

  bool operator==(const CaseResult&) const = default;
};

// A rubric score supplied by human raters, already in [0, 1].
using RubricScore = std::optional<double>;

struct MetricScores {
  double accuracy = 0.0;
  double speed = 0.0;
  double cost_effectiveness = 0.0;
  RubricScore risk_tolerance;
  RubricScore language_proficiency;

  bool operator==(const MetricScores&) const = default;
};

struct RawMetrics {
  std::size_t total = 0;
  std::size_t correct = 0;
  double mean_latency_ms = 0.0;
  double mean_cost = 0.0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::size_t transactional_total = 0;
  std::size_t transactional_errors = 0;
  std::size_t faq_total = 0;
  std::size_t faq_errors = 0;

  bool operator==(const RawMetrics&) const = default;
};

struct GateResult {
  double transactional_error_rate = 0.0;
  double faq_error_rate = 0.0;
  double max_transactional_error_rate = 0.005;
  double max_faq_error_rate = 0.02;
  bool passed = true;

  bool operator==(const GateResult&) const = default;
};

struct EvalReport {
  RawMetrics raw;
  MetricScores normalized;
  GateResult gate;
  std::vector<CaseResult> cases;

  bool operator==(const EvalReport&) const = default;
};

struct Rubric {
  RubricScore risk_tolerance;
  RubricScore language_proficiency;
};

// {"riskTolerance": 0.8, "languageProficiency": {"score": 4, "max": 5}}.
Rubric load_rubric(const std::string& path);
Rubric parse_rubric(std::string_view json_text);

// Independent per-field comparison used to judge transfer cases: same
// count, and each draft equal on all five fields (amounts in sen).
bool transfers_match(const std::vector<TransferDraft>& expected,
                     const std::vector<TransferDraft>& actual, std::string* detail = nullptr);

// Every case runs in a fresh runtime built from `config`, so cases are
// independent and the report is deterministic apart from latency.
EvalReport run_suite(const std::vector<TestCase>& cases, const AppConfig& config,
                     const Rubric& rubric = {});

enum class ReportFormat { kJson, kTable, kRadarData };
std::optional<ReportFormat> parse_report_format(std::string_view name);

std::string emit_report(const EvalReport& report, ReportFormat format);

Json report_to_json(const EvalReport& report);
EvalReport report_from_json(const Json& value);

// min(1, target / observed); 1 when observed is 0.
double normalize_speed(double mean_latency_ms, double target_latency_ms);
// min(1, budget / cost); 1 when cost is 0.
double normalize_cost(double mean_cost, double budget);

}  // namespace tellerflow::eval
