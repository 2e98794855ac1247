#include "tellerflow/eval_harness.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "tellerflow/errors.h"
#include "tellerflow/runtime.h"
#include "tellerflow/text.h"

namespace tellerflow::eval {

std::string_view ground_truth_kind(const GroundTruth& truth) {
  switch (truth.index()) {
    case 0: return "transfers";
    case 1: return "intent";
    case 2: return "guardrail";
    default: return "faq";
  }
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileUnreadable, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Index just past the string literal starting at text[i] == '"'.
std::size_t skip_string(std::string_view text, std::size_t i) {
  for (++i; i < text.size(); ++i) {
    if (text[i] == '\\') {
      ++i;
    } else if (text[i] == '"') {
      return i + 1;
    }
  }
  return text.size();
}

struct Chunk {
  std::size_t line;
  std::string text;
};

// Top-level objects in the text, wherever they sit (lines, array, or run-on).
std::vector<Chunk> split_objects(std::string_view text, std::vector<SuiteIssue>& issues) {
  std::vector<Chunk> chunks;
  std::size_t line = 1;
  int depth = 0;
  std::size_t start = 0, start_line = 0;
  bool in_array = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      continue;
    }
    if (c == '"') {
      std::size_t end = skip_string(text, i);
      for (std::size_t k = i; k < end; ++k) line += text[k] == '\n';
      i = end - 1;
      if (depth == 0) issues.push_back({line, "stray text outside a case object"});
      continue;
    }
    if (c == '{' || c == '[') {
      if (depth == 0 && c == '[' && !in_array && chunks.empty()) {
        in_array = true;
        continue;
      }
      if (depth == 0) {
        start = i;
        start_line = line;
      }
      ++depth;
    } else if (c == '}' || c == ']') {
      if (depth == 0) {
        if (c == ']' && in_array) {
          in_array = false;
          continue;
        }
        issues.push_back({line, "unbalanced closing bracket"});
        continue;
      }
      if (--depth == 0) chunks.push_back({start_line, std::string(text.substr(start, i - start + 1))});
    } else if (depth == 0 && !std::isspace(static_cast<unsigned char>(c)) && c != ',') {
      issues.push_back({line, "stray text outside a case object"});
    }
  }
  if (depth != 0) issues.push_back({start_line, "case object is not closed"});
  return chunks;
}

std::optional<std::string> optional_string(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

TransferDraft truth_draft(const Json& j) {
  if (!j.is_object()) throw std::runtime_error("each transfer must be an object");
  TransferDraft d;
  d.recipient_name = optional_string(j, "recipientName");
  d.bank_name = optional_string(j, "bankName");
  d.account_number = optional_string(j, "accountNumber");
  auto amount = j.find("amount");
  if (amount != j.end() && !amount->is_null()) {
    if (amount->is_number()) {
      d.amount = Money::from_decimal(amount->get<double>());
    } else if (auto m = Money::parse(amount->get<std::string>())) {
      d.amount = m;
    } else {
      throw std::runtime_error("amount is not a valid currency value");
    }
  }
  if (auto ref = optional_string(j, "reference")) d.reference = *ref;
  return d;
}

TestCase parse_case(const Json& j, std::size_t line, std::size_t index) {
  if (!j.is_object()) throw std::runtime_error("case must be a JSON object");
  TestCase c;
  c.line = line;
  c.id = j.contains("id") ? j["id"].get<std::string>() : "case-" + std::to_string(index + 1);

  const Json& prompt = j.at("prompt");
  c.prompt.message = prompt.at("message").get<std::string>();
  if (auto lang = optional_string(prompt, "language")) {
    auto l = parse_language(*lang);
    if (!l) throw std::runtime_error("unknown language " + *lang);
    c.prompt.language = *l;
  }
  for (const auto& ex : prompt.value("pastMessageHistories", Json::array())) {
    c.prompt.past_message_histories.push_back(
        {ex.at("user").get<std::string>(), ex.at("assistant").get<std::string>()});
  }
  if (c.prompt.past_message_histories.size() > kMaxPastExchanges) {
    throw std::runtime_error("pastMessageHistories has " +
                             std::to_string(c.prompt.past_message_histories.size()) +
                             " entries; at most 10 are allowed");
  }

  const Json& truth = j.at("ground_truth");
  int kinds = 0;
  if (truth.contains("transfers")) {
    ++kinds;
    TransfersTruth t;
    for (const auto& d : truth["transfers"]) t.transfers.push_back(truth_draft(d));
    c.ground_truth = t;
  }
  if (truth.contains("intent")) {
    ++kinds;
    auto intent = parse_intent(truth["intent"].get<std::string>());
    if (!intent) throw std::runtime_error("unknown intent in ground truth");
    c.ground_truth = IntentTruth{*intent};
  }
  if (truth.contains("isSafe")) {
    ++kinds;
    GuardrailTruth g;
    g.is_safe = truth["isSafe"].get<bool>();
    if (auto label = optional_string(truth, "guardrailViolation")) {
      g.violation = parse_violation(*label);
      if (!g.violation) throw std::runtime_error("unknown guardrailViolation " + *label);
    }
    if (g.is_safe == g.violation.has_value()) {
      throw std::runtime_error("isSafe and guardrailViolation disagree");
    }
    c.ground_truth = g;
  }
  if (truth.contains("docIds") || truth.contains("fallback")) {
    ++kinds;
    FaqTruth f;
    f.doc_ids = truth.value("docIds", std::vector<std::string>{});
    f.expect_fallback = truth.value("fallback", false);
    if (f.doc_ids.empty() != f.expect_fallback) {
      throw std::runtime_error("FAQ ground truth needs either docIds or fallback: true");
    }
    c.ground_truth = f;
  }
  if (kinds != 1) {
    throw std::runtime_error("ground_truth must have exactly one kind, found " + std::to_string(kinds));
  }
  return c;
}

}  // namespace

std::string repair_transfer_lists(std::string_view text) {
  std::string out;
  out.reserve(text.size() + 16);
  const std::string_view key = "\"transfers\"";
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '"' && text.substr(i, key.size()) != key) {
      std::size_t end = skip_string(text, i);
      out.append(text.substr(i, end - i));
      i = end;
      continue;
    }
    if (text.substr(i, key.size()) != key) {
      out.push_back(text[i++]);
      continue;
    }
    out.append(key);
    i += key.size();
    std::size_t j = i;
    while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j >= text.size() || text[j] != ':') continue;
    ++j;
    while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j >= text.size() || text[j] != '[') continue;
    std::size_t k = j + 1;
    while (k < text.size() && std::isspace(static_cast<unsigned char>(text[k]))) ++k;
    if (k >= text.size() || text[k] != '"') continue;
    // Bare pairs: find the closing bracket of this list.
    std::size_t m = k;
    int depth = 0;
    for (; m < text.size(); ++m) {
      if (text[m] == '"') {
        m = skip_string(text, m) - 1;
      } else if (text[m] == '[' || text[m] == '{') {
        ++depth;
      } else if (text[m] == ']' || text[m] == '}') {
        if (depth == 0) break;
        --depth;
      }
    }
    if (m >= text.size() || text[m] != ']') continue;
    out.append(text.substr(i, j + 1 - i));
    out.push_back('{');
    std::string_view inner = text.substr(j + 1, m - j - 1);
    std::size_t tail = inner.find_last_not_of(" \t\r\n");
    out.append(inner.substr(0, tail + 1));
    out.push_back('}');
    out.append(inner.substr(tail + 1));
    out.push_back(']');
    i = m + 1;
  }
  return out;
}

Suite parse_suite(std::string_view input) {
  Suite suite;
  auto chunks = split_objects(input, suite.issues);
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const Chunk& chunk = chunks[i];
    Json j = Json::parse(repair_transfer_lists(chunk.text), nullptr, false);
    if (j.is_discarded()) {
      suite.issues.push_back({chunk.line, "case is not valid JSON"});
      continue;
    }
    try {
      suite.cases.push_back(parse_case(j, chunk.line, i));
    } catch (const std::exception& e) {
      suite.issues.push_back({chunk.line, e.what()});
    }
  }
  return suite;
}

Suite load_suite(const std::string& path) { return parse_suite(read_file(path)); }

namespace {

std::string money_text(const std::optional<Money>& m) { return m ? m->to_decimal_string() : "null"; }

}  // namespace

bool transfers_match(const std::vector<TransferDraft>& expected,
                     const std::vector<TransferDraft>& actual, std::string* detail) {
  auto report = [&](std::string why) {
    if (detail) *detail = std::move(why);
    return false;
  };
  if (expected.size() != actual.size()) {
    return report("expected " + std::to_string(expected.size()) + " transfers, got " +
                  std::to_string(actual.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& e = expected[i];
    const auto& a = actual[i];
    std::string at = "transfer " + std::to_string(i + 1) + ": ";
    if (e.recipient_name != a.recipient_name) return report(at + "recipientName differs");
    if (e.bank_name != a.bank_name) return report(at + "bankName differs");
    if (e.account_number != a.account_number) return report(at + "accountNumber differs");
    if (e.amount != a.amount) {
      return report(at + "amount " + money_text(a.amount) + " != " + money_text(e.amount));
    }
    if (e.reference != a.reference) return report(at + "reference differs");
  }
  if (detail) detail->clear();
  return true;
}

double normalize_speed(double mean_latency_ms, double target_latency_ms) {
  if (mean_latency_ms <= 0.0) return 1.0;
  return std::min(1.0, target_latency_ms / mean_latency_ms);
}

double normalize_cost(double mean_cost, double budget) {
  if (mean_cost <= 0.0) return 1.0;
  return std::min(1.0, budget / mean_cost);
}

namespace {

double call_cost(const ModelCallRecord& call, const AppConfig& config) {
  auto it = config.prices.find(call.adapter_id);
  if (it == config.prices.end()) it = config.prices.find("*");
  if (it == config.prices.end()) return 0.0;
  return static_cast<double>(call.prompt_tokens) / 1000.0 * it->second.prompt_per_1k +
         static_cast<double>(call.completion_tokens) / 1000.0 * it->second.completion_per_1k;
}

CaseResult run_case(const TestCase& tc, const AppConfig& config) {
  CaseResult r;
  r.id = tc.id;
  r.kind = std::string(ground_truth_kind(tc.ground_truth));

  auto runtime = build_runtime(config);
  PipelineEnvelope env;
  env.session_id = "eval-" + tc.id;
  auto accounts = runtime->bank->account_ids();
  env.account_id = accounts.empty() ? std::string() : accounts.front();
  env.language = tc.prompt.language;
  for (const auto& ex : tc.prompt.past_message_histories) {
    env.history.push_back(ChatTurn::user(ex.user));
    env.history.push_back(ChatTurn::assistant(ex.assistant));
  }
  env.turn = ChatTurn::user(tc.prompt.message);

  auto started = std::chrono::steady_clock::now();
  try {
    env = run_pipeline(std::move(env), runtime->registry);
  } catch (const Error& e) {
    r.detail = std::string("pipeline error: ") + e.what();
    return r;
  }
  r.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  for (const auto& call : env.model_calls) {
    r.prompt_tokens += call.prompt_tokens;
    r.completion_tokens += call.completion_tokens;
    r.cost += call_cost(call, config);
  }

  std::visit(
      [&](const auto& truth) {
        using T = std::decay_t<decltype(truth)>;
        if constexpr (std::is_same_v<T, GuardrailTruth>) {
          bool is_safe = env.guardrail && env.guardrail->is_safe;
          auto violation = env.guardrail ? env.guardrail->violation : std::nullopt;
          r.correct = env.guardrail && is_safe == truth.is_safe && violation == truth.violation;
          if (!r.correct) {
            r.detail = env.guardrail ? (is_safe ? std::string("judged safe")
                                                : "judged " + std::string(violation_label(*violation)))
                                     : std::string("no guardrail verdict");
          }
          return;
        }
        if (!env.intent) {
          r.detail = env.guardrail && !env.guardrail->is_safe ? "blocked by guardrails"
                                                              : "no intent produced";
          return;
        }
        if constexpr (std::is_same_v<T, IntentTruth>) {
          r.correct = !env.intent->clarification_needed && env.intent->intent == truth.intent;
          if (!r.correct) {
            r.detail = env.intent->clarification_needed
                           ? std::string("asked for clarification")
                           : "classified as " + std::string(intent_name(env.intent->intent));
          }
        } else if constexpr (std::is_same_v<T, TransfersTruth>) {
          const auto* result = env.action_output ? std::get_if<PaymentAgentResult>(&*env.action_output)
                                                 : nullptr;
          if (env.intent->intent != IntentCategory::kPayment || !result) {
            r.detail = "not routed to payment";
            return;
          }
          r.correct = transfers_match(truth.transfers, result->transfers, &r.detail);
        } else if constexpr (std::is_same_v<T, FaqTruth>) {
          if (env.intent->intent != IntentCategory::kFaq) {
            r.detail = "not routed to FAQ";
            return;
          }
          if (truth.expect_fallback) {
            r.correct = env.grounding_doc_ids.empty();
            if (!r.correct) r.detail = "answered from " + env.grounding_doc_ids.front();
          } else if (env.grounding_doc_ids.empty()) {
            r.detail = "fell back without an answer";
          } else {
            const std::string& top = env.grounding_doc_ids.front();
            r.correct = std::find(truth.doc_ids.begin(), truth.doc_ids.end(), top) != truth.doc_ids.end();
            if (!r.correct) r.detail = "grounded on " + top;
          }
        }
      },
      tc.ground_truth);
  return r;
}

}  // namespace

EvalReport run_suite(const std::vector<TestCase>& cases, const AppConfig& config,
                     const Rubric& rubric) {
  EvalReport report;
  report.cases.resize(cases.size());

  std::size_t workers = std::max<std::size_t>(1, std::min(config.eval_workers, cases.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < cases.size();) report.cases[i] = run_case(cases[i], config);
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  RawMetrics& raw = report.raw;
  raw.total = cases.size();
  double latency = 0.0, cost = 0.0;
  for (const auto& r : report.cases) {
    raw.correct += r.correct;
    latency += r.latency_ms;
    cost += r.cost;
    raw.prompt_tokens += r.prompt_tokens;
    raw.completion_tokens += r.completion_tokens;
    if (r.kind == "transfers") {
      ++raw.transactional_total;
      raw.transactional_errors += !r.correct;
    } else if (r.kind == "faq") {
      ++raw.faq_total;
      raw.faq_errors += !r.correct;
    }
  }
  if (raw.total) {
    raw.mean_latency_ms = latency / static_cast<double>(raw.total);
    raw.mean_cost = cost / static_cast<double>(raw.total);
  }

  MetricScores& n = report.normalized;
  n.accuracy = raw.total ? static_cast<double>(raw.correct) / static_cast<double>(raw.total) : 0.0;
  n.speed = normalize_speed(raw.mean_latency_ms, config.target_latency_ms);
  n.cost_effectiveness = normalize_cost(raw.mean_cost, config.cost_budget_per_interaction);
  n.risk_tolerance = rubric.risk_tolerance;
  n.language_proficiency = rubric.language_proficiency;

  GateResult& g = report.gate;
  g.max_transactional_error_rate = config.max_transactional_error_rate;
  g.max_faq_error_rate = config.max_faq_error_rate;
  g.transactional_error_rate = raw.transactional_total
                                   ? static_cast<double>(raw.transactional_errors) /
                                         static_cast<double>(raw.transactional_total)
                                   : 0.0;
  g.faq_error_rate =
      raw.faq_total ? static_cast<double>(raw.faq_errors) / static_cast<double>(raw.faq_total) : 0.0;
  g.passed = g.transactional_error_rate <= g.max_transactional_error_rate &&
             g.faq_error_rate <= g.max_faq_error_rate;
  return report;
}

namespace {

RubricScore rubric_value(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  double v;
  if (it->is_object()) {
    double score = it->at("score").get<double>();
    double max = it->at("max").get<double>();
    if (max <= 0.0) throw Error(ErrorCode::kConfigError, std::string(key) + ".max must be positive");
    v = score / max;
  } else {
    v = it->get<double>();
  }
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorCode::kConfigError, std::string(key) + " must normalize into [0, 1]");
  }
  return v;
}

Json optional_number(const RubricScore& v) { return v ? Json(*v) : Json(nullptr); }

RubricScore read_optional(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

}  // namespace

Rubric parse_rubric(std::string_view json_text) {
  Json j = Json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::kConfigError, "rubric must be a JSON object");
  try {
    return Rubric{rubric_value(j, "riskTolerance"), rubric_value(j, "languageProficiency")};
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("rubric: ") + e.what());
  }
}

Rubric load_rubric(const std::string& path) { return parse_rubric(read_file(path)); }

std::optional<ReportFormat> parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "table") return ReportFormat::kTable;
  if (name == "radarData") return ReportFormat::kRadarData;
  return std::nullopt;
}

Json report_to_json(const EvalReport& report) {
  const auto& raw = report.raw;
  const auto& n = report.normalized;
  const auto& g = report.gate;
  Json cases = Json::array();
  for (const auto& c : report.cases) {
    cases.push_back({{"id", c.id},
                     {"kind", c.kind},
                     {"correct", c.correct},
                     {"detail", c.detail},
                     {"latencyMs", c.latency_ms},
                     {"promptTokens", c.prompt_tokens},
                     {"completionTokens", c.completion_tokens},
                     {"cost", c.cost}});
  }
  return Json{{"raw",
               {{"total", raw.total},
                {"correct", raw.correct},
                {"meanLatencyMs", raw.mean_latency_ms},
                {"meanCost", raw.mean_cost},
                {"promptTokens", raw.prompt_tokens},
                {"completionTokens", raw.completion_tokens},
                {"transactionalTotal", raw.transactional_total},
                {"transactionalErrors", raw.transactional_errors},
                {"faqTotal", raw.faq_total},
                {"faqErrors", raw.faq_errors}}},
              {"normalized",
               {{"accuracy", n.accuracy},
                {"speed", n.speed},
                {"costEffectiveness", n.cost_effectiveness},
                {"riskTolerance", optional_number(n.risk_tolerance)},
                {"languageProficiency", optional_number(n.language_proficiency)}}},
              {"gate",
               {{"transactionalErrorRate", g.transactional_error_rate},
                {"faqErrorRate", g.faq_error_rate},
                {"maxTransactionalErrorRate", g.max_transactional_error_rate},
                {"maxFaqErrorRate", g.max_faq_error_rate},
                {"passed", g.passed}}},
              {"cases", std::move(cases)}};
}

EvalReport report_from_json(const Json& j) {
  EvalReport r;
  const Json& raw = j.at("raw");
  r.raw.total = raw.at("total").get<std::size_t>();
  r.raw.correct = raw.at("correct").get<std::size_t>();
  r.raw.mean_latency_ms = raw.at("meanLatencyMs").get<double>();
  r.raw.mean_cost = raw.at("meanCost").get<double>();
  r.raw.prompt_tokens = raw.at("promptTokens").get<std::int64_t>();
  r.raw.completion_tokens = raw.at("completionTokens").get<std::int64_t>();
  r.raw.transactional_total = raw.at("transactionalTotal").get<std::size_t>();
  r.raw.transactional_errors = raw.at("transactionalErrors").get<std::size_t>();
  r.raw.faq_total = raw.at("faqTotal").get<std::size_t>();
  r.raw.faq_errors = raw.at("faqErrors").get<std::size_t>();
  const Json& n = j.at("normalized");
  r.normalized.accuracy = n.at("accuracy").get<double>();
  r.normalized.speed = n.at("speed").get<double>();
  r.normalized.cost_effectiveness = n.at("costEffectiveness").get<double>();
  r.normalized.risk_tolerance = read_optional(n, "riskTolerance");
  r.normalized.language_proficiency = read_optional(n, "languageProficiency");
  const Json& g = j.at("gate");
  r.gate.transactional_error_rate = g.at("transactionalErrorRate").get<double>();
  r.gate.faq_error_rate = g.at("faqErrorRate").get<double>();
  r.gate.max_transactional_error_rate = g.at("maxTransactionalErrorRate").get<double>();
  r.gate.max_faq_error_rate = g.at("maxFaqErrorRate").get<double>();
  r.gate.passed = g.at("passed").get<bool>();
  for (const auto& c : j.at("cases")) {
    r.cases.push_back({c.at("id").get<std::string>(), c.at("kind").get<std::string>(),
                       c.at("correct").get<bool>(), c.at("detail").get<std::string>(),
                       c.at("latencyMs").get<double>(), c.at("promptTokens").get<std::int64_t>(),
                       c.at("completionTokens").get<std::int64_t>(), c.at("cost").get<double>()});
  }
  return r;
}

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string score_cell(const RubricScore& v) { return v ? fixed(*v) : "n/a"; }

}  // namespace

std::string emit_report(const EvalReport& report, ReportFormat format) {
  const auto& n = report.normalized;
  switch (format) {
    case ReportFormat::kJson:
      return report_to_json(report).dump(2);
    case ReportFormat::kRadarData: {
      Json out{{"axes", {"accuracy", "speed", "costEffectiveness", "riskTolerance", "languageProficiency"}},
               {"values",
                {n.accuracy, n.speed, n.cost_effectiveness, optional_number(n.risk_tolerance),
                 optional_number(n.language_proficiency)}}};
      return out.dump();
    }
    case ReportFormat::kTable: {
      const auto& raw = report.raw;
      const auto& g = report.gate;
      std::ostringstream out;
      char line[160];
      std::snprintf(line, sizeof line, "%-22s %-26s %s\n", "metric", "raw", "score");
      out << line;
      auto row = [&](const char* name, const std::string& rawv, const std::string& score) {
        std::snprintf(line, sizeof line, "%-22s %-26s %s\n", name, rawv.c_str(), score.c_str());
        out << line;
      };
      row("accuracy", std::to_string(raw.correct) + "/" + std::to_string(raw.total), fixed(n.accuracy));
      row("speed", fixed(raw.mean_latency_ms, 3) + " ms mean", fixed(n.speed));
      row("costEffectiveness", fixed(raw.mean_cost, 6) + " per case", fixed(n.cost_effectiveness));
      row("riskTolerance", "rubric", score_cell(n.risk_tolerance));
      row("languageProficiency", "rubric", score_cell(n.language_proficiency));
      out << "\n";
      out << "transactional error rate " << fixed(g.transactional_error_rate) << " (max "
          << fixed(g.max_transactional_error_rate) << ")\n";
      out << "FAQ error rate           " << fixed(g.faq_error_rate) << " (max "
          << fixed(g.max_faq_error_rate) << ")\n";
      out << "gate                     " << (g.passed ? "PASS" : "FAIL") << "\n";
      bool header = false;
      for (const auto& c : report.cases) {
        if (c.correct) continue;
        if (!header) {
          out << "\nincorrect cases:\n";
          header = true;
        }
        out << "  " << c.id << " [" << c.kind << "] " << c.detail << "\n";
      }
      return out.str();
    }
  }
  return {};
}

}  // namespace tellerflow::eval
