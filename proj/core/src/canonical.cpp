#include "tellerflow/canonical.h"

#include <set>

#include "tellerflow/errors.h"

namespace tellerflow {

namespace {

[[noreturn]] void violation(std::string_view schema, const std::string& why) {
  throw Error(ErrorCode::kSchemaViolation, std::string(schema) + ": " + why);
}

Json optional_string(const std::optional<std::string>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<std::string> read_optional_string(std::string_view schema, const Json& obj,
                                                const char* key, bool required) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) violation(schema, std::string("missing field ") + key);
    return std::nullopt;
  }
  if (it->is_null()) return std::nullopt;
  if (!it->is_string()) violation(schema, std::string(key) + " must be a string or null");
  return it->get<std::string>();
}

bool read_bool(std::string_view schema, const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_boolean()) {
    violation(schema, std::string(key) + " must be a boolean");
  }
  return it->get<bool>();
}

std::string read_string(std::string_view schema, const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    violation(schema, std::string(key) + " must be a string");
  }
  return it->get<std::string>();
}

void require_object(std::string_view schema, const Json& value) {
  if (!value.is_object()) violation(schema, "expected a JSON object");
}

std::optional<Money> read_amount(std::string_view schema, const Json& obj, bool as_decimal) {
  auto it = obj.find("amount");
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_number_integer() && !as_decimal) return Money::from_minor(it->get<std::int64_t>());
  if (it->is_number()) return Money::from_decimal(it->get<double>());
  if (it->is_string()) {
    if (auto m = Money::parse(it->get<std::string>())) return m;
  }
  violation(schema, "amount must be a number or null");
}

Json guardrail_to_json(const GuardrailVerdict& v) {
  return Json{{"isSafe", v.is_safe},
              {"guardrailViolation",
               v.violation ? Json(std::string(violation_label(*v.violation))) : Json(nullptr)},
              {"message", optional_string(v.message)}};
}

GuardrailVerdict guardrail_from_json(const Json& value) {
  constexpr std::string_view s = kSchemaGuardrailVerdict;
  require_object(s, value);
  GuardrailVerdict v;
  v.is_safe = read_bool(s, value, "isSafe");
  if (auto label = read_optional_string(s, value, "guardrailViolation", false)) {
    auto category = parse_violation(*label);
    if (!category) violation(s, "unknown guardrailViolation \"" + *label + "\"");
    v.violation = category;
  }
  v.message = read_optional_string(s, value, "message", false);
  if (v.message && v.message->empty()) v.message.reset();
  if (!v.well_formed()) {
    violation(s, v.is_safe ? "safe verdict cannot carry a violation"
                           : "unsafe verdict needs a category and a message");
  }
  return v;
}

Json intent_to_json(const IntentResult& r) {
  return Json{{"intent", std::string(intent_name(r.intent))},
              {"clarificationNeeded", r.clarification_needed},
              {"message", optional_string(r.message)}};
}

IntentResult intent_from_json(const Json& value) {
  constexpr std::string_view s = kSchemaIntentResult;
  require_object(s, value);
  IntentResult r;
  std::string name = read_string(s, value, "intent");
  auto intent = parse_intent(name);
  if (!intent) violation(s, "unknown intent \"" + name + "\"");
  r.intent = *intent;
  r.clarification_needed = read_bool(s, value, "clarificationNeeded");
  r.message = read_optional_string(s, value, "message", false);
  if (r.message && r.message->empty()) r.message.reset();
  if (!r.well_formed()) {
    violation(s, r.clarification_needed ? "clarification needs a message"
                                        : "message must be null without clarification");
  }
  return r;
}

Json inquiry_to_json(const InquiryResult& r) {
  Json fields = Json::array();
  for (const auto& [name, value] : r.fields) fields.push_back(Json{{"name", name}, {"value", value}});
  return Json{{"kind", r.kind}, {"message", r.message}, {"fields", std::move(fields)}};
}

InquiryResult inquiry_from_json(const Json& value) {
  constexpr std::string_view s = kSchemaInquiryResult;
  require_object(s, value);
  InquiryResult r;
  r.kind = read_string(s, value, "kind");
  r.message = read_string(s, value, "message");
  auto it = value.find("fields");
  if (it == value.end() || !it->is_array()) violation(s, "fields must be an array");
  for (const auto& f : *it) {
    require_object(s, f);
    r.fields.emplace_back(read_string(s, f, "name"), read_string(s, f, "value"));
  }
  return r;
}

}  // namespace

Json to_json(const TransferDraft& d) {
  return Json{{"recipientName", optional_string(d.recipient_name)},
              {"bankName", optional_string(d.bank_name)},
              {"accountNumber", optional_string(d.account_number)},
              {"amount", d.amount ? Json(d.amount->minor()) : Json(nullptr)},
              {"reference", d.reference}};
}

TransferDraft draft_from_json(const Json& value, bool amount_as_decimal) {
  constexpr std::string_view s = kSchemaPaymentResult;
  require_object(s, value);
  TransferDraft d;
  d.recipient_name = read_optional_string(s, value, "recipientName", false);
  d.bank_name = read_optional_string(s, value, "bankName", false);
  d.account_number = read_optional_string(s, value, "accountNumber", false);
  d.amount = read_amount(s, value, amount_as_decimal);
  auto ref = read_optional_string(s, value, "reference", false);
  d.reference = ref && !ref->empty() ? *ref : std::string(kDefaultReference);
  for (auto* field : {&d.recipient_name, &d.bank_name, &d.account_number}) {
    if (*field && field->value().empty()) field->reset();
  }
  return d;
}

Json to_json(const AgentOutput& output) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GuardrailVerdict>) {
          return guardrail_to_json(v);
        } else if constexpr (std::is_same_v<T, IntentResult>) {
          return intent_to_json(v);
        } else if constexpr (std::is_same_v<T, PaymentAgentResult>) {
          Json transfers = Json::array();
          for (const auto& d : v.transfers) transfers.push_back(to_json(d));
          return Json{{"transfers", std::move(transfers)}, {"message", v.message}};
        } else if constexpr (std::is_same_v<T, FaqAnswer>) {
          return Json{{"message", v.message}};
        } else if constexpr (std::is_same_v<T, InquiryResult>) {
          return inquiry_to_json(v);
        } else {
          return Json{{"txId", v.tx_id},
                      {"draft", to_json(v.draft)},
                      {"kind", std::string(transfer_kind_name(v.kind))},
                      {"requires2FA", v.requires_2fa},
                      {"state", v.state}};
        }
      },
      output);
}

bool is_registered_schema(std::string_view schema_id) {
  return schema_id == kSchemaGuardrailVerdict || schema_id == kSchemaIntentResult ||
         schema_id == kSchemaPaymentResult || schema_id == kSchemaFaqAnswer ||
         schema_id == kSchemaInquiryResult || schema_id == kSchemaConfirmation;
}

AgentOutput from_json(std::string_view schema_id, const Json& value, bool amount_as_decimal) {
  if (schema_id == kSchemaGuardrailVerdict) return guardrail_from_json(value);
  if (schema_id == kSchemaIntentResult) return intent_from_json(value);
  if (schema_id == kSchemaPaymentResult) {
    require_object(schema_id, value);
    PaymentAgentResult r;
    auto it = value.find("transfers");
    if (it == value.end() || !it->is_array()) violation(schema_id, "transfers must be an array");
    for (const auto& d : *it) r.transfers.push_back(draft_from_json(d, amount_as_decimal));
    r.message = read_string(schema_id, value, "message");
    if (r.message.empty()) violation(schema_id, "message must be non-empty");
    return r;
  }
  if (schema_id == kSchemaFaqAnswer) {
    require_object(schema_id, value);
    FaqAnswer a{read_string(schema_id, value, "message")};
    if (a.message.empty()) violation(schema_id, "message must be non-empty");
    return a;
  }
  if (schema_id == kSchemaInquiryResult) return inquiry_from_json(value);
  if (schema_id == kSchemaConfirmation) {
    require_object(schema_id, value);
    ConfirmationRequest c;
    c.tx_id = read_string(schema_id, value, "txId");
    auto draft = value.find("draft");
    if (draft == value.end()) violation(schema_id, "missing draft");
    c.draft = draft_from_json(*draft, amount_as_decimal);
    auto kind = parse_transfer_kind(read_string(schema_id, value, "kind"));
    if (!kind) violation(schema_id, "kind must be P2P or P2M");
    c.kind = *kind;
    c.requires_2fa = read_bool(schema_id, value, "requires2FA");
    c.state = read_string(schema_id, value, "state");
    return c;
  }
  throw Error(ErrorCode::kUnknownType, "unregistered output schema: " + std::string(schema_id));
}

namespace {

void write_value(const Json& value, bool currency, std::string& out) {
  switch (value.type()) {
    case Json::value_t::object: {
      out.push_back('{');
      bool first = true;
      for (auto it = value.begin(); it != value.end(); ++it) {
        if (!first) out.push_back(',');
        first = false;
        out += Json(it.key()).dump();
        out.push_back(':');
        write_value(it.value(), it.key() == "amount", out);
      }
      out.push_back('}');
      break;
    }
    case Json::value_t::array: {
      out.push_back('[');
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (i) out.push_back(',');
        write_value(value[i], false, out);
      }
      out.push_back(']');
      break;
    }
    case Json::value_t::number_integer:
    case Json::value_t::number_unsigned:
      if (currency) {
        out += Money::from_minor(value.get<std::int64_t>()).to_decimal_string();
      } else {
        out += value.dump();
      }
      break;
    default:
      out += value.dump(-1, ' ', false, Json::error_handler_t::replace);
  }
}

}  // namespace

std::string write_canonical_json(const Json& value) {
  std::string out;
  write_value(value, false, out);
  return out;
}

std::string canonical_serialize(const AgentOutput& output) {
  return write_canonical_json(to_json(output));
}

std::string canonical_serialize(std::string_view schema_id, const Json& value) {
  if (!is_registered_schema(schema_id)) {
    throw Error(ErrorCode::kUnknownType, "unregistered output schema: " + std::string(schema_id));
  }
  // Decode first so only values that satisfy the schema get a canonical form.
  return canonical_serialize(from_json(schema_id, value, false));
}

AgentOutput parse_canonical(std::string_view schema_id, std::string_view bytes) {
  Json value = Json::parse(bytes, nullptr, false);
  if (value.is_discarded()) {
    throw Error(ErrorCode::kSchemaViolation, "canonical bytes are not valid JSON");
  }
  return from_json(schema_id, value, true);
}

}  // namespace tellerflow
