#include "tellerflow/model_backend.h"

#include <cctype>
#include <fstream>
#include <sstream>

#include "tellerflow/canonical.h"
#include "tellerflow/errors.h"

namespace tellerflow {

std::string_view agent_name(AgentName agent) {
  switch (agent) {
    case AgentName::kGuardrails: return "guardrails";
    case AgentName::kIntent: return "intent";
    case AgentName::kPayment: return "payment";
    case AgentName::kFaq: return "faq";
  }
  return "?";
}

std::optional<AgentName> parse_agent_name(std::string_view name) {
  for (auto a : {AgentName::kGuardrails, AgentName::kIntent, AgentName::kPayment, AgentName::kFaq}) {
    if (agent_name(a) == name) return a;
  }
  return std::nullopt;
}

AdapterRegistry::AdapterRegistry(std::vector<AdapterSpec> specs) {
  for (auto& spec : specs) set(std::move(spec));
}

void AdapterRegistry::set(AdapterSpec spec) {
  if (!is_registered_schema(spec.output_schema_id)) {
    throw Error(ErrorCode::kConfigError,
                "adapter " + spec.adapter_id + " names unknown schema " + spec.output_schema_id);
  }
  AgentName agent = spec.agent;
  specs_[agent] = std::move(spec);
}

const AdapterSpec& AdapterRegistry::get(AgentName agent) const {
  auto it = specs_.find(agent);
  if (it == specs_.end()) {
    throw Error(ErrorCode::kConfigError,
                "no adapter configured for agent " + std::string(agent_name(agent)));
  }
  return it->second;
}

AdapterRegistry AdapterRegistry::parse(std::string_view json_text) {
  Json doc = Json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) {
    throw Error(ErrorCode::kConfigError, "adapter config must be a JSON array");
  }
  AdapterRegistry registry;
  for (const auto& item : doc) {
    auto agent = parse_agent_name(item.value("agentName", ""));
    if (!agent) throw Error(ErrorCode::kConfigError, "adapter entry with unknown agentName");
    if (registry.specs_.count(*agent)) {
      throw Error(ErrorCode::kConfigError,
                  "duplicate adapter for agent " + std::string(agent_name(*agent)));
    }
    AdapterSpec spec;
    spec.agent = *agent;
    spec.adapter_id = item.value("adapterId", "");
    spec.output_schema_id = item.value("outputSchemaId", "");
    const auto& tmpl = item.at("promptTemplate");
    // Long templates may be given as an array of lines.
    if (tmpl.is_array()) {
      std::string joined;
      for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (i) joined.push_back('\n');
        joined += tmpl[i].get<std::string>();
      }
      spec.prompt_template = std::move(joined);
    } else {
      spec.prompt_template = tmpl.get<std::string>();
    }
    registry.set(std::move(spec));
  }
  for (auto a : {AgentName::kGuardrails, AgentName::kIntent, AgentName::kPayment, AgentName::kFaq}) {
    registry.get(a);
  }
  return registry;
}

AdapterRegistry AdapterRegistry::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileUnreadable, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

namespace {

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

// Calls fn(begin, end, name) for each `{name}` placeholder.
template <typename Fn>
void for_each_placeholder(std::string_view tmpl, Fn&& fn) {
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] != '{' || i + 1 >= tmpl.size() || !is_ident_start(tmpl[i + 1])) continue;
    std::size_t j = i + 1;
    while (j < tmpl.size() && is_ident_char(tmpl[j])) ++j;
    if (j < tmpl.size() && tmpl[j] == '}') {
      fn(i, j + 1, tmpl.substr(i + 1, j - i - 1));
      i = j;
    }
  }
}

}  // namespace

std::vector<std::string> template_placeholders(std::string_view tmpl) {
  std::vector<std::string> names;
  for_each_placeholder(tmpl, [&](std::size_t, std::size_t, std::string_view name) {
    names.emplace_back(name);
  });
  return names;
}

std::string render_prompt(const AdapterSpec& spec,
                          const std::map<std::string, std::string>& bindings) {
  std::string_view tmpl = spec.prompt_template;
  std::string out;
  out.reserve(tmpl.size());
  std::size_t cursor = 0;
  for_each_placeholder(tmpl, [&](std::size_t begin, std::size_t end, std::string_view name) {
    auto it = bindings.find(std::string(name));
    if (it == bindings.end()) {
      throw Error(ErrorCode::kMissingBinding, "missing binding: " + std::string(name));
    }
    out.append(tmpl.substr(cursor, begin - cursor));
    out.append(it->second);
    cursor = end;
  });
  out.append(tmpl.substr(cursor));
  return out;
}

std::int64_t count_tokens(std::string_view text) {
  enum class Run { kNone, kAlpha, kDigit };
  std::int64_t count = 0;
  Run run = Run::kNone;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      run = Run::kNone;
    } else if (std::isalpha(c) || c >= 0x80) {
      if (run != Run::kAlpha) ++count;
      run = Run::kAlpha;
    } else if (std::isdigit(c)) {
      if (run != Run::kDigit) ++count;
      run = Run::kDigit;
    } else {
      ++count;
      run = Run::kNone;
    }
  }
  return count;
}

std::optional<std::string> extract_json_object(std::string_view text) {
  for (std::size_t start = text.find('{'); start != std::string_view::npos;
       start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escape = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_string) {
        if (escape) {
          escape = false;
        } else if (c == '\\') {
          escape = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          std::string candidate(text.substr(start, i - start + 1));
          if (Json::accept(candidate)) return candidate;
          break;
        }
      }
    }
  }
  return std::nullopt;
}

StructuredResult complete_structured(ModelBackend& backend, const AdapterSpec& spec,
                                     const std::string& prompt,
                                     const std::vector<ChatTurn>& conversation,
                                     std::string_view task, int retry_limit) {
  if (!is_registered_schema(spec.output_schema_id)) {
    throw Error(ErrorCode::kUnknownType, "unregistered output schema: " + spec.output_schema_id);
  }
  ModelCallRecord record;
  record.adapter_id = spec.adapter_id;
  auto started = std::chrono::steady_clock::now();

  std::int64_t conversation_tokens = 0;
  for (const auto& turn : conversation) conversation_tokens += count_tokens(turn.text);

  std::string last_error;
  for (int attempt = 1; attempt <= retry_limit + 1; ++attempt) {
    CompletionRequest request;
    request.agent = spec.agent;
    request.adapter_id = spec.adapter_id;
    request.schema_id = spec.output_schema_id;
    request.task = std::string(task);
    request.system_prompt = attempt == 1 ? prompt : prompt + "\n\n" + std::string(kRepairSuffix);
    request.conversation = conversation;
    request.attempt = attempt;

    std::string reply = backend.complete(request);
    record.attempt = attempt;
    record.prompt_tokens += count_tokens(request.system_prompt) + conversation_tokens;
    record.completion_tokens += count_tokens(reply);

    if (auto object = extract_json_object(reply)) {
      try {
        AgentOutput output = from_json(spec.output_schema_id, Json::parse(*object), true);
        record.latency_ms = std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - started)
                                .count();
        return {std::move(output), record};
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kSchemaViolation) throw;
        last_error = e.what();
      }
    } else {
      last_error = "reply contained no JSON object";
    }
  }
  throw Error(ErrorCode::kSchemaViolation,
              "adapter " + spec.adapter_id + " gave no valid " + spec.output_schema_id + " after " +
                  std::to_string(retry_limit + 1) + " attempts: " + last_error);
}

}  // namespace tellerflow
