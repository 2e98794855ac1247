#include "tellerflow/guardrails.h"

#include <fstream>
#include <sstream>

#include "tellerflow/canonical.h"
#include "tellerflow/errors.h"
#include "tellerflow/text.h"

namespace tellerflow {

const BlocklistEntry* BlocklistPolicy::match(std::string_view input) const {
  std::string normalized = text::normalize(input);
  for (const auto& entry : entries) {
    if (text::contains_phrase(normalized, entry.phrase)) return &entry;
  }
  return nullptr;
}

BlocklistPolicy parse_blocklist(std::string_view json_text) {
  Json doc = Json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::kParseError, "blocklist is not a JSON object");
  }
  BlocklistPolicy policy;
  auto version = doc.find("version");
  if (version != doc.end()) {
    if (!version->is_number_integer()) throw Error(ErrorCode::kParseError, "version must be an integer");
    policy.version = version->get<std::int64_t>();
  }
  auto entries = doc.find("entries");
  if (entries == doc.end() || !entries->is_array()) {
    throw Error(ErrorCode::kParseError, "blocklist needs an entries array");
  }
  for (std::size_t i = 0; i < entries->size(); ++i) {
    const Json& e = (*entries)[i];
    std::string where = "blocklist entry " + std::to_string(i);
    if (!e.is_object() || !e.contains("phrase") || !e["phrase"].is_string() ||
        !e.contains("category") || !e["category"].is_string()) {
      throw Error(ErrorCode::kParseError, where + " needs string phrase and category");
    }
    auto category = parse_violation(e["category"].get<std::string>());
    if (!category) throw Error(ErrorCode::kParseError, where + " has an unknown category");
    std::string phrase = text::normalize(e["phrase"].get<std::string>());
    if (phrase.empty()) throw Error(ErrorCode::kParseError, where + " has an empty phrase");
    policy.entries.push_back({std::move(phrase), *category});
  }
  return policy;
}

BlocklistStore::BlocklistStore(BlocklistPolicy initial) : policy_(std::move(initial)) {}

std::shared_ptr<const BlocklistPolicy> BlocklistStore::reload(std::string_view json_text) {
  BlocklistPolicy parsed = parse_blocklist(json_text);
  return policy_.update([&](const BlocklistPolicy& current) {
    BlocklistPolicy next = parsed;
    next.version = std::max(parsed.version, current.version + 1);
    return next;
  });
}

std::shared_ptr<const BlocklistPolicy> BlocklistStore::reload_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileUnreadable, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return reload(buf.str());
}

ImageVerdict FixtureImageModerator::screen(const AttachmentRef& attachment) const {
  auto it = flagged_.find(attachment.id);
  if (it == flagged_.end()) return ImageAllow{};
  return ImageBlock{"image flagged by moderation", it->second};
}

std::string refusal_message(ViolationCategory category) {
  switch (category) {
    case ViolationCategory::kCodeInterpreterAbuse:
      return "I'm sorry, I can't share details about how I work. I'm happy to help with your "
             "banking needs.";
    case ViolationCategory::kPrivacy:
      return "I'm sorry, I can't help with information about other people. I can only assist "
             "with your own accounts.";
    case ViolationCategory::kControversialTopicsPolitics:
      return "I'm sorry, I can't discuss that topic. Is there anything banking related I can "
             "help you with?";
    default:
      return "I'm sorry, but I can't help with that request. Is there anything banking related "
             "I can help you with?";
  }
}

Guardrails::Guardrails(std::shared_ptr<ModelBackend> backend, AdapterSpec spec,
                       std::shared_ptr<BlocklistStore> blocklist,
                       std::shared_ptr<const ImageModerator> moderator)
    : backend_(std::move(backend)),
      spec_(std::move(spec)),
      blocklist_(std::move(blocklist)),
      moderator_(std::move(moderator)) {}

namespace {

GuardrailVerdict unsafe(ViolationCategory category) {
  return GuardrailVerdict{false, category, refusal_message(category)};
}

}  // namespace

GuardrailVerdict Guardrails::screen_text(const ChatTurn& turn, const std::vector<ChatTurn>& history,
                                         std::optional<ModelCallRecord>* call) {
  auto policy = blocklist_->current();
  if (const BlocklistEntry* hit = policy->match(turn.text)) return unsafe(hit->category);

  std::vector<ChatTurn> conversation = history;
  conversation.push_back(turn);
  try {
    std::string prompt = render_prompt(spec_, {{"language", "auto"}});
    auto result = complete_structured(*backend_, spec_, prompt, conversation, "classify");
    if (call) *call = result.record;
    auto verdict = std::get<GuardrailVerdict>(result.output);
    if (!verdict.is_safe) return unsafe(*verdict.violation);
    return GuardrailVerdict{true, std::nullopt, std::nullopt};
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSchemaViolation || e.code() == ErrorCode::kBackendUnavailable) {
      throw Error(ErrorCode::kAgentFailure, std::string("guardrail classifier failed: ") + e.what());
    }
    throw;
  }
}

ImageVerdict Guardrails::screen_image(const AttachmentRef& attachment) const {
  if (attachment.content.empty()) {
    throw Error(ErrorCode::kAgentFailure, "attachment " + attachment.id + " could not be decoded");
  }
  return moderator_ ? moderator_->screen(attachment) : ImageVerdict{ImageAllow{}};
}

StageOutput Guardrails::screen(const PipelineEnvelope& envelope) {
  for (const auto& attachment : envelope.turn.attachments) {
    auto verdict = screen_image(attachment);
    if (auto* block = std::get_if<ImageBlock>(&verdict)) {
      return {unsafe(block->category.value_or(ViolationCategory::kSexRelatedCrimes)), std::nullopt, {}};
    }
  }
  if (text::trim(envelope.turn.text).empty()) {
    return {GuardrailVerdict{true, std::nullopt, std::nullopt}, std::nullopt, {}};
  }
  std::optional<ModelCallRecord> call;
  GuardrailVerdict verdict = screen_text(envelope.turn, envelope.history, &call);
  return {verdict, call, {}};
}

}  // namespace tellerflow
