#include "tellerflow/faq_agent.h"

#include "tellerflow/errors.h"
#include "tellerflow/fixture_backend.h"
#include "tellerflow/text.h"

namespace tellerflow {

const char* const kReformulationTemplate =
    "You rewrite the customer's latest message into a single, self-contained question about "
    "our banking products and services. Use the earlier conversation only to resolve what the "
    "latest message refers to. Do not answer the question and do not add new facts.\n"
    "Return a JSON object of the form {\"message\": \"<rewritten question>\"}.";

FaqAgent::FaqAgent(std::shared_ptr<ModelBackend> backend, AdapterSpec spec,
                   std::shared_ptr<VectorStore> store, FaqConfig config)
    : backend_(std::move(backend)),
      spec_(std::move(spec)),
      store_(std::move(store)),
      config_(config) {}

namespace {

bool model_trouble(const Error& e) {
  return e.code() == ErrorCode::kSchemaViolation || e.code() == ErrorCode::kBackendUnavailable;
}

}  // namespace

std::string FaqAgent::reformulate_query(const ChatTurn& turn, const std::vector<ChatTurn>& history,
                                        std::optional<ModelCallRecord>* call) {
  std::string raw = text::trim(turn.text);
  if (history.empty()) return raw;
  AdapterSpec spec = spec_;
  spec.prompt_template = kReformulationTemplate;
  std::vector<ChatTurn> conversation = history;
  conversation.push_back(turn);
  try {
    auto result = complete_structured(*backend_, spec, render_prompt(spec, {}), conversation,
                                      "reformulate");
    if (call) *call = result.record;
    std::string rewritten = text::trim(std::get<FaqAnswer>(result.output).message);
    return rewritten.empty() ? raw : rewritten;
  } catch (const Error& e) {
    if (!model_trouble(e)) throw;
    return raw;
  }
}

FaqAnswer FaqAgent::answer(std::string_view query, const std::vector<RetrievalHit>& top_docs,
                           const StoreSnapshot& store, const std::vector<ChatTurn>& history,
                           std::optional<ModelCallRecord>* call, bool* fallback) {
  auto give_up = [&] {
    if (fallback) *fallback = true;
    return FaqAnswer{std::string(kFaqFallback)};
  };
  if (fallback) *fallback = false;
  if (top_docs.empty() || top_docs.front().rerank_score < config_.confidence_threshold) {
    return give_up();
  }
  std::vector<std::string> blocks;
  for (std::size_t i = 0; i < top_docs.size() && i < config_.generate_k; ++i) {
    if (const KnowledgeDoc* d = store.find(top_docs[i].doc_id)) {
      blocks.push_back(render_knowledge_block(d->doc_id, d->title, d->body));
    }
  }
  if (blocks.empty()) return give_up();

  std::vector<ChatTurn> conversation = history;
  conversation.push_back(ChatTurn::user(std::string(query)));
  try {
    std::string prompt =
        render_prompt(spec_, {{"knowledge_context", text::join(blocks, "\n")}, {"language", "auto"}});
    auto result = complete_structured(*backend_, spec_, prompt, conversation, "answer");
    if (call) *call = result.record;
    return std::get<FaqAnswer>(result.output);
  } catch (const Error& e) {
    if (!model_trouble(e)) throw;
    return give_up();
  }
}

FaqTurnResult FaqAgent::process_turn(const ChatTurn& turn, const std::vector<ChatTurn>& history) {
  FaqTurnResult out;
  std::optional<ModelCallRecord> reformulation;
  out.query = reformulate_query(turn, history, &reformulation);
  if (reformulation) out.calls.push_back(*reformulation);

  auto snapshot = store_->snapshot();
  if (text::trim(out.query).empty() || snapshot->docs.empty()) {
    out.answer = FaqAnswer{std::string(kFaqFallback)};
    out.fallback = true;
    return out;
  }
  auto hits = retrieve(store_->embedder().embed(out.query), *snapshot, config_.retrieve_k);
  out.hits = rerank(out.query, std::move(hits), *snapshot, config_.alpha);
  if (out.hits.size() > config_.generate_k) out.hits.resize(config_.generate_k);

  std::optional<ModelCallRecord> call;
  out.answer = answer(out.query, out.hits, *snapshot, history, &call, &out.fallback);
  if (call) out.calls.push_back(*call);
  return out;
}

ActionOutput FaqAgent::handle(PipelineEnvelope& envelope) {
  FaqTurnResult turn = process_turn(envelope.turn, envelope.history);
  ActionOutput out;
  out.stage.output = turn.answer;
  if (!turn.calls.empty()) {
    out.stage.call = turn.calls.back();
    out.stage.extra_calls.assign(turn.calls.begin(), turn.calls.end() - 1);
  }
  out.reply = turn.answer.message;
  envelope.grounding_doc_ids.clear();
  if (!turn.fallback) {
    for (const auto& h : turn.hits) envelope.grounding_doc_ids.push_back(h.doc_id);
  }
  return out;
}

}  // namespace tellerflow
