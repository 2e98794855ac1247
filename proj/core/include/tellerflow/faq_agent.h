#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tellerflow/envelope.h"
#include "tellerflow/model_backend.h"
#include "tellerflow/snapshot.h"

namespace tellerflow {

struct KnowledgeDoc {
  std::string doc_id;
  std::string title;
  std::string body;
  std::vector<std::string> tags;
};

using EmbeddingVector = std::vector<double>;

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dimension() const = 0;
  // Unit-norm vector. Throws Error(kEmptyText) for blank input.
  virtual EmbeddingVector embed(std::string_view text) const = 0;
};

inline constexpr std::size_t kDefaultEmbeddingDim = 256;

// Bag of hashed character trigrams over each content word (padded with word
// boundaries) plus double-weighted hashed word unigrams, projected to D
// buckets and L2-normalized. Stopwords are dropped unless nothing else is
// left.
class HashedNgramEmbedder : public Embedder {
 public:
  explicit HashedNgramEmbedder(std::size_t dimension = kDefaultEmbeddingDim);

  std::size_t dimension() const override { return dimension_; }
  EmbeddingVector embed(std::string_view text) const override;

 private:
  std::size_t dimension_;
};

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

struct RetrievalHit {
  std::string doc_id;
  double similarity = 0.0;
  double rerank_score = 0.0;

  bool operator==(const RetrievalHit&) const = default;
};

// Immutable ingest result.
struct StoreSnapshot {
  std::int64_t version = 0;
  std::vector<KnowledgeDoc> docs;
  std::vector<EmbeddingVector> vectors;

  const KnowledgeDoc* find(std::string_view doc_id) const;
};

// One KnowledgeDoc JSON object per line; blank lines skipped. Duplicate ids,
// empty bodies or malformed lines throw Error(kParseError) naming the line.
std::vector<KnowledgeDoc> parse_knowledge_jsonl(std::string_view text);

// Exact in-memory index. Re-ingest builds a complete new snapshot and swaps
// it in; readers holding the old one are unaffected.
class VectorStore {
 public:
  explicit VectorStore(std::shared_ptr<const Embedder> embedder);

  std::shared_ptr<const StoreSnapshot> ingest(std::vector<KnowledgeDoc> docs);
  std::shared_ptr<const StoreSnapshot> ingest_jsonl(std::string_view text);
  std::shared_ptr<const StoreSnapshot> ingest_file(const std::string& path);

  std::shared_ptr<const StoreSnapshot> snapshot() const { return snapshot_.load(); }
  const Embedder& embedder() const { return *embedder_; }

 private:
  std::shared_ptr<const Embedder> embedder_;
  Snapshot<StoreSnapshot> snapshot_;
};

// Exact cosine top-k: min(k, |store|) hits ordered by similarity descending,
// ties (equal at 1e-9) by doc id ascending. rerank_score is set equal to similarity.
// Throws Error(kEmptyStore) for an empty store; k must be >= 1.
std::vector<RetrievalHit> retrieve(const EmbeddingVector& query, const StoreSnapshot& store,
                                   std::size_t k);

// Fraction of the query's content words that appear in the document.
double lexical_overlap(std::string_view query, const KnowledgeDoc& doc);

// Stable reorder by alpha * similarity + (1 - alpha) * lexical overlap, ties
// by doc id.
std::vector<RetrievalHit> rerank(std::string_view query, std::vector<RetrievalHit> hits,
                                 const StoreSnapshot& store, double alpha = 0.7);

struct FaqConfig {
  std::size_t retrieve_k = 8;
  std::size_t generate_k = 3;
  double alpha = 0.7;
  double confidence_threshold = 0.15;
};

inline constexpr std::string_view kFaqFallback =
    "I'm sorry, I don't have enough information to answer that. Please check the app or "
    "contact our Help & Support Center for assistance.";
inline constexpr std::string_view kOutOfDomainReply =
    "I'm sorry, that is outside my expertise. I can help with banking questions, such as "
    "transfers, accounts and our products.";

// Built-in instruction for the rewrite step; shares the FAQ adapter.
extern const char* const kReformulationTemplate;

struct FaqTurnResult {
  std::string query;
  std::vector<RetrievalHit> hits;
  FaqAnswer answer;
  std::vector<ModelCallRecord> calls;
  bool fallback = false;
};

class FaqAgent : public ActionHandler {
 public:
  FaqAgent(std::shared_ptr<ModelBackend> backend, AdapterSpec spec,
           std::shared_ptr<VectorStore> store, FaqConfig config = {});

  // With empty history returns the (trimmed) input. Model failure falls back
  // to the raw input.
  std::string reformulate_query(const ChatTurn& turn, const std::vector<ChatTurn>& history,
                                std::optional<ModelCallRecord>* call = nullptr);

  // Grounded answer over `top_docs`. Below the confidence threshold (or with
  // nothing retrieved) the fixed fallback is returned without a model call.
  FaqAnswer answer(std::string_view query, const std::vector<RetrievalHit>& top_docs,
                   const StoreSnapshot& store, const std::vector<ChatTurn>& history,
                   std::optional<ModelCallRecord>* call = nullptr, bool* fallback = nullptr);

  FaqTurnResult process_turn(const ChatTurn& turn, const std::vector<ChatTurn>& history);

  ActionOutput handle(PipelineEnvelope& envelope) override;

  VectorStore& store() { return *store_; }
  const FaqConfig& config() const { return config_; }

 private:
  std::shared_ptr<ModelBackend> backend_;
  AdapterSpec spec_;
  std::shared_ptr<VectorStore> store_;
  FaqConfig config_;
};

}  // namespace tellerflow
