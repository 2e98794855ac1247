#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "tellerflow/canonical.h"
#include "tellerflow/errors.h"
#include "tellerflow/faq_agent.h"
#include "tellerflow/text.h"

namespace tellerflow {

namespace {

// Scores are ordered at 1e-9 resolution so rounding noise between
// mathematically equal scores never decides the order; the doc id does.
std::int64_t score_key(double score) { return std::llround(score * 1e9); }

}  // namespace

const KnowledgeDoc* StoreSnapshot::find(std::string_view doc_id) const {
  for (const auto& d : docs) {
    if (d.doc_id == doc_id) return &d;
  }
  return nullptr;
}

std::vector<KnowledgeDoc> parse_knowledge_jsonl(std::string_view input) {
  std::vector<KnowledgeDoc> docs;
  std::set<std::string> seen;
  std::istringstream in{std::string(input)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (text::trim(line).empty()) continue;
    std::string where = "knowledge line " + std::to_string(number);
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::kParseError, where + ": not a JSON object");
    KnowledgeDoc d;
    try {
      d.doc_id = j.at("docId").get<std::string>();
      d.title = j.value("title", "");
      d.body = j.at("body").get<std::string>();
      d.tags = j.value("tags", std::vector<std::string>{});
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kParseError, where + ": " + e.what());
    }
    if (d.doc_id.empty()) throw Error(ErrorCode::kParseError, where + ": empty docId");
    if (text::trim(d.body).empty()) throw Error(ErrorCode::kParseError, where + ": empty body");
    if (!seen.insert(d.doc_id).second) {
      throw Error(ErrorCode::kParseError, where + ": duplicate docId " + d.doc_id);
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

VectorStore::VectorStore(std::shared_ptr<const Embedder> embedder) : embedder_(std::move(embedder)) {}

std::shared_ptr<const StoreSnapshot> VectorStore::ingest(std::vector<KnowledgeDoc> docs) {
  std::set<std::string> seen;
  StoreSnapshot next;
  for (auto& d : docs) {
    if (!seen.insert(d.doc_id).second) throw Error(ErrorCode::kParseError, "duplicate docId " + d.doc_id);
    if (text::trim(d.body).empty()) throw Error(ErrorCode::kParseError, "empty body for " + d.doc_id);
    next.vectors.push_back(embedder_->embed(d.title + "\n" + d.body));
  }
  next.docs = std::move(docs);
  return snapshot_.update([&](const StoreSnapshot& current) {
    next.version = current.version + 1;
    return std::move(next);
  });
}

std::shared_ptr<const StoreSnapshot> VectorStore::ingest_jsonl(std::string_view input) {
  return ingest(parse_knowledge_jsonl(input));
}

std::shared_ptr<const StoreSnapshot> VectorStore::ingest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileUnreadable, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return ingest_jsonl(buf.str());
}

std::vector<RetrievalHit> retrieve(const EmbeddingVector& query, const StoreSnapshot& store,
                                   std::size_t k) {
  if (store.docs.empty()) throw Error(ErrorCode::kEmptyStore, "knowledge store is empty");
  if (k == 0) throw Error(ErrorCode::kInputRejected, "k must be at least 1");
  std::vector<RetrievalHit> hits;
  hits.reserve(store.docs.size());
  for (std::size_t i = 0; i < store.docs.size(); ++i) {
    double s = cosine(query, store.vectors[i]);
    hits.push_back({store.docs[i].doc_id, s, s});
  }
  auto better = [](const RetrievalHit& a, const RetrievalHit& b) {
    if (score_key(a.similarity) != score_key(b.similarity)) return a.similarity > b.similarity;
    return a.doc_id < b.doc_id;
  };
  std::size_t n = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n), hits.end(), better);
  hits.resize(n);
  return hits;
}

double lexical_overlap(std::string_view query, const KnowledgeDoc& doc) {
  std::set<std::string> content;
  for (auto& w : text::words(query)) {
    if (!text::is_stopword(w)) content.insert(w);
  }
  if (content.empty()) return 0.0;
  auto doc_words = text::words(doc.title + " " + doc.body);
  std::set<std::string> present(doc_words.begin(), doc_words.end());
  std::size_t hit = 0;
  for (const auto& w : content) hit += present.count(w);
  return static_cast<double>(hit) / static_cast<double>(content.size());
}

std::vector<RetrievalHit> rerank(std::string_view query, std::vector<RetrievalHit> hits,
                                 const StoreSnapshot& store, double alpha) {
  for (auto& h : hits) {
    const KnowledgeDoc* doc = store.find(h.doc_id);
    double lex = doc ? lexical_overlap(query, *doc) : 0.0;
    h.rerank_score = alpha * h.similarity + (1.0 - alpha) * lex;
  }
  std::stable_sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
    if (score_key(a.rerank_score) != score_key(b.rerank_score)) return a.rerank_score > b.rerank_score;
    return a.doc_id < b.doc_id;
  });
  return hits;
}

}  // namespace tellerflow
