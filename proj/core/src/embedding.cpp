#include <cmath>

#include "tellerflow/errors.h"
#include "tellerflow/faq_agent.h"
#include "tellerflow/text.h"

namespace tellerflow {

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t salt) {
  std::uint64_t h = 1469598103934665603ULL ^ salt;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

HashedNgramEmbedder::HashedNgramEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw Error(ErrorCode::kConfigError, "embedding dimension must be positive");
}

EmbeddingVector HashedNgramEmbedder::embed(std::string_view input) const {
  std::string normalized = text::normalize(input);
  if (normalized.empty()) throw Error(ErrorCode::kEmptyText, "cannot embed blank text");

  // Content words carry the signal; stopword trigrams make unrelated texts
  // look alike.
  auto all = text::words(normalized);
  std::vector<std::string> words;
  for (const auto& w : all) {
    if (!text::is_stopword(w)) words.push_back(w);
  }
  if (words.empty()) words = all;

  EmbeddingVector v(dimension_, 0.0);
  for (const auto& w : words) {
    std::string padded = " " + w + " ";
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      v[fnv1a(std::string_view(padded).substr(i, 3), 0) % dimension_] += 1.0;
    }
    v[fnv1a(w, 0x9e3779b97f4a7c15ULL) % dimension_] += 2.0;
  }
  if (words.empty()) {
    std::string padded = " " + normalized + " ";
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      v[fnv1a(std::string_view(padded).substr(i, 3), 0) % dimension_] += 1.0;
    }
  }

  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace tellerflow
