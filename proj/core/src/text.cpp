#include "tellerflow/text.h"

#include <openssl/sha.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

namespace tellerflow::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_word_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) != 0 || u >= 0x80;
}

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string normalize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    auto u = static_cast<unsigned char>(c);
    out.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : c);
  }
  return out;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == '\'') continue;
    if (is_word_char(c)) {
      auto u = static_cast<unsigned char>(c);
      cur.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : c);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool contains(std::string_view haystack, std::string_view needle) {
  return haystack.find(needle) != std::string_view::npos;
}

bool contains_phrase(std::string_view normalized, std::string_view phrase) {
  if (phrase.empty()) return false;
  std::size_t pos = 0;
  while ((pos = normalized.find(phrase, pos)) != std::string_view::npos) {
    bool left = pos == 0 || !is_word_char(normalized[pos - 1]);
    std::size_t end = pos + phrase.size();
    bool right = end >= normalized.size() || !is_word_char(normalized[end]) ||
                 !is_word_char(phrase.back());
    if (left && right) return true;
    ++pos;
  }
  return false;
}

bool is_stopword(std::string_view word) {
  static const std::set<std::string, std::less<>> kStop = {
      "a",    "an",   "the",  "is",   "are",  "was",   "were", "be",   "to",   "of",
      "and",  "or",   "in",   "on",   "at",   "for",   "with", "by",   "it",   "this",
      "that", "i",    "you",  "my",   "me",   "we",    "our",  "your", "do",   "does",
      "did",  "can",  "could", "how", "what", "whats", "when", "where", "which", "who",
      "why",  "will", "would", "should", "there", "their", "them", "they", "its", "if",
      "so",   "as",   "from", "about", "any", "much", "many", "am",  "have", "has",
      "please", "tell", "know", "want", "need", "get", "like", "im", "s"};
  return kStop.count(word) > 0;
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
  SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest.data());
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(digest.size() * 2);
  for (unsigned char b : digest) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

}  // namespace tellerflow::text
