#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tellerflow::text {

// ASCII case folding; bytes >= 0x80 pass through untouched.
std::string to_lower(std::string_view s);

// Lower-cases, maps every whitespace run to one space, trims both ends.
std::string normalize(std::string_view s);

std::string trim(std::string_view s);

// Splits lower-cased text into alphanumeric word tokens. Apostrophes inside
// words are dropped ("what's" -> "whats").
std::vector<std::string> words(std::string_view s);

bool contains(std::string_view haystack, std::string_view needle);

// True when `phrase` occurs in `normalized` on word boundaries. Both sides
// are expected to be normalized already.
bool contains_phrase(std::string_view normalized, std::string_view phrase);

bool is_stopword(std::string_view word);

// Hex-encoded SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace tellerflow::text
