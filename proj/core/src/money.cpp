#include "tellerflow/money.h"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "tellerflow/text.h"

namespace tellerflow {

std::optional<Money> Money::parse(std::string_view text) {
  std::string s = text::trim(text);
  if (s.size() >= 2 && (s[0] == 'R' || s[0] == 'r') && (s[1] == 'M' || s[1] == 'm')) {
    s = text::trim(std::string_view(s).substr(2));
  }
  if (s.empty()) return std::nullopt;

  std::string whole;
  std::string frac;
  std::size_t i = 0;
  // Integer part, optionally grouped as 1,000,000.
  std::size_t group_len = 0;
  bool grouped = false;
  for (; i < s.size() && s[i] != '.'; ++i) {
    char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      whole.push_back(c);
      ++group_len;
    } else if (c == ',') {
      if (whole.empty() || (grouped && group_len != 3) || (!grouped && group_len > 3)) {
        return std::nullopt;
      }
      grouped = true;
      group_len = 0;
    } else {
      return std::nullopt;
    }
  }
  if (whole.empty() || (grouped && group_len != 3)) return std::nullopt;
  if (i < s.size()) {
    ++i;  // '.'
    for (; i < s.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
      frac.push_back(s[i]);
    }
    if (frac.empty() || frac.size() > 2) return std::nullopt;
  }
  if (whole.size() > 15) return std::nullopt;
  while (frac.size() < 2) frac.push_back('0');
  std::int64_t major = std::strtoll(whole.c_str(), nullptr, 10);
  std::int64_t minor = std::strtoll(frac.c_str(), nullptr, 10);
  return Money(major * 100 + minor);
}

Money Money::from_decimal(double value) { return Money(std::llround(value * 100.0)); }

std::string Money::to_decimal_string() const {
  std::int64_t v = minor_;
  bool negative = v < 0;
  if (negative) v = -v;
  std::string frac = std::to_string(v % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return (negative ? "-" : "") + std::to_string(v / 100) + "." + frac;
}

std::string Money::to_display_string() const {
  std::int64_t v = minor_ < 0 ? -minor_ : minor_;
  std::string whole = std::to_string(v / 100);
  std::string grouped;
  int count = 0;
  for (auto it = whole.rbegin(); it != whole.rend(); ++it) {
    if (count && count % 3 == 0) grouped.insert(grouped.begin(), ',');
    grouped.insert(grouped.begin(), *it);
    ++count;
  }
  std::string frac = std::to_string(v % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return std::string(minor_ < 0 ? "-" : "") + "RM" + grouped + "." + frac;
}

}  // namespace tellerflow
