#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace tellerflow {

// Ringgit amount held as integer sen. All threshold and ledger arithmetic is
// done on minor units; decimal rendering happens only at the boundaries.
class Money {
 public:
  constexpr Money() = default;
  static constexpr Money from_minor(std::int64_t minor) { return Money(minor); }
  static constexpr Money from_major(std::int64_t major) { return Money(major * 100); }

  // Accepts "RM1000", "RM 1,000.00", "1000.5", "500". At most two fractional
  // digits; grouping commas must be well formed.
  static std::optional<Money> parse(std::string_view text);

  // Converts a JSON-ish decimal (e.g. 500.0 from a parser) to sen, rounding
  // to the nearest minor unit.
  static Money from_decimal(double value);

  constexpr std::int64_t minor() const { return minor_; }

  // "1000.00" style, no currency prefix.
  std::string to_decimal_string() const;
  // "RM1,000.00" style for user-facing text.
  std::string to_display_string() const;

  constexpr auto operator<=>(const Money&) const = default;
  constexpr Money operator+(Money other) const { return Money(minor_ + other.minor_); }
  constexpr Money operator-(Money other) const { return Money(minor_ - other.minor_); }
  Money& operator+=(Money other) {
    minor_ += other.minor_;
    return *this;
  }
  Money& operator-=(Money other) {
    minor_ -= other.minor_;
    return *this;
  }

 private:
  constexpr explicit Money(std::int64_t minor) : minor_(minor) {}
  std::int64_t minor_ = 0;
};

}  // namespace tellerflow
