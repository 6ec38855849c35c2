#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace deeprank {

/// Calendar date stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;
  static constexpr Date from_days(std::int32_t days) { return Date(days); }
  static Date from_ymd(int year, unsigned month, unsigned day);

  /// Parses strict YYYY-MM-DD; nullopt on anything else, including impossible dates.
  static std::optional<Date> parse(std::string_view text);

  constexpr std::int32_t days() const { return days_; }
  int year() const;
  unsigned month() const;
  unsigned day() const;
  /// 0 = Sunday ... 6 = Saturday.
  unsigned weekday() const;
  bool is_weekend() const;

  /// year * 12 + (month - 1); equal for dates in the same calendar month.
  int month_key() const;

  std::string to_string() const;
  /// YYYY-MM
  std::string month_string() const;

  constexpr Date operator+(int n) const { return Date(days_ + n); }
  constexpr Date operator-(int n) const { return Date(days_ - n); }
  constexpr auto operator<=>(const Date&) const = default;

 private:
  constexpr explicit Date(std::int32_t days) : days_(days) {}
  std::int32_t days_ = 0;
};

/// Closed date interval [first, last].
struct DateRange {
  Date first;
  Date last;
  bool contains(Date d) const { return first <= d && d <= last; }
};

}  // namespace deeprank
