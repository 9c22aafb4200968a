#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace pyr {

// Calendar date stored as days since 1970-01-01 (can be negative).
// Arithmetic follows the Gregorian proleptic calendar.
class Date {
 public:
  Date() = default;
  explicit Date(std::int32_t days) : days_(days) {}

  static Date from_ymd(int y, unsigned m, unsigned d) {
    return Date(days_from_civil(y, m, d));
  }

  // Parses "YYYY-MM-DD". Returns nullopt on any malformation or an
  // out-of-range month/day.
  static std::optional<Date> parse(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0, d = 0;
    auto num = [](std::string_view t, auto& out) {
      auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
      return ec == std::errc() && p == t.data() + t.size();
    };
    if (!num(s.substr(0, 4), y) || !num(s.substr(5, 2), m) ||
        !num(s.substr(8, 2), d))
      return std::nullopt;
    if (m < 1 || m > 12 || d < 1 || d > last_day_of_month(y, m))
      return std::nullopt;
    return from_ymd(y, m, d);
  }

  std::int32_t days() const { return days_; }

  int year() const {
    auto [y, m, d] = civil_from_days(days_);
    (void)m;
    (void)d;
    return y;
  }

  std::string to_string() const {
    auto [y, m, d] = civil_from_days(days_);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, d);
    return buf;
  }

  // December 31 of year t, the within-year reference point for activity.
  static Date end_of_year(int t) { return from_ymd(t, 12, 31); }

  friend auto operator<=>(Date, Date) = default;

 private:
  std::int32_t days_ = 0;

  // Howard Hinnant's civil-days algorithms.
  static std::int32_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int32_t>(doe) - 719468;
  }

  static std::tuple<int, unsigned, unsigned> civil_from_days(std::int32_t z) {
    z += 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int y = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return {y + (m <= 2), m, d};
  }

  static bool is_leap(int y) {
    return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0);
  }

  static unsigned last_day_of_month(int y, unsigned m) {
    constexpr unsigned a[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m != 2 || !is_leap(y) ? a[m - 1] : 29;
  }
};

// Inter-publication intervals and activity windows measure time in years
// as days / 365.
inline double days_to_years(std::int64_t days) { return days / 365.0; }

}  // namespace pyr
