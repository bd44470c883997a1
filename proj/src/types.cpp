#include "onsetwarn/types.hpp"

#include <charconv>
#include <cstdio>

#include "onsetwarn/error.hpp"

namespace onsetwarn {

namespace {

bool parse_fixed(std::string_view text, int& out) {
  for (char c : text) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

Date parse_iso_date(std::string_view text) {
  int y = 0;
  int m = 0;
  int d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !parse_fixed(text.substr(0, 4), y) ||
      !parse_fixed(text.substr(5, 2), m) || !parse_fixed(text.substr(8, 2), d)) {
    throw Error(ErrorCode::UnparseableDate, "ingest", "cannot parse date '" + std::string(text) + "'");
  }
  Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
            std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) {
    throw Error(ErrorCode::UnparseableDate, "ingest", "no such calendar date '" + std::string(text) + "'");
  }
  return date;
}

std::string format_iso_date(const Date& date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

int year_of(const Date& date) noexcept { return static_cast<int>(date.year()); }

int month_of(const Date& date) noexcept { return static_cast<int>(static_cast<unsigned>(date.month())); }

int day_of_year(const Date& date) noexcept {
  const Date jan1{date.year(), std::chrono::January, std::chrono::day{1}};
  return days_between(jan1, date) + 1;
}

int days_between(const Date& from, const Date& to) noexcept {
  return static_cast<int>((std::chrono::sys_days{to} - std::chrono::sys_days{from}).count());
}

Date add_days(const Date& date, int days) noexcept {
  return Date{std::chrono::sys_days{date} + std::chrono::days{days}};
}

Date last_day_of_year(int year) noexcept {
  return Date{std::chrono::year{year}, std::chrono::December, std::chrono::day{31}};
}

}  // namespace onsetwarn
