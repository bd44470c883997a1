#pragma once

#include <string>
#include <vector>

#include "onsetwarn/ingest.hpp"

namespace fixture {

// A complete year of smooth weather with the given daily unified labels.
inline onsetwarn::YearSeries year_with_labels(int year, const std::vector<int>& labels, int days = 0) {
  using namespace onsetwarn;
  YearSeries s;
  s.year = year;
  const Date jan1{std::chrono::year{year}, std::chrono::January, std::chrono::day{1}};
  const int n = days > 0 ? days : static_cast<int>(labels.size());
  for (int i = 0; i < n; ++i) {
    DailyRecord r;
    r.date = add_days(jan1, i);
    r.humidity_mean = 60.0 + (i * 7 % 40);
    r.temp_mean = 10.0 + (i % 13) * 0.5;
    r.temp_min = r.temp_mean - 4.0;
    r.temp_max = r.temp_mean + 5.0;
    r.rainfall = (i % 4 == 0) ? 2.5 + (i % 3) : 0.0;
    r.label_downy = i < static_cast<int>(labels.size()) ? labels[static_cast<std::size_t>(i)] : 0;
    s.records.push_back(r);
  }
  return s;
}

}  // namespace fixture
