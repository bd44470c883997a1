#include <random>

#include "doctest.h"
#include "onsetwarn/error.hpp"
#include "onsetwarn/features.hpp"
#include "onsetwarn/labeling.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace onsetwarn;

namespace {

std::vector<int> bits(unsigned mask, int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = (mask >> i) & 1U;
  return v;
}

}  // namespace

TEST_SUITE("labeling") {
  TEST_CASE("merge_targets examples") {
    CHECK(merge_targets(std::vector<int>{0, 1, 0}, std::vector<int>{0, 0, 1}) == std::vector<int>{0, 1, 1});
    CHECK(merge_targets(std::vector<int>{0, 0}, std::vector<int>{0, 0}) == std::vector<int>{0, 0});
    CHECK(merge_targets(std::vector<int>{1}, std::vector<int>{1}) == std::vector<int>{1});
    CHECK_THROWS_AS(merge_targets(std::vector<int>{1}, std::vector<int>{1, 0}), Error);
  }

  TEST_CASE("detect_onsets examples") {
    CHECK(detect_onsets(std::vector<int>{1, 1, 0, 0, 0, 1, 1}, 5) == std::vector<int>{1, 0, 0, 0, 0, 0, 0});
    CHECK(detect_onsets(std::vector<int>{1, 0, 0, 0, 0, 0, 1}, 5) == std::vector<int>{1, 0, 0, 0, 0, 0, 1});
    CHECK(detect_onsets(std::vector<int>(9, 0), 5) == std::vector<int>(9, 0));
    CHECK(detect_onsets(std::vector<int>{0, 0, 1, 1}, 5, false) == std::vector<int>{0, 0, 0, 0});
  }

  TEST_CASE("detect_onsets matches the brute-force scanner on every sequence up to length 12") {
    for (const int gap : {1, 3, 5}) {
      for (const bool opening : {true, false}) {
        for (int n = 1; n <= 12; ++n) {
          for (unsigned mask = 0; mask < (1U << n); ++mask) {
            const auto m = bits(mask, n);
            REQUIRE(detect_onsets(m, gap, opening) == oracle::onsets(m, gap, opening));
          }
        }
      }
    }
  }

  TEST_CASE("onsets are separated by more than the gap") {
    std::mt19937_64 rng(8);
    std::bernoulli_distribution b(0.3);
    for (int trial = 0; trial < 300; ++trial) {
      std::vector<int> m(80);
      for (auto& v : m) v = b(rng);
      const auto e = detect_onsets(m, 5);
      int last = -100;
      for (int t = 0; t < 80; ++t) {
        if (!e[static_cast<std::size_t>(t)]) continue;
        CHECK(m[static_cast<std::size_t>(t)] == 1);
        if (last >= 0) CHECK(t - last >= 6);
        last = t;
      }
    }
  }

  TEST_CASE("horizon_labels examples") {
    std::vector<int> e(10, 0);
    e[5] = 1;
    CHECK(horizon_labels(e) == std::vector<int>{1, 1, 1, 0, 0, 0, 0, 0, 0, 0});
    CHECK(horizon_labels(std::vector<int>(6, 0)) == std::vector<int>(6, 0));
    std::vector<int> near(4, 0);
    near[2] = 1;
    CHECK(horizon_labels(near)[0] == 0);
  }

  TEST_CASE("horizon_labels matches the double loop on random sequences") {
    std::mt19937_64 rng(21);
    std::bernoulli_distribution b(0.15);
    std::uniform_int_distribution<int> len(1, 50);
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<int> e(static_cast<std::size_t>(len(rng)));
      for (auto& v : e) v = b(rng);
      REQUIRE(horizon_labels(e, 3, 7) == oracle::horizon(e, 3, 7));
      REQUIRE(horizon_labels(e, 1, 2) == oracle::horizon(e, 1, 2));
    }
  }

  TEST_CASE("a disease-free 40-day year yields four negative windows") {
    const YearSeries s = fixture::year_with_labels(2020, {}, 40);
    const YearLabels labels = label_year(s, LabelConfig{});
    const auto windows = build_windows(build_features(s), labels.sequences, LabelConfig{});
    REQUIRE(windows.size() == 4);
    CHECK(format_iso_date(windows.front().prediction_date) == "2020-01-30");
    CHECK(format_iso_date(windows.back().prediction_date) == "2020-02-02");
    for (const auto& w : windows) {
      CHECK(w.label == 0);
      CHECK(w.window.rows() == 30);
    }
  }

  TEST_CASE("window rows are the 30 days ending at the prediction date") {
    std::vector<int> labels(120, 0);
    for (int i = 60; i < 66; ++i) labels[static_cast<std::size_t>(i)] = 1;
    const YearSeries s = fixture::year_with_labels(2021, labels);
    const YearFeatures f = build_features(s);
    const YearLabels yl = label_year(s, LabelConfig{});
    const auto windows = build_windows(f, yl.sequences, LabelConfig{});
    for (const auto& w : windows) {
      const int end = days_between(s.records.front().date, w.prediction_date);
      CHECK(w.window == f.values.middleRows(end - 29, 30));
      CHECK(labels[static_cast<std::size_t>(end)] == 0);
      CHECK(w.label == (end >= 53 && end <= 57 ? 1 : 0));
    }
    // Days with m = 1 never become samples.
    for (const auto& w : windows) {
      const int day = days_between(s.records.front().date, w.prediction_date);
      CHECK_FALSE((day >= 60 && day < 66));
    }
  }

  TEST_CASE("windows never span a calendar gap") {
    YearSeries s = fixture::year_with_labels(2020, {}, 80);
    s.records.erase(s.records.begin() + 40);  // day 40 missing
    const YearLabels yl = label_year(s, LabelConfig{});
    const auto windows = build_windows(build_features(s), yl.sequences, LabelConfig{});
    for (const auto& w : windows) {
      const Date start = add_days(w.prediction_date, -29);
      const Date gap = add_days(s.records.front().date, 40);
      CHECK_FALSE((days_between(start, gap) >= 0 && days_between(gap, w.prediction_date) >= 0));
    }
    CHECK(windows.size() == (39 - 29 + 1) + (79 - 7 - 70 + 1));
  }

  TEST_CASE("windows and horizons stay inside one year across a multi-year fixture") {
    std::vector<YearSeries> years;
    for (int y = 2019; y <= 2021; ++y) {
      std::vector<int> labels(365, 0);
      for (int i = 100; i < 110; ++i) labels[static_cast<std::size_t>(i)] = 1;
      labels[2] = 1;
      years.push_back(fixture::year_with_labels(y, labels, 365));
    }
    for (const auto& ys : years) {
      const auto windows = build_windows(build_features(ys), label_year(ys, LabelConfig{}).sequences, LabelConfig{});
      for (const auto& w : windows) {
        CHECK(year_of(add_days(w.prediction_date, -29)) == ys.year);
        CHECK(year_of(add_days(w.prediction_date, 7)) == ys.year);
        CHECK(w.year == ys.year);
      }
    }
  }

  TEST_CASE("flatten and unflatten") {
    MatrixXd w(2, 2);
    w << 1, 2, 3, 4;
    VectorXd expected(4);
    expected << 1, 2, 3, 4;
    CHECK(flatten_window(w) == expected);
    CHECK(unflatten_window(flatten_window(w), 2, 2) == w);
    CHECK(flatten_window(w) == flatten_window(MatrixXd(w)));
    CHECK_THROWS_AS(unflatten_window(expected, 3, 2), Error);
  }

  TEST_CASE("label export has one row per record") {
    std::vector<int> labels(50, 0);
    labels[40] = 1;
    const YearSeries s = fixture::year_with_labels(2020, labels);
    const std::vector<YearLabels> yl{label_year(s, LabelConfig{})};
    const std::string csv = export_labels_csv(yl, LabelConfig{});
    CHECK(csv.substr(0, csv.find('\n')) == "date,m,e,y,retained");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 51);
    CHECK(csv.find("2020-02-05,0,0,1,1\n") != std::string::npos);
    CHECK(csv.find("2020-02-10,1,1,0,0\n") != std::string::npos);
  }
}
