#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "doctest.h"
#include "onsetwarn/error.hpp"
#include "onsetwarn/ingest.hpp"
#include "fixtures.hpp"

using namespace onsetwarn;

namespace {

const std::string kHeader = "date,humidity_mean,temp_mean,temp_min,temp_max,rainfall,label_downy,label_powdery\n";

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::IoError;
}

}  // namespace

TEST_SUITE("ingest") {
  TEST_CASE("three well-formed rows give one year of three records") {
    const auto years = parse_dataset(kHeader +
                                     "2020-05-01,80,15,10,20,0,0,0\n"
                                     "2020-05-02,82,16,11,21,1.5,1,0\n"
                                     "2020-05-03,90,14,9,18,4,0,1\n");
    REQUIRE(years.size() == 1);
    CHECK(years[0].year == 2020);
    CHECK(years[0].days.size() == 3);
    CHECK(years[0].days[1].rainfall == 1.5);
    CHECK(years[0].days[1].label_downy == 1);
  }

  TEST_CASE("interleaved years are grouped and sorted") {
    const auto years = parse_dataset(kHeader +
                                     "2021-03-02,80,15,10,20,0,0,0\n"
                                     "2020-07-01,80,15,10,20,0,0,0\n"
                                     "2021-03-01,80,15,10,20,0,0,0\n"
                                     "2020-06-30,80,15,10,20,0,0,0\n");
    REQUIRE(years.size() == 2);
    CHECK(years[0].year == 2020);
    CHECK(format_iso_date(years[0].days[0].date) == "2020-06-30");
    CHECK(format_iso_date(years[1].days[0].date) == "2021-03-01");
    CHECK(format_iso_date(years[1].days[1].date) == "2021-03-02");
  }

  TEST_CASE("columns may come in any order") {
    const auto years = parse_dataset(
        "rainfall,date,label_powdery,temp_max,temp_min,temp_mean,humidity_mean,label_downy\n"
        "3,2020-01-05,1,9,2,5,70,0\n");
    REQUIRE(years.size() == 1);
    CHECK(*years[0].days[0].rainfall == 3.0);
    CHECK(*years[0].days[0].humidity_mean == 70.0);
    CHECK(years[0].days[0].label_powdery == 1);
  }

  TEST_CASE("empty humidity cell is missing, then filled from the prior day") {
    const auto years = parse_dataset(kHeader +
                                     "2020-05-01,81,15,10,20,0,0,0\n"
                                     "2020-05-02,,16,11,21,0,0,0\n");
    CHECK_FALSE(years[0].days[1].humidity_mean.has_value());
    const YearSeries clean = clean_year(years[0]);
    CHECK(clean.records[1].humidity_mean == 81.0);
  }

  TEST_CASE("non-numeric cells are missing") {
    const auto years = parse_dataset(kHeader + "2020-05-01,n/a,15,10,20,NaN,0,0\n");
    CHECK_FALSE(years[0].days[0].humidity_mean.has_value());
    CHECK_FALSE(years[0].days[0].rainfall.has_value());
  }

  TEST_CASE("header and row errors") {
    CHECK(code_of([] { parse_dataset("date,humidity_mean,temp_mean,temp_min,temp_max,label_downy,label_powdery\n"); }) ==
          ErrorCode::MissingColumn);
    CHECK(code_of([] { parse_dataset(""); }) == ErrorCode::MissingColumn);
    CHECK(code_of([] {
            parse_dataset(kHeader + "2020-05-01,80,15,10,20,0,0,0\n2020-05-01,80,15,10,20,0,0,0\n");
          }) == ErrorCode::DuplicateDate);
    CHECK(code_of([] { parse_dataset(kHeader + "2020-13-01,80,15,10,20,0,0,0\n"); }) == ErrorCode::UnparseableDate);
    CHECK(code_of([] { parse_dataset(kHeader + "05/01/2020,80,15,10,20,0,0,0\n"); }) == ErrorCode::UnparseableDate);
    CHECK(code_of([] { parse_dataset(kHeader + "2020-05-01,80,15,10,20,0,2,0\n"); }) == ErrorCode::InvalidValue);
  }

  TEST_CASE("impute_causal examples") {
    using O = std::optional<double>;
    CHECK(impute_causal(std::vector<O>{5.0, {}, {}, 7.0}) == std::vector<double>{5, 5, 5, 7});
    CHECK(impute_causal(std::vector<O>{{}, {}, 4.0}) == std::vector<double>{4, 4, 4});
    CHECK(impute_causal(std::vector<O>{{}, {}, {}}) == std::vector<double>{0, 0, 0});
    CHECK(impute_causal(std::vector<O>{}).empty());
  }

  TEST_CASE("impute_causal is idempotent and causal") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<std::optional<double>> v(20);
      // Keep at least one observation in the first half so leading fills do
      // not depend on the mutated suffix.
      v[3] = 1.0;
      for (auto& x : v) {
        if (u(rng) < 0.6) x = std::round(u(rng) * 100.0);
      }
      const auto once = impute_causal(v);
      std::vector<std::optional<double>> again(once.begin(), once.end());
      CHECK(impute_causal(again) == once);

      std::vector<std::optional<double>> mutated = v;
      const std::size_t cut = 10;
      for (std::size_t i = cut; i < mutated.size(); ++i) mutated[i] = u(rng) < 0.5 ? std::optional<double>{} : 999.0;
      const auto other = impute_causal(mutated);
      for (std::size_t i = 0; i < cut; ++i) CHECK(other[i] == once[i]);
    }
  }

  TEST_CASE("cleaning repairs physical invariants") {
    RawYear raw;
    raw.year = 2020;
    RawDay d;
    d.date = parse_iso_date("2020-03-01");
    d.humidity_mean = 104.0;
    d.temp_mean = 30.0;
    d.temp_min = 20.0;
    d.temp_max = 10.0;
    d.rainfall = -2.0;
    raw.days.push_back(d);
    CleaningStats stats;
    const YearSeries s = clean_year(raw, &stats);
    const auto& r = s.records[0];
    CHECK(r.temp_min == 10.0);
    CHECK(r.temp_max == 20.0);
    CHECK(r.temp_min <= r.temp_mean);
    CHECK(r.temp_mean <= r.temp_max);
    CHECK(r.humidity_mean == 100.0);
    CHECK(r.rainfall == 0.0);
    CHECK(stats.swapped_min_max == 1);
    CHECK(stats.clamped_values == 3);
  }

  TEST_CASE("calendar gaps are kept and counted") {
    const auto years = parse_dataset(kHeader +
                                     "2020-05-01,80,15,10,20,0,0,0\n"
                                     "2020-05-04,80,15,10,20,0,0,0\n");
    CleaningStats stats;
    const auto s = clean_year(years[0], &stats);
    CHECK(s.size() == 2);
    CHECK(stats.calendar_gaps == 1);
  }

  TEST_CASE("parse, serialize, parse round-trips complete data") {
    const YearSeries a = fixture::year_with_labels(2020, {0, 1, 1, 0, 0, 1}, 40);
    const YearSeries b = fixture::year_with_labels(2021, {1, 0}, 10);
    const std::vector<YearSeries> both{a, b};
    const std::string text = serialize_dataset(std::span<const YearSeries>(both));
    const auto parsed = parse_dataset(text);
    const auto cleaned = clean_years(parsed);
    CHECK(serialize_dataset(std::span<const YearSeries>(cleaned)) == text);
    CHECK(serialize_dataset(std::span<const RawYear>(parsed)) == text);
    REQUIRE(cleaned.size() == 2);
    CHECK(cleaned[0].records[5].temp_max == a.records[5].temp_max);
  }

  TEST_CASE("chronological split") {
    std::vector<YearSeries> s;
    for (int y = 2020; y <= 2023; ++y) s.push_back(fixture::year_with_labels(y, {0}, 5));
    const std::vector<int> train = {2020, 2021};
    const ChronoSplit split = make_split(s, train, 2022, 2023);
    CHECK(split.train.size() == 2);
    CHECK(split.validation.year == 2022);
    CHECK(split.test.year == 2023);

    const std::vector<int> late = {2021};
    CHECK(code_of([&] { make_split(s, late, 2020, 2023); }) == ErrorCode::NonChronologicalSplit);
    CHECK(code_of([&] { make_split(s, train, 2022, 2022); }) == ErrorCode::NonChronologicalSplit);
    CHECK(code_of([&] { make_split(s, train, 2022, 2024); }) == ErrorCode::MissingYear);
  }
}
