#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "onsetwarn/types.hpp"

namespace onsetwarn {

/// Column names of the daily input CSV, in canonical output order.
inline constexpr std::array<std::string_view, 8> kDatasetColumns = {
    "date", "humidity_mean", "temp_mean", "temp_min", "temp_max", "rainfall", "label_downy", "label_powdery"};

/// One parsed row before imputation. Empty or non-numeric measurement cells
/// are std::nullopt.
struct RawDay {
  Date date;
  std::optional<double> humidity_mean;
  std::optional<double> temp_mean;
  std::optional<double> temp_min;
  std::optional<double> temp_max;
  std::optional<double> rainfall;
  int label_downy = 0;
  int label_powdery = 0;
};

struct RawYear {
  int year = 0;
  std::vector<RawDay> days;
};

struct DailyRecord {
  Date date;
  double humidity_mean = 0.0;
  double temp_mean = 0.0;
  double temp_min = 0.0;
  double temp_max = 0.0;
  double rainfall = 0.0;
  int label_downy = 0;
  int label_powdery = 0;
};

/// Records of one calendar year, strictly ascending by date. Calendar gaps are
/// kept as gaps.
struct YearSeries {
  int year = 0;
  std::vector<DailyRecord> records;

  std::size_t size() const noexcept { return records.size(); }
};

struct ChronoSplit {
  std::vector<YearSeries> train;
  YearSeries validation;
  YearSeries test;
};

/// Counters for the repairs made while cleaning a year.
struct CleaningStats {
  int imputed_cells = 0;
  int swapped_min_max = 0;
  int clamped_values = 0;
  int calendar_gaps = 0;

  CleaningStats& operator+=(const CleaningStats& other) noexcept;
};

std::vector<RawYear> parse_dataset(std::istream& csv);
std::vector<RawYear> parse_dataset(std::string_view csv_text);

std::string serialize_dataset(std::span<const RawYear> years);
std::string serialize_dataset(std::span<const YearSeries> years);

/// Causal fill: forward-fill, then leading gaps take the first observed value,
/// and a series with no observation at all becomes zeros.
std::vector<double> impute_causal(std::span<const std::optional<double>> values);

/// Imputes every measurement column of one year and repairs physical
/// invariants (min/max swap, mean clamped into [min, max], humidity into
/// [0, 100], rainfall >= 0).
YearSeries clean_year(const RawYear& raw, CleaningStats* stats = nullptr);
std::vector<YearSeries> clean_years(std::span<const RawYear> raw, CleaningStats* stats = nullptr);

/// Strips missing-value flags; used when a complete series must go back
/// through the CSV layer.
RawYear to_raw(const YearSeries& series);

ChronoSplit make_split(std::span<const YearSeries> series, std::span<const int> train_years, int val_year,
                       int test_year);

const YearSeries* find_year(std::span<const YearSeries> series, int year) noexcept;

}  // namespace onsetwarn
