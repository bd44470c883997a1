#include "onsetwarn/ingest.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "onsetwarn/csv.hpp"
#include "onsetwarn/error.hpp"

namespace onsetwarn {

namespace {

constexpr std::string_view kModule = "ingest";

int parse_label(std::string_view cell, int line_no, std::string_view column) {
  cell = csv::trim(cell);
  if (cell.empty()) return 0;
  const auto value = csv::parse_double(cell);
  if (value && (*value == 0.0 || *value == 1.0)) return static_cast<int>(*value);
  throw Error(ErrorCode::InvalidValue, kModule,
              "line " + std::to_string(line_no) + ": " + std::string(column) + " must be 0 or 1, got '" +
                  std::string(cell) + "'");
}

std::string format_optional(const std::optional<double>& value) {
  return value ? csv::format_number(*value) : std::string{};
}

void write_header(std::ostringstream& out) {
  for (std::size_t i = 0; i < kDatasetColumns.size(); ++i) {
    if (i > 0) out << ',';
    out << kDatasetColumns[i];
  }
  out << '\n';
}

}  // namespace

CleaningStats& CleaningStats::operator+=(const CleaningStats& other) noexcept {
  imputed_cells += other.imputed_cells;
  swapped_min_max += other.swapped_min_max;
  clamped_values += other.clamped_values;
  calendar_gaps += other.calendar_gaps;
  return *this;
}

std::vector<RawYear> parse_dataset(std::istream& input) {
  std::string line;
  if (!std::getline(input, line)) {
    throw Error(ErrorCode::MissingColumn, kModule, "empty input, header row required");
  }
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);

  const auto header = csv::split(csv::trim(line));
  std::array<int, kDatasetColumns.size()> index{};
  for (std::size_t c = 0; c < kDatasetColumns.size(); ++c) {
    const auto it = std::find_if(header.begin(), header.end(),
                                 [&](std::string_view h) { return csv::trim(h) == kDatasetColumns[c]; });
    if (it == header.end()) {
      throw Error(ErrorCode::MissingColumn, kModule, "required column '" + std::string(kDatasetColumns[c]) + "' absent");
    }
    index[c] = static_cast<int>(it - header.begin());
  }

  std::map<int, std::vector<RawDay>> by_year;
  std::set<int> seen;  // days since epoch
  int line_no = 1;
  while (std::getline(input, line)) {
    ++line_no;
    const std::string_view trimmed = csv::trim(line);
    if (trimmed.empty()) continue;
    const auto fields = csv::split(trimmed);
    const auto cell = [&](std::size_t c) -> std::string_view {
      const auto i = static_cast<std::size_t>(index[c]);
      return i < fields.size() ? csv::trim(fields[i]) : std::string_view{};
    };

    RawDay day;
    day.date = parse_iso_date(cell(0));
    const int serial = static_cast<int>(std::chrono::sys_days{day.date}.time_since_epoch().count());
    if (!seen.insert(serial).second) {
      throw Error(ErrorCode::DuplicateDate, kModule, "date " + format_iso_date(day.date) + " appears twice");
    }
    day.humidity_mean = csv::parse_double(cell(1));
    day.temp_mean = csv::parse_double(cell(2));
    day.temp_min = csv::parse_double(cell(3));
    day.temp_max = csv::parse_double(cell(4));
    day.rainfall = csv::parse_double(cell(5));
    day.label_downy = parse_label(cell(6), line_no, kDatasetColumns[6]);
    day.label_powdery = parse_label(cell(7), line_no, kDatasetColumns[7]);
    by_year[year_of(day.date)].push_back(day);
  }

  std::vector<RawYear> years;
  years.reserve(by_year.size());
  for (auto& [year, days] : by_year) {
    std::sort(days.begin(), days.end(), [](const RawDay& a, const RawDay& b) {
      return std::chrono::sys_days{a.date} < std::chrono::sys_days{b.date};
    });
    years.push_back(RawYear{year, std::move(days)});
  }
  return years;
}

std::vector<RawYear> parse_dataset(std::string_view csv_text) {
  std::istringstream in{std::string(csv_text)};
  return parse_dataset(in);
}

std::string serialize_dataset(std::span<const RawYear> years) {
  std::ostringstream out;
  write_header(out);
  for (const auto& year : years) {
    for (const auto& d : year.days) {
      out << format_iso_date(d.date) << ',' << format_optional(d.humidity_mean) << ','
          << format_optional(d.temp_mean) << ',' << format_optional(d.temp_min) << ','
          << format_optional(d.temp_max) << ',' << format_optional(d.rainfall) << ',' << d.label_downy << ','
          << d.label_powdery << '\n';
    }
  }
  return out.str();
}

std::string serialize_dataset(std::span<const YearSeries> years) {
  std::vector<RawYear> raw;
  raw.reserve(years.size());
  for (const auto& y : years) raw.push_back(to_raw(y));
  return serialize_dataset(std::span<const RawYear>(raw));
}

std::vector<double> impute_causal(std::span<const std::optional<double>> values) {
  std::vector<double> out(values.size(), 0.0);
  const auto first = std::find_if(values.begin(), values.end(), [](const auto& v) { return v.has_value(); });
  if (first == values.end()) return out;
  double last = **first;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i]) last = *values[i];
    out[i] = last;
  }
  return out;
}

YearSeries clean_year(const RawYear& raw, CleaningStats* stats) {
  CleaningStats local;
  const std::size_t n = raw.days.size();

  const auto column = [&](std::optional<double> RawDay::*field) {
    std::vector<std::optional<double>> values(n);
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = raw.days[i].*field;
      if (!values[i]) ++local.imputed_cells;
    }
    return impute_causal(values);
  };
  const auto humidity = column(&RawDay::humidity_mean);
  const auto temp_mean = column(&RawDay::temp_mean);
  const auto temp_min = column(&RawDay::temp_min);
  const auto temp_max = column(&RawDay::temp_max);
  const auto rainfall = column(&RawDay::rainfall);

  YearSeries series;
  series.year = raw.year;
  series.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    DailyRecord r;
    r.date = raw.days[i].date;
    r.humidity_mean = humidity[i];
    r.temp_mean = temp_mean[i];
    r.temp_min = temp_min[i];
    r.temp_max = temp_max[i];
    r.rainfall = rainfall[i];
    r.label_downy = raw.days[i].label_downy;
    r.label_powdery = raw.days[i].label_powdery;

    if (r.temp_min > r.temp_max) {
      std::swap(r.temp_min, r.temp_max);
      ++local.swapped_min_max;
    }
    const double mean = std::clamp(r.temp_mean, r.temp_min, r.temp_max);
    const double hum = std::clamp(r.humidity_mean, 0.0, 100.0);
    const double rain = std::max(r.rainfall, 0.0);
    local.clamped_values += (mean != r.temp_mean) + (hum != r.humidity_mean) + (rain != r.rainfall);
    r.temp_mean = mean;
    r.humidity_mean = hum;
    r.rainfall = rain;

    if (i > 0 && days_between(raw.days[i - 1].date, r.date) > 1) ++local.calendar_gaps;
    series.records.push_back(r);
  }
  if (stats) *stats += local;
  return series;
}

std::vector<YearSeries> clean_years(std::span<const RawYear> raw, CleaningStats* stats) {
  std::vector<YearSeries> out;
  out.reserve(raw.size());
  for (const auto& y : raw) out.push_back(clean_year(y, stats));
  return out;
}

RawYear to_raw(const YearSeries& series) {
  RawYear raw;
  raw.year = series.year;
  raw.days.reserve(series.size());
  for (const auto& r : series.records) {
    raw.days.push_back(RawDay{r.date, r.humidity_mean, r.temp_mean, r.temp_min, r.temp_max, r.rainfall,
                              r.label_downy, r.label_powdery});
  }
  return raw;
}

const YearSeries* find_year(std::span<const YearSeries> series, int year) noexcept {
  const auto it = std::find_if(series.begin(), series.end(), [&](const YearSeries& s) { return s.year == year; });
  return it == series.end() ? nullptr : &*it;
}

ChronoSplit make_split(std::span<const YearSeries> series, std::span<const int> train_years, int val_year,
                       int test_year) {
  if (train_years.empty()) {
    throw Error(ErrorCode::NonChronologicalSplit, kModule, "at least one training year is required");
  }
  const int max_train = *std::max_element(train_years.begin(), train_years.end());
  if (val_year <= max_train || test_year <= val_year) {
    throw Error(ErrorCode::NonChronologicalSplit, kModule,
                "need max(train)=" + std::to_string(max_train) + " < validation=" + std::to_string(val_year) +
                    " < test=" + std::to_string(test_year));
  }
  const auto require = [&](int year) -> const YearSeries& {
    const YearSeries* found = find_year(series, year);
    if (!found) throw Error(ErrorCode::MissingYear, kModule, "year " + std::to_string(year) + " not in data");
    return *found;
  };

  ChronoSplit split;
  std::vector<int> sorted(train_years.begin(), train_years.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (int y : sorted) split.train.push_back(require(y));
  split.validation = require(val_year);
  split.test = require(test_year);
  return split;
}

}  // namespace onsetwarn
