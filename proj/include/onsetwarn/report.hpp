#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "onsetwarn/evaluation.hpp"

namespace onsetwarn {

/// A header plus string cells, as read back from the evaluation CSVs.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of `column`; throws FormatError when absent.
  std::size_t column(std::string_view name) const;
};

CsvTable parse_csv_table(std::string_view text);

/// Test-year tables of classification metrics, early-warning metrics and
/// alert/episode counts, then one row per event with the lead time or "miss"
/// for each model.
std::string render_report(const CsvTable& metrics, const CsvTable& events);

struct TimelineEpisode {
  Date start;
  Date end;
  AlertClass classification = AlertClass::StrictFalse;
};

struct TimelinePanel {
  std::string title;
  std::vector<Date> dates;
  std::vector<double> scores;
  double threshold = 0.5;
  std::vector<Date> events;
  std::vector<TimelineEpisode> episodes;
};

/// Static SVG: one stacked panel per model with the daily score curve, the
/// threshold line, onset markers and shaded alert episodes.
std::string render_timeline_svg(std::span<const TimelinePanel> panels);

}  // namespace onsetwarn
