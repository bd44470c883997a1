#include "onsetwarn/report.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "onsetwarn/csv.hpp"
#include "onsetwarn/error.hpp"

namespace onsetwarn {

namespace {

constexpr std::string_view kModule = "evaluation";

using Grid = std::vector<std::vector<std::string>>;

std::string render_grid(const Grid& grid) {
  std::vector<std::size_t> width;
  for (const auto& row : grid) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t j = 0; j < row.size(); ++j) width[j] = std::max(width[j], row[j].size());
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::string line;
    for (std::size_t j = 0; j < grid[i].size(); ++j) {
      std::string cell = grid[i][j];
      if (j + 1 < grid[i].size()) cell.resize(width[j] + 2, ' ');
      line += cell;
    }
    out << line << '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (std::size_t j = 0; j < width.size(); ++j) total += width[j] + (j + 1 < width.size() ? 2 : 0);
      out << std::string(total, '-') << '\n';
    }
  }
  return out.str();
}

std::string shorten(const std::string& cell, int digits) {
  const auto v = csv::parse_double(cell);
  return v ? csv::format_fixed(*v, digits) : cell;
}

std::string svg_escape(std::string_view text) {
  std::string out;
  for (const char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string_view episode_colour(AlertClass c) {
  switch (c) {
    case AlertClass::True: return "#4caf50";
    case AlertClass::NearMiss: return "#ff9800";
    case AlertClass::StrictFalse: return "#9e9e9e";
  }
  return "#9e9e9e";
}

}  // namespace

std::size_t CsvTable::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error(ErrorCode::FormatError, kModule, "missing column " + std::string(name));
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv_table(std::string_view text) {
  CsvTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    const auto trimmed = csv::trim(line);
    if (trimmed.empty()) continue;
    std::vector<std::string> cells;
    for (const auto c : csv::split(trimmed)) cells.emplace_back(csv::trim(c));
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != table.header.size()) {
        throw Error(ErrorCode::FormatError, kModule, "row has " + std::to_string(cells.size()) + " cells, header has " +
                                                         std::to_string(table.header.size()));
      }
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

std::string render_report(const CsvTable& metrics, const CsvTable& events) {
  const std::size_t m_model = metrics.column("model");
  const std::size_t m_split = metrics.column("split");
  std::vector<const std::vector<std::string>*> test_rows;
  for (const auto& r : metrics.rows) {
    if (r[m_split] == "test") test_rows.push_back(&r);
  }
  const auto table = [&](std::vector<std::pair<std::string, std::string>> columns, int digits) {
    Grid grid{{"Model"}};
    for (const auto& [title, key] : columns) grid[0].push_back(title);
    for (const auto* r : test_rows) {
      std::vector<std::string> row{(*r)[m_model]};
      for (const auto& [title, key] : columns) row.push_back(shorten((*r)[metrics.column(key)], digits));
      grid.push_back(std::move(row));
    }
    return render_grid(grid);
  };

  std::ostringstream out;
  out << "Classification metrics (test year, threshold selected on validation)\n\n"
      << table({{"Threshold", "threshold"}, {"F1", "f1"}, {"Precision", "precision"}, {"Recall", "recall"},
                {"AUROC", "auroc"}},
               4)
      << "\nEarly-warning metrics (test year)\n\n"
      << table({{"Event recall", "event_recall"}, {"Mean lead (days)", "mean_lead_days"},
                {"Alert precision", "alert_precision"}, {"Episode precision", "episode_precision"}},
               4)
      << "\nAlert and episode counts (test year)\n\n"
      << table({{"Alerts", "alerts"}, {"False", "false_alerts"}, {"Near-miss", "near_miss_alerts"},
                {"Strict false", "strict_false_alerts"}, {"Episodes", "episodes"},
                {"Near-miss ep.", "near_miss_episodes"}, {"Strict false ep.", "strict_false_episodes"}},
               0);

  const std::size_t e_model = events.column("model");
  const std::size_t e_split = events.column("split");
  const std::size_t e_date = events.column("event_date");
  const std::size_t e_detected = events.column("detected");
  const std::size_t e_lead = events.column("lead_days");
  const std::size_t e_undetectable = events.column("undetectable");
  std::vector<std::string> models;
  std::map<std::string, std::map<std::string, std::string>> cells;  // date -> model -> text
  for (const auto& r : events.rows) {
    if (r[e_split] != "test") continue;
    if (std::find(models.begin(), models.end(), r[e_model]) == models.end()) models.push_back(r[e_model]);
    std::string text = r[e_detected] == "1" ? "lead " + r[e_lead] + " d" : "miss";
    if (r[e_undetectable] == "1") text = "n/a";
    cells[r[e_date]][r[e_model]] = text;
  }
  out << "\nPer-event outcomes (test year)\n\n";
  if (cells.empty()) {
    out << "no onset events\n";
  } else {
    Grid grid{{"Event date"}};
    grid[0].insert(grid[0].end(), models.begin(), models.end());
    for (const auto& [date, by_model] : cells) {
      std::vector<std::string> row{date};
      for (const auto& m : models) {
        const auto it = by_model.find(m);
        row.push_back(it == by_model.end() ? "-" : it->second);
      }
      grid.push_back(std::move(row));
    }
    out << render_grid(grid);
  }
  return out.str();
}

std::string render_timeline_svg(std::span<const TimelinePanel> panels) {
  constexpr double kWidth = 960.0;
  constexpr double kPanel = 170.0;
  constexpr double kLeft = 50.0;
  constexpr double kRight = 20.0;
  constexpr double kTop = 28.0;
  constexpr double kPlot = 110.0;

  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(2);
  const double height = kPanel * static_cast<double>(std::max<std::size_t>(panels.size(), 1));
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const auto& panel = panels[p];
    const double y0 = kPanel * static_cast<double>(p) + kTop;
    out << "<text x=\"" << kLeft << "\" y=\"" << y0 - 8 << "\" font-weight=\"bold\">" << svg_escape(panel.title)
        << "</text>\n";
    out << "<rect x=\"" << kLeft << "\" y=\"" << y0 << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
        << kPlot << "\" fill=\"none\" stroke=\"#444\"/>\n";
    if (panel.dates.empty()) continue;
    const Date first = panel.dates.front();
    const double span = std::max(1, days_between(first, panel.dates.back()));
    const auto x_of = [&](Date d) {
      const double frac = std::clamp(days_between(first, d) / span, 0.0, 1.0);
      return kLeft + frac * (kWidth - kLeft - kRight);
    };
    const auto y_of = [&](double s) { return y0 + (1.0 - std::clamp(s, 0.0, 1.0)) * kPlot; };

    for (const auto& e : panel.episodes) {
      const double x = x_of(e.start);
      const double w = std::max(1.5, x_of(e.end) - x);
      out << "<rect x=\"" << x << "\" y=\"" << y0 << "\" width=\"" << w << "\" height=\"" << kPlot << "\" fill=\""
          << episode_colour(e.classification) << "\" fill-opacity=\"0.3\"/>\n";
    }
    for (const auto& e : panel.events) {
      const double x = x_of(e);
      out << "<line x1=\"" << x << "\" y1=\"" << y0 << "\" x2=\"" << x << "\" y2=\"" << y0 + kPlot
          << "\" stroke=\"#d32f2f\" stroke-width=\"1.5\"/>\n";
    }
    out << "<polyline fill=\"none\" stroke=\"#1565c0\" stroke-width=\"1\" points=\"";
    for (std::size_t i = 0; i < panel.dates.size() && i < panel.scores.size(); ++i) {
      out << (i ? " " : "") << x_of(panel.dates[i]) << ',' << y_of(panel.scores[i]);
    }
    out << "\"/>\n";
    const double ty = y_of(panel.threshold);
    out << "<line x1=\"" << kLeft << "\" y1=\"" << ty << "\" x2=\"" << kWidth - kRight << "\" y2=\"" << ty
        << "\" stroke=\"#000\" stroke-dasharray=\"4 3\"/>\n";
    out << "<text x=\"" << kLeft - 4 << "\" y=\"" << ty + 4 << "\" text-anchor=\"end\">"
        << csv::format_fixed(panel.threshold, 2) << "</text>\n";
    out << "<text x=\"" << kLeft << "\" y=\"" << y0 + kPlot + 14 << "\">" << format_iso_date(first) << "</text>\n";
    out << "<text x=\"" << kWidth - kRight << "\" y=\"" << y0 + kPlot + 14 << "\" text-anchor=\"end\">"
        << format_iso_date(panel.dates.back()) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace onsetwarn
