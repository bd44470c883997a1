#include "onsetwarn/labeling.hpp"

#include <algorithm>
#include <sstream>

#include "onsetwarn/error.hpp"

namespace onsetwarn {

namespace {
constexpr std::string_view kModule = "labeling";
}

std::vector<int> merge_targets(std::span<const int> downy, std::span<const int> powdery) {
  if (downy.size() != powdery.size()) {
    throw Error(ErrorCode::LengthMismatch, kModule,
                "downy has " + std::to_string(downy.size()) + " days, powdery " + std::to_string(powdery.size()));
  }
  std::vector<int> m(downy.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = (downy[i] != 0 || powdery[i] != 0) ? 1 : 0;
  return m;
}

std::vector<int> detect_onsets(std::span<const int> m, int gap, bool count_year_opening) {
  std::vector<int> e(m.size(), 0);
  bool seen_positive = false;
  std::size_t zeros = 0;  // length of the zero run ending just before the current day
  for (std::size_t t = 0; t < m.size(); ++t) {
    if (m[t] == 0) {
      ++zeros;
      continue;
    }
    const bool run_start = t == 0 || m[t - 1] == 0;
    if (run_start) {
      if (!seen_positive) {
        e[t] = (count_year_opening || zeros >= static_cast<std::size_t>(gap)) ? 1 : 0;
      } else if (zeros >= static_cast<std::size_t>(gap)) {
        e[t] = 1;
      }
    }
    seen_positive = true;
    zeros = 0;
  }
  return e;
}

std::vector<int> horizon_labels(std::span<const int> e, int h_min, int h_max) {
  const auto n = static_cast<long>(e.size());
  std::vector<int> y(e.size(), 0);
  // Onset indices, then each one marks the prediction days it is visible from.
  for (long tau = 0; tau < n; ++tau) {
    if (e[static_cast<std::size_t>(tau)] == 0) continue;
    for (long t = std::max(0L, tau - h_max); t <= tau - h_min; ++t) y[static_cast<std::size_t>(t)] = 1;
  }
  return y;
}

YearLabels label_year(const YearSeries& series, const LabelConfig& config) {
  YearLabels out;
  out.events.year = series.year;
  auto& seq = out.sequences;
  const std::size_t n = series.size();
  if (n == 0) return out;

  const Date first = series.records.front().date;
  const auto span = static_cast<std::size_t>(days_between(first, series.records.back().date)) + 1;
  std::vector<int> dense_m(span, 0);
  std::vector<std::size_t> offset(n);
  seq.dates.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = series.records[i];
    offset[i] = static_cast<std::size_t>(days_between(first, r.date));
    dense_m[offset[i]] = (r.label_downy != 0 || r.label_powdery != 0) ? 1 : 0;
    seq.dates.push_back(r.date);
  }
  const auto dense_e = detect_onsets(dense_m, config.gap, config.count_year_opening_event);
  const auto dense_y = horizon_labels(dense_e, config.h_min, config.h_max);

  seq.m.resize(n);
  seq.e.resize(n);
  seq.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    seq.m[i] = dense_m[offset[i]];
    seq.e[i] = dense_e[offset[i]];
    seq.y[i] = dense_y[offset[i]];
    if (seq.e[i]) out.events.events.push_back(seq.dates[i]);
  }
  return out;
}

std::vector<bool> retention_mask(const LabelSequences& seq, const LabelConfig& config) {
  const std::size_t n = seq.dates.size();
  std::vector<bool> keep(n, false);
  if (n == 0) return keep;
  const auto length = static_cast<std::size_t>(config.window);
  const Date last = seq.dates.back();
  for (std::size_t i = 0; i < n; ++i) {
    if (seq.m[i] != 0) continue;
    if (i + 1 < length) continue;
    if (days_between(seq.dates[i + 1 - length], seq.dates[i]) != config.window - 1) continue;
    if (days_between(seq.dates[i], last) < config.h_max) continue;
    keep[i] = true;
  }
  return keep;
}

std::vector<WindowSample> build_windows(const YearFeatures& features, const LabelSequences& seq,
                                        const LabelConfig& config) {
  if (static_cast<std::size_t>(features.values.rows()) != seq.dates.size()) {
    throw Error(ErrorCode::LengthMismatch, kModule, "features and label sequences are not aligned");
  }
  const auto keep = retention_mask(seq, config);
  std::vector<WindowSample> samples;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (!keep[i]) continue;
    const auto start = static_cast<Eigen::Index>(i) + 1 - config.window;
    samples.push_back(WindowSample{seq.dates[i], features.year, seq.y[i],
                                   features.values.middleRows(start, config.window)});
  }
  return samples;
}

VectorXd flatten_window(const MatrixXd& window) {
  VectorXd flat(window.size());
  const Eigen::Index d = window.cols();
  for (Eigen::Index t = 0; t < window.rows(); ++t) flat.segment(t * d, d) = window.row(t).transpose();
  return flat;
}

MatrixXd unflatten_window(const Eigen::Ref<const VectorXd>& flat, Eigen::Index length, Eigen::Index dim) {
  if (flat.size() != length * dim) {
    throw Error(ErrorCode::ShapeMismatch, kModule, "flat vector length does not equal L*d");
  }
  MatrixXd window(length, dim);
  for (Eigen::Index t = 0; t < length; ++t) window.row(t) = flat.segment(t * dim, dim).transpose();
  return window;
}

MatrixXd flatten_samples(std::span<const WindowSample> samples) {
  if (samples.empty()) return {};
  const Eigen::Index width = samples.front().window.size();
  MatrixXd out(static_cast<Eigen::Index>(samples.size()), width);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].window.size() != width) {
      throw Error(ErrorCode::ShapeMismatch, kModule, "samples have differing window shapes");
    }
    out.row(static_cast<Eigen::Index>(i)) = flatten_window(samples[i].window).transpose();
  }
  return out;
}

std::string export_labels_csv(std::span<const YearLabels> years, const LabelConfig& config) {
  std::ostringstream out;
  out << "date,m,e,y,retained\n";
  for (const auto& year : years) {
    const auto& s = year.sequences;
    const auto keep = retention_mask(s, config);
    for (std::size_t i = 0; i < s.dates.size(); ++i) {
      out << format_iso_date(s.dates[i]) << ',' << s.m[i] << ',' << s.e[i] << ',' << s.y[i] << ','
          << (keep[i] ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

}  // namespace onsetwarn
