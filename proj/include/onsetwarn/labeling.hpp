#pragma once

#include <span>
#include <string>
#include <vector>

#include "onsetwarn/features.hpp"
#include "onsetwarn/ingest.hpp"
#include "onsetwarn/types.hpp"

namespace onsetwarn {

struct LabelConfig {
  int gap = 5;          // minimum disease-free days before a new onset
  int h_min = 3;        // horizon start, days after prediction day
  int h_max = 7;        // horizon end
  int window = 30;      // history length L
  bool count_year_opening_event = true;
};

/// Daily unified target m, onset indicator e and horizon label y, aligned with
/// the records of one year.
struct LabelSequences {
  std::vector<Date> dates;
  std::vector<int> m;
  std::vector<int> e;
  std::vector<int> y;
};

struct EventList {
  int year = 0;
  std::vector<Date> events;  // ascending onset dates
};

struct YearLabels {
  LabelSequences sequences;
  EventList events;
};

struct WindowSample {
  Date prediction_date;
  int year = 0;
  int label = 0;
  MatrixXd window;  // L x d, oldest row first
};

/// m_t = downy_t OR powdery_t. Throws LengthMismatch.
std::vector<int> merge_targets(std::span<const int> downy, std::span<const int> powdery);

/// Onset indicator over consecutive days. A positive day opens an event when
/// the zero run right before it is at least `gap` long; the year's first
/// positive run counts as an event when `count_year_opening` is set.
std::vector<int> detect_onsets(std::span<const int> m, int gap = 5, bool count_year_opening = true);

/// y_t = 1 iff e_tau = 1 for some tau in [t + h_min, t + h_max] inside the
/// sequence. Near the end only the in-range part of the horizon is scanned.
std::vector<int> horizon_labels(std::span<const int> e, int h_min = 3, int h_max = 7);

/// Labels one cleaned year. Calendar gaps are expanded to disease-free days
/// before onset detection so that offsets are measured in calendar days.
YearLabels label_year(const YearSeries& series, const LabelConfig& config);

/// Which records qualify as prediction days: disease-free today, a full
/// gap-free history of `window` days inside the year, and the whole horizon
/// inside the year's observed span.
std::vector<bool> retention_mask(const LabelSequences& sequences, const LabelConfig& config);

/// One sample per retained record. `features` must be aligned with
/// `sequences` (same dates, usually normalized).
std::vector<WindowSample> build_windows(const YearFeatures& features, const LabelSequences& sequences,
                                        const LabelConfig& config);

/// Row-major concatenation, oldest day first; length L*d.
VectorXd flatten_window(const MatrixXd& window);
MatrixXd unflatten_window(const Eigen::Ref<const VectorXd>& flat, Eigen::Index length, Eigen::Index dim);

/// Stacks flattened windows into an n x (L*d) design matrix.
MatrixXd flatten_samples(std::span<const WindowSample> samples);

/// CSV `date,m,e,y,retained`, one row per record of every year.
std::string export_labels_csv(std::span<const YearLabels> years, const LabelConfig& config);

}  // namespace onsetwarn
