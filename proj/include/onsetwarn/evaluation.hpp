#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "onsetwarn/labeling.hpp"
#include "onsetwarn/types.hpp"

namespace onsetwarn {

enum class AlertClass { True, NearMiss, StrictFalse };

std::string_view to_string(AlertClass c) noexcept;

struct EvaluationConfig {
  int h_min = 3;
  int h_max = 7;
  int episode_gap = 1;      // alerts at most this many days apart share an episode
  int near_miss_slack = 2;  // max distance (days) from a valid window for a near miss
  std::vector<double> threshold_grid;  // empty = default grid
};

/// Identity of a scored sample: which day it predicts from and its label.
struct SampleKey {
  Date prediction_date;
  int year = 0;
  int label = 0;
};

std::vector<SampleKey> sample_keys(std::span<const WindowSample> samples);

struct ConfusionMetrics {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int tn = 0;
};

/// Mann-Whitney AUROC with midranks for ties. Throws SingleClass.
double auroc(std::span<const double> scores, std::span<const int> labels);

/// Alert iff score >= threshold. Undefined ratios are 0.
ConfusionMetrics classification_metrics(std::span<const double> scores, std::span<const int> labels,
                                        double threshold);

/// Grid threshold with the highest F1; ties go to the smallest threshold.
double select_threshold(std::span<const double> scores, std::span<const int> labels, std::span<const double> grid);

struct EventOutcome {
  Date event_date;
  bool detected = false;
  std::optional<int> lead_days;  // tau minus the earliest valid alert
  bool undetectable = false;     // valid window lies before the first scored day
};

struct EventMatch {
  std::vector<EventOutcome> events;
  int detected = 0;
  std::optional<double> event_recall;
  std::optional<double> mean_lead_days;  // over detected events only
};

/// An event at tau is detected by any alert t with tau - t in [h_min, h_max].
EventMatch match_events(std::span<const Date> alerts, std::span<const Date> events, int h_min, int h_max);

/// True inside some event's window [tau - h_max, tau - h_min]; near miss when
/// within `slack` days of such a window; strict false otherwise.
std::vector<AlertClass> classify_alerts(std::span<const Date> alerts, std::span<const Date> events, int h_min,
                                        int h_max, int slack);

struct AlertEpisode {
  Date start;
  Date end;
  std::vector<Date> members;
  AlertClass classification = AlertClass::StrictFalse;
};

/// Greedy left-to-right grouping of ascending alerts; an episode takes the
/// best class among its members.
std::vector<AlertEpisode> group_episodes(std::span<const Date> alerts, std::span<const AlertClass> classes,
                                         int episode_gap);

struct AlertCounts {
  int alerts = 0;
  int false_alerts = 0;
  int near_miss_alerts = 0;
  int strict_false_alerts = 0;
  int episodes = 0;
  int near_miss_episodes = 0;
  int strict_false_episodes = 0;
};

/// (alerts - false_alerts) / alerts, none without alerts.
std::optional<double> alert_precision(const AlertCounts& counts) noexcept;
/// (episodes - near-miss - strict-false episodes) / episodes, none without episodes.
std::optional<double> episode_precision(const AlertCounts& counts) noexcept;

struct AlertRow {
  Date date;
  double score = 0.0;
  AlertClass classification = AlertClass::StrictFalse;
  int episode_id = 0;
};

struct EventReport {
  std::vector<EventOutcome> events;
  std::optional<double> event_recall;
  std::optional<double> mean_lead_days;
  std::optional<double> alert_precision;
  std::optional<double> episode_precision;
  AlertCounts counts;
  std::vector<AlertRow> alerts;
  std::vector<AlertEpisode> episodes;
};

struct StandardMetrics {
  double threshold = 0.5;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::optional<double> auroc;  // none when one class is absent
};

struct EvaluationResult {
  EventReport report;
  StandardMetrics standard;
};

/// Thresholds the scores of one year into alerts and runs the full
/// early-warning protocol plus the sample-level metrics.
EvaluationResult build_report(std::span<const double> scores, std::span<const SampleKey> samples,
                              std::span<const Date> events, double threshold, const EvaluationConfig& config);

}  // namespace onsetwarn
