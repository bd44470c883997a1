#include "onsetwarn/evaluation.hpp"

#include <algorithm>
#include <numeric>

#include "onsetwarn/error.hpp"
#include "onsetwarn/trainer.hpp"

namespace onsetwarn {

namespace {

constexpr std::string_view kModule = "evaluation";

void require_same_length(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorCode::LengthMismatch, kModule,
                "scores (" + std::to_string(a) + ") and labels (" + std::to_string(b) + ") differ in length");
  }
}

int window_distance(int alert_to_event, int h_min, int h_max) noexcept {
  // alert_to_event = tau - t; the window is tau - t in [h_min, h_max].
  if (alert_to_event > h_max) return alert_to_event - h_max;
  if (alert_to_event < h_min) return h_min - alert_to_event;
  return 0;
}

int rank_of(AlertClass c) noexcept {
  switch (c) {
    case AlertClass::True: return 0;
    case AlertClass::NearMiss: return 1;
    case AlertClass::StrictFalse: return 2;
  }
  return 2;
}

}  // namespace

std::string_view to_string(AlertClass c) noexcept {
  switch (c) {
    case AlertClass::True: return "true";
    case AlertClass::NearMiss: return "near_miss";
    case AlertClass::StrictFalse: return "strict_false";
  }
  return "strict_false";
}

std::vector<SampleKey> sample_keys(std::span<const WindowSample> samples) {
  std::vector<SampleKey> keys;
  keys.reserve(samples.size());
  for (const auto& s : samples) keys.push_back(SampleKey{s.prediction_date, s.year, s.label});
  return keys;
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  require_same_length(scores.size(), labels.size());
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double pos_rank_sum = 0.0;  // 1-based midranks
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) {
        pos_rank_sum += midrank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorCode::SingleClass, kModule, "AUROC needs both positive and negative samples");
  }
  const double p = static_cast<double>(positives);
  return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

ConfusionMetrics classification_metrics(std::span<const double> scores, std::span<const int> labels,
                                        double threshold) {
  require_same_length(scores.size(), labels.size());
  ConfusionMetrics m;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool alert = scores[i] >= threshold;
    if (labels[i]) {
      alert ? ++m.tp : ++m.fn;
    } else {
      alert ? ++m.fp : ++m.tn;
    }
  }
  if (m.tp + m.fp > 0) m.precision = static_cast<double>(m.tp) / (m.tp + m.fp);
  if (m.tp + m.fn > 0) m.recall = static_cast<double>(m.tp) / (m.tp + m.fn);
  if (m.tp > 0) m.f1 = 2.0 * m.tp / (2.0 * m.tp + m.fp + m.fn);
  return m;
}

double select_threshold(std::span<const double> scores, std::span<const int> labels, std::span<const double> grid) {
  if (grid.empty()) throw Error(ErrorCode::InvalidConfig, kModule, "threshold grid is empty");
  double best_threshold = grid.front();
  double best_f1 = -1.0;
  for (const double thr : grid) {
    const double f1 = classification_metrics(scores, labels, thr).f1;
    if (f1 > best_f1 || (f1 == best_f1 && thr < best_threshold)) {
      best_f1 = f1;
      best_threshold = thr;
    }
  }
  return best_threshold;
}

EventMatch match_events(std::span<const Date> alerts, std::span<const Date> events, int h_min, int h_max) {
  EventMatch match;
  double lead_sum = 0.0;
  for (const Date& tau : events) {
    EventOutcome out;
    out.event_date = tau;
    for (const Date& t : alerts) {  // ascending, so the first hit is the earliest
      const int lead = days_between(t, tau);
      if (lead >= h_min && lead <= h_max) {
        out.detected = true;
        out.lead_days = lead;
        break;
      }
    }
    if (out.detected) {
      ++match.detected;
      lead_sum += *out.lead_days;
    }
    match.events.push_back(out);
  }
  if (!events.empty()) match.event_recall = static_cast<double>(match.detected) / static_cast<double>(events.size());
  if (match.detected > 0) match.mean_lead_days = lead_sum / match.detected;
  return match;
}

std::vector<AlertClass> classify_alerts(std::span<const Date> alerts, std::span<const Date> events, int h_min,
                                        int h_max, int slack) {
  std::vector<AlertClass> classes;
  classes.reserve(alerts.size());
  for (const Date& t : alerts) {
    int nearest = -1;
    for (const Date& tau : events) {
      const int d = window_distance(days_between(t, tau), h_min, h_max);
      if (nearest < 0 || d < nearest) nearest = d;
    }
    if (nearest == 0) {
      classes.push_back(AlertClass::True);
    } else if (nearest > 0 && nearest <= slack) {
      classes.push_back(AlertClass::NearMiss);
    } else {
      classes.push_back(AlertClass::StrictFalse);
    }
  }
  return classes;
}

std::vector<AlertEpisode> group_episodes(std::span<const Date> alerts, std::span<const AlertClass> classes,
                                         int episode_gap) {
  if (alerts.size() != classes.size()) {
    throw Error(ErrorCode::LengthMismatch, kModule, "alerts and classes differ in length");
  }
  std::vector<AlertEpisode> episodes;
  for (std::size_t i = 0; i < alerts.size(); ++i) {
    if (episodes.empty() || days_between(episodes.back().end, alerts[i]) > episode_gap) {
      episodes.push_back(AlertEpisode{alerts[i], alerts[i], {}, classes[i]});
    }
    auto& ep = episodes.back();
    ep.end = alerts[i];
    ep.members.push_back(alerts[i]);
    if (rank_of(classes[i]) < rank_of(ep.classification)) ep.classification = classes[i];
  }
  return episodes;
}

std::optional<double> alert_precision(const AlertCounts& c) noexcept {
  if (c.alerts <= 0) return std::nullopt;
  return static_cast<double>(c.alerts - c.false_alerts) / c.alerts;
}

std::optional<double> episode_precision(const AlertCounts& c) noexcept {
  if (c.episodes <= 0) return std::nullopt;
  return static_cast<double>(c.episodes - c.near_miss_episodes - c.strict_false_episodes) / c.episodes;
}

EvaluationResult build_report(std::span<const double> scores, std::span<const SampleKey> samples,
                              std::span<const Date> events, double threshold, const EvaluationConfig& config) {
  require_same_length(scores.size(), samples.size());
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::chrono::sys_days{samples[a].prediction_date} < std::chrono::sys_days{samples[b].prediction_date};
  });

  std::vector<Date> alert_dates;
  std::vector<double> alert_scores;
  std::vector<int> labels;
  std::vector<double> ordered_scores;
  for (const std::size_t i : order) {
    ordered_scores.push_back(scores[i]);
    labels.push_back(samples[i].label);
    if (scores[i] >= threshold) {
      alert_dates.push_back(samples[i].prediction_date);
      alert_scores.push_back(scores[i]);
    }
  }

  EvaluationResult result;
  auto& rep = result.report;
  const EventMatch match = match_events(alert_dates, events, config.h_min, config.h_max);
  rep.events = match.events;
  rep.event_recall = match.event_recall;
  rep.mean_lead_days = match.mean_lead_days;
  for (auto& ev : rep.events) {
    const Date window_end = add_days(ev.event_date, -config.h_min);
    ev.undetectable = order.empty() || std::chrono::sys_days{window_end} <
                                           std::chrono::sys_days{samples[order.front()].prediction_date};
  }

  const auto classes = classify_alerts(alert_dates, events, config.h_min, config.h_max, config.near_miss_slack);
  rep.episodes = group_episodes(alert_dates, classes, config.episode_gap);

  auto& c = rep.counts;
  c.alerts = static_cast<int>(alert_dates.size());
  for (const auto cls : classes) {
    c.near_miss_alerts += cls == AlertClass::NearMiss;
    c.strict_false_alerts += cls == AlertClass::StrictFalse;
  }
  c.false_alerts = c.near_miss_alerts + c.strict_false_alerts;
  c.episodes = static_cast<int>(rep.episodes.size());
  for (const auto& ep : rep.episodes) {
    c.near_miss_episodes += ep.classification == AlertClass::NearMiss;
    c.strict_false_episodes += ep.classification == AlertClass::StrictFalse;
  }
  rep.alert_precision = alert_precision(c);
  rep.episode_precision = episode_precision(c);

  int episode = 0;
  std::size_t member = 0;
  for (std::size_t i = 0; i < alert_dates.size(); ++i) {
    if (member == rep.episodes[static_cast<std::size_t>(episode)].members.size()) {
      ++episode;
      member = 0;
    }
    ++member;
    rep.alerts.push_back(AlertRow{alert_dates[i], alert_scores[i], classes[i], episode});
  }

  auto& s = result.standard;
  s.threshold = threshold;
  const auto cm = classification_metrics(ordered_scores, labels, threshold);
  s.f1 = cm.f1;
  s.precision = cm.precision;
  s.recall = cm.recall;
  const bool both = std::find(labels.begin(), labels.end(), 1) != labels.end() &&
                    std::find(labels.begin(), labels.end(), 0) != labels.end();
  if (both) s.auroc = auroc(ordered_scores, labels);
  return result;
}

}  // namespace onsetwarn
