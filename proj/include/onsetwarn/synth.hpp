#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "onsetwarn/ingest.hpp"

namespace onsetwarn {

/// Parameters of the seeded synthetic weather and disease-label generator.
///
/// Weather: temperature is an annual sinusoid plus AR(1) noise; wet days follow
/// a seasonal probability with day-to-day persistence and exponential amounts;
/// humidity couples to rain (same day and previous day) and to temperature.
///
/// Labels: a trigger fires on day t when the last 5 days hold at least
/// `trigger_humid_days` humid days, at least `trigger_rain_mm` of rain, and the
/// 3-day mean temperature lies in [trigger_temp_min, trigger_temp_max]. A
/// trigger launches an episode that starts `incubation_days` later provided
/// the `min_gap` days before that start are still disease-free; the episode
/// lasts a uniformly drawn number of days in [episode_min, episode_max].
struct SynthConfig {
  std::vector<int> years = {2020, 2021, 2022, 2023, 2024};
  std::uint64_t seed = 42;

  double rain_prob_amplitude = 0.7;  // peak wet-day probability
  double rain_peak_doy = 130.0;
  double rain_persistence = 1.5;     // wet-day probability multiplier after a wet day
  double rain_amount_scale = 5.0;    // mean rainfall on a wet day, mm

  double temp_annual_mean = 14.0;
  double temp_amplitude = 9.0;
  double temp_peak_doy = 200.0;
  double temp_noise = 1.5;           // AR(1) innovation sd
  double temp_range_mean = 9.0;      // mean daily max - min

  double humidity_base = 68.0;
  double humidity_rain_coupling = 16.0;
  double humidity_rain_lag_coupling = 7.0;
  double humidity_temp_coupling = 0.8;  // percent per degree above the seasonal mean
  double humidity_noise = 4.0;

  int trigger_humid_days = 3;
  double trigger_rain_mm = 12.0;
  double trigger_temp_min = 12.0;
  double trigger_temp_max = 25.0;

  int incubation_days = 7;
  int episode_min = 6;
  int episode_max = 10;
  int min_gap = 5;
  /// Probability that a triggered launch is dropped; untriggered days launch a
  /// spurious episode with probability label_noise / 30.
  double label_noise = 0.0;
};

/// Throws InvalidConfig when a scale is not positive, the episode length range
/// leaves [3, 30], or years are empty or repeated.
void validate(const SynthConfig& config);

std::vector<YearSeries> generate(const SynthConfig& config);

/// Per-day trigger indicator for each year, re-evaluated from the series'
/// weather. Throws ConfigSeriesMismatch when the series years differ from the
/// configured ones.
std::vector<std::vector<int>> ground_truth_precursors(const SynthConfig& config, std::span<const YearSeries> series);

/// Trigger rule on one year of weather; causal over a 5-day window.
std::vector<int> evaluate_trigger(const SynthConfig& config, const YearSeries& series);

/// Sidecar CSV `date,trigger`.
std::string export_triggers_csv(std::span<const YearSeries> series, std::span<const std::vector<int>> triggers);

}  // namespace onsetwarn
