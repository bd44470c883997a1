#include "onsetwarn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "onsetwarn/error.hpp"
#include "onsetwarn/features.hpp"

namespace onsetwarn {

namespace {

constexpr std::string_view kModule = "synth";

double round1(double v) { return std::round(v * 10.0) / 10.0; }

double seasonal(double doy, double peak_doy) {
  return std::cos(2.0 * std::numbers::pi * (doy - peak_doy) / 365.0);
}

YearSeries generate_weather(const SynthConfig& c, int year, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::exponential_distribution<double> amount(1.0 / c.rain_amount_scale);

  YearSeries s;
  s.year = year;
  const Date jan1{std::chrono::year{year}, std::chrono::January, std::chrono::day{1}};
  const int days = days_between(jan1, last_day_of_year(year)) + 1;
  double temp_anomaly = 0.0;
  double hum_anomaly = 0.0;
  bool wet_yesterday = false;
  for (int i = 0; i < days; ++i) {
    const double doy = i + 1;
    temp_anomaly = 0.7 * temp_anomaly + c.temp_noise * normal(rng);
    hum_anomaly = 0.5 * hum_anomaly + c.humidity_noise * normal(rng);

    const double base_p = c.rain_prob_amplitude * 0.5 * (1.0 + seasonal(doy, c.rain_peak_doy));
    const double p_wet = std::min(0.95, wet_yesterday ? base_p * c.rain_persistence : base_p);
    const bool wet = uniform(rng) < p_wet;
    const double rain = wet ? std::max(0.1, round1(amount(rng))) : 0.0;

    const double temp_clim = c.temp_annual_mean + c.temp_amplitude * seasonal(doy, c.temp_peak_doy);
    const double temp = temp_clim + temp_anomaly - (wet ? 1.5 : 0.0);
    const double range = std::max(1.0, c.temp_range_mean * (wet ? 0.6 : 1.0) + normal(rng));
    const double humidity = c.humidity_base + (wet ? c.humidity_rain_coupling : 0.0) +
                            (wet_yesterday ? c.humidity_rain_lag_coupling : 0.0) -
                            c.humidity_temp_coupling * (temp - c.temp_annual_mean) + hum_anomaly;

    DailyRecord r;
    r.date = add_days(jan1, i);
    r.temp_mean = round1(temp);
    r.temp_min = round1(temp - 0.45 * range);
    r.temp_max = round1(temp + 0.55 * range);
    r.rainfall = rain;
    r.humidity_mean = round1(std::clamp(humidity, 0.0, 100.0));
    s.records.push_back(r);
    wet_yesterday = wet;
  }
  return s;
}

void assign_labels(const SynthConfig& c, YearSeries& s, const std::vector<int>& trigger, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::uniform_int_distribution<int> duration(c.episode_min, c.episode_max);
  const int n = static_cast<int>(s.size());
  std::vector<int> m(static_cast<std::size_t>(n), 0);
  for (int t = 0; t < n; ++t) {
    const double u = uniform(rng);
    const bool launch = trigger[static_cast<std::size_t>(t)] ? u >= c.label_noise : u < c.label_noise / 30.0;
    const int onset = t + c.incubation_days;
    if (!launch || onset >= n) continue;
    bool clear = true;
    for (int k = std::max(0, onset - c.min_gap); k <= onset; ++k) clear = clear && m[static_cast<std::size_t>(k)] == 0;
    if (!clear) continue;
    const int len = duration(rng);
    const int kind = static_cast<int>(uniform(rng) * 3.0);  // 0 downy, 1 powdery, 2 both
    for (int k = onset; k < std::min(n, onset + len); ++k) {
      m[static_cast<std::size_t>(k)] = 1;
      auto& r = s.records[static_cast<std::size_t>(k)];
      r.label_downy = kind != 1;
      r.label_powdery = kind != 0;
    }
  }
}

}  // namespace

void validate(const SynthConfig& c) {
  const auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, kModule, what); };
  if (c.years.empty()) fail("no years requested");
  if (std::set<int>(c.years.begin(), c.years.end()).size() != c.years.size()) fail("years repeat");
  if (c.rain_prob_amplitude < 0.0 || c.rain_prob_amplitude > 1.0) fail("rain_prob_amplitude must lie in [0, 1]");
  if (c.rain_persistence <= 0.0 || c.rain_amount_scale <= 0.0 || c.temp_noise <= 0.0 || c.temp_range_mean <= 0.0 ||
      c.humidity_noise <= 0.0 || c.temp_amplitude < 0.0) {
    fail("scales must be positive");
  }
  if (c.episode_min < 3 || c.episode_max > 30 || c.episode_min > c.episode_max) {
    fail("episode length range must lie within [3, 30]");
  }
  if (c.incubation_days < 0 || c.min_gap < 1 || c.trigger_humid_days < 0 || c.trigger_humid_days > 5) {
    fail("incubation_days >= 0, min_gap >= 1 and trigger_humid_days in [0, 5] required");
  }
  if (c.label_noise < 0.0 || c.label_noise > 1.0) fail("label_noise must lie in [0, 1]");
}

std::vector<int> evaluate_trigger(const SynthConfig& c, const YearSeries& series) {
  const MatrixXd rolling = rolling_features(series);
  // Column positions within rolling_feature_names().
  constexpr int kRainSum5 = 1;
  constexpr int kTempMean3 = 6;
  constexpr int kHumidDays5 = 10;
  std::vector<int> trigger(series.size(), 0);
  for (Eigen::Index i = 0; i < rolling.rows(); ++i) {
    const double temp = rolling(i, kTempMean3);
    trigger[static_cast<std::size_t>(i)] = rolling(i, kHumidDays5) >= c.trigger_humid_days &&
                                           rolling(i, kRainSum5) >= c.trigger_rain_mm && temp >= c.trigger_temp_min &&
                                           temp <= c.trigger_temp_max;
  }
  return trigger;
}

std::vector<YearSeries> generate(const SynthConfig& config) {
  validate(config);
  std::vector<int> years = config.years;
  std::sort(years.begin(), years.end());
  std::vector<YearSeries> out;
  for (const int year : years) {
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(year)};
    std::mt19937_64 rng(seq);
    YearSeries s = generate_weather(config, year, rng);
    assign_labels(config, s, evaluate_trigger(config, s), rng);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::vector<int>> ground_truth_precursors(const SynthConfig& config, std::span<const YearSeries> series) {
  std::vector<int> expected = config.years;
  std::sort(expected.begin(), expected.end());
  std::vector<int> actual;
  for (const auto& s : series) actual.push_back(s.year);
  if (expected != actual) {
    throw Error(ErrorCode::ConfigSeriesMismatch, kModule, "series years do not match the configured years");
  }
  std::vector<std::vector<int>> out;
  for (const auto& s : series) out.push_back(evaluate_trigger(config, s));
  return out;
}

std::string export_triggers_csv(std::span<const YearSeries> series, std::span<const std::vector<int>> triggers) {
  std::ostringstream out;
  out << "date,trigger\n";
  for (std::size_t y = 0; y < series.size(); ++y) {
    for (std::size_t i = 0; i < series[y].size(); ++i) {
      out << format_iso_date(series[y].records[i].date) << ',' << triggers[y][i] << '\n';
    }
  }
  return out.str();
}

}  // namespace onsetwarn
