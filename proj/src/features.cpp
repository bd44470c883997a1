#include "onsetwarn/features.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "onsetwarn/csv.hpp"
#include "onsetwarn/error.hpp"

namespace onsetwarn {

namespace {

constexpr std::string_view kModule = "features";

}  // namespace

const std::vector<std::string>& rolling_feature_names() {
  static const std::vector<std::string> names = {
      "rain_sum_3",  "rain_sum_5",  "rain_sum_7",   "hum_mean_3",   "hum_mean_5",   "hum_mean_7",
      "temp_mean_3", "temp_mean_5", "temp_mean_7",  "temp_range",   "humid_days_5", "humid_days_7",
      "rainy_days_5", "rainy_days_7"};
  return names;
}

const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n = {"humidity_mean", "temp_mean", "temp_min", "temp_max", "rainfall",
                                  "month_sin",     "month_cos", "doy_sin",  "doy_cos"};
    const auto& rolling = rolling_feature_names();
    n.insert(n.end(), rolling.begin(), rolling.end());
    return n;
  }();
  return names;
}

CyclicCodes cyclic_encode(int month, int doy) noexcept {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double m = two_pi * month / 12.0;
  const double d = two_pi * doy / 365.0;
  return {std::sin(m), std::cos(m), std::sin(d), std::cos(d)};
}

MatrixXd rolling_features(const YearSeries& series) {
  const auto n = static_cast<Eigen::Index>(series.size());
  const auto& rec = series.records;
  MatrixXd out(n, feature_layout::kRolling);

  for (Eigen::Index i = 0; i < n; ++i) {
    // Accumulators for calendar windows of 3, 5 and 7 days ending at day i.
    double rain[3] = {0, 0, 0};
    double hum[3] = {0, 0, 0};
    double temp[3] = {0, 0, 0};
    int count[3] = {0, 0, 0};
    int humid[3] = {0, 0, 0};
    int rainy[3] = {0, 0, 0};
    constexpr int windows[3] = {3, 5, 7};

    for (Eigen::Index j = i; j >= 0; --j) {
      const int lag = days_between(rec[j].date, rec[i].date);
      if (lag >= 7) break;
      for (int w = 0; w < 3; ++w) {
        if (lag >= windows[w]) continue;
        rain[w] += rec[j].rainfall;
        hum[w] += rec[j].humidity_mean;
        temp[w] += rec[j].temp_mean;
        ++count[w];
        humid[w] += rec[j].humidity_mean > kHumidDayThreshold;
        rainy[w] += rec[j].rainfall > 0.0;
      }
    }

    auto row = out.row(i);
    for (int w = 0; w < 3; ++w) {
      row(w) = rain[w];
      row(3 + w) = hum[w] / count[w];
      row(6 + w) = temp[w] / count[w];
    }
    row(9) = rec[i].temp_max - rec[i].temp_min;
    row(10) = humid[1];
    row(11) = humid[2];
    row(12) = rainy[1];
    row(13) = rainy[2];
  }
  return out;
}

YearFeatures build_features(const YearSeries& series) {
  using namespace feature_layout;
  YearFeatures f;
  f.year = series.year;
  const auto n = static_cast<Eigen::Index>(series.size());
  f.values.resize(n, kDim);
  f.dates.reserve(series.size());

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = series.records[i];
    f.dates.push_back(r.date);
    const auto codes = cyclic_encode(month_of(r.date), day_of_year(r.date));
    f.values.row(i).head(kRaw) << r.humidity_mean, r.temp_mean, r.temp_min, r.temp_max, r.rainfall;
    f.values.row(i).segment(kCyclicBegin, kCyclic) << codes.month_sin, codes.month_cos, codes.doy_sin,
        codes.doy_cos;
  }
  f.values.rightCols(kRolling) = rolling_features(series);
  return f;
}

std::vector<bool> cyclic_passthrough_mask(bool normalize_cyclic) {
  std::vector<bool> mask(feature_layout::kDim, false);
  if (!normalize_cyclic) {
    for (int c = 0; c < feature_layout::kCyclic; ++c) mask[feature_layout::kCyclicBegin + c] = true;
  }
  return mask;
}

Normalizer fit_normalizer(const Eigen::Ref<const MatrixXd>& train_rows, const std::vector<bool>& passthrough,
                          double sigma_floor) {
  if (train_rows.rows() < 2) {
    throw Error(ErrorCode::EmptyTrainingSet, kModule,
                "need at least 2 training days, got " + std::to_string(train_rows.rows()));
  }
  if (!passthrough.empty() && static_cast<Eigen::Index>(passthrough.size()) != train_rows.cols()) {
    throw Error(ErrorCode::DimensionMismatch, kModule, "passthrough mask length differs from column count");
  }
  Normalizer n;
  n.mu = train_rows.colwise().mean().transpose();
  n.sigma = ((train_rows.rowwise() - n.mu.transpose()).array().square().colwise().mean().sqrt()).transpose();
  n.sigma = n.sigma.cwiseMax(sigma_floor);
  for (std::size_t c = 0; c < passthrough.size(); ++c) {
    if (passthrough[c]) {
      n.mu(static_cast<Eigen::Index>(c)) = 0.0;
      n.sigma(static_cast<Eigen::Index>(c)) = 1.0;
    }
  }
  return n;
}

MatrixXd apply_normalizer(const Eigen::Ref<const MatrixXd>& rows, const Normalizer& normalizer) {
  if (rows.cols() != normalizer.dim()) {
    throw Error(ErrorCode::DimensionMismatch, kModule,
                "rows have " + std::to_string(rows.cols()) + " columns, normalizer has " +
                    std::to_string(normalizer.dim()));
  }
  return ((rows.rowwise() - normalizer.mu.transpose()).array().rowwise() / normalizer.sigma.transpose().array())
      .matrix();
}

MatrixXd stack_rows(std::span<const YearFeatures> years) {
  Eigen::Index total = 0;
  Eigen::Index cols = years.empty() ? 0 : years.front().values.cols();
  for (const auto& y : years) total += y.values.rows();
  MatrixXd out(total, cols);
  Eigen::Index at = 0;
  for (const auto& y : years) {
    out.middleRows(at, y.values.rows()) = y.values;
    at += y.values.rows();
  }
  return out;
}

std::string export_features_csv(std::span<const YearFeatures> years) {
  std::ostringstream out;
  out << "date";
  for (const auto& name : feature_names()) out << ',' << name;
  out << '\n';
  for (const auto& y : years) {
    for (Eigen::Index i = 0; i < y.values.rows(); ++i) {
      out << format_iso_date(y.dates[static_cast<std::size_t>(i)]);
      for (Eigen::Index c = 0; c < y.values.cols(); ++c) out << ',' << csv::format_number(y.values(i, c));
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace onsetwarn
