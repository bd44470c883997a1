#pragma once

#include <span>
#include <string>
#include <vector>

#include "onsetwarn/ingest.hpp"
#include "onsetwarn/types.hpp"

namespace onsetwarn {

/// Per-day feature layout: raw variables, cyclic calendar codes, then the
/// rolling agro-meteorological descriptors. Column order is fixed.
namespace feature_layout {
inline constexpr int kRaw = 5;
inline constexpr int kCyclic = 4;
inline constexpr int kRolling = 14;
inline constexpr int kCyclicBegin = kRaw;
inline constexpr int kRollingBegin = kRaw + kCyclic;
inline constexpr int kDim = kRaw + kCyclic + kRolling;
}  // namespace feature_layout

/// Names of all per-day features in column order (length feature_layout::kDim).
const std::vector<std::string>& feature_names();
/// Names of the rolling descriptor columns in rolling_features() order.
const std::vector<std::string>& rolling_feature_names();

/// Humidity above this (strictly) counts as a humid day.
inline constexpr double kHumidDayThreshold = 85.0;

struct CyclicCodes {
  double month_sin = 0.0;
  double month_cos = 0.0;
  double doy_sin = 0.0;
  double doy_cos = 0.0;
};

/// The day-of-year period is 365 also in leap years.
CyclicCodes cyclic_encode(int month, int doy) noexcept;

/// Causal rolling descriptors, one row per record, columns as in
/// rolling_feature_names(). Windows are calendar windows ending at the
/// record's date; near the series start they shrink to what is available.
MatrixXd rolling_features(const YearSeries& series);

/// Full per-day feature matrix for one cleaned year.
struct YearFeatures {
  int year = 0;
  std::vector<Date> dates;
  MatrixXd values;  // rows = days, cols = feature_layout::kDim
};

YearFeatures build_features(const YearSeries& series);

/// Column-wise z-score parameters. Pass-through columns carry mu=0, sigma=1.
struct Normalizer {
  VectorXd mu;
  VectorXd sigma;

  Eigen::Index dim() const noexcept { return mu.size(); }
};

inline constexpr double kSigmaFloor = 1e-8;

/// Mask over feature_layout columns that should bypass z-scoring; with
/// normalize_cyclic=false the four calendar codes pass through unchanged.
std::vector<bool> cyclic_passthrough_mask(bool normalize_cyclic);

/// Fits mean and population standard deviation per column of `train_rows`
/// (one row per training day). `passthrough`, if non-empty, marks columns left
/// unscaled. Throws EmptyTrainingSet with fewer than two rows.
Normalizer fit_normalizer(const Eigen::Ref<const MatrixXd>& train_rows, const std::vector<bool>& passthrough = {},
                          double sigma_floor = kSigmaFloor);

/// (x - mu) / sigma row-wise. Throws DimensionMismatch.
MatrixXd apply_normalizer(const Eigen::Ref<const MatrixXd>& rows, const Normalizer& normalizer);

/// Stacks the per-day rows of several years.
MatrixXd stack_rows(std::span<const YearFeatures> years);

/// CSV with header `date,<feature names...>`, one row per day.
std::string export_features_csv(std::span<const YearFeatures> years);

}  // namespace onsetwarn
