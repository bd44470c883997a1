#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "onsetwarn/trainer.hpp"
#include "onsetwarn/types.hpp"

namespace onsetwarn {

struct GbdtConfig {
  int n_estimators = 400;
  double learning_rate = 0.05;
  int max_depth = 4;
  double subsample = 0.9;
  double colsample = 0.9;
  int max_bins = 256;
  int min_samples_leaf = 5;
  double lambda = 1.0;    // L2 penalty on leaf weights
  double min_gain = 0.0;  // a split must improve by strictly more than this
  double pos_weight = 1.0;
  std::uint64_t seed = 0;
};

/// Per-feature bin boundaries and the binned training matrix.
///
/// With k distinct training values a feature gets cuts at the distinct values
/// above the minimum (k bins) when k <= max_bins, otherwise at training
/// quantiles. bin(x) counts the cuts <= x, so "bin < j" is equivalent to
/// "x < cuts[j-1]" on any input.
class FeatureBins {
 public:
  static FeatureBins fit(const Eigen::Ref<const MatrixXd>& x, int max_bins);

  /// Bins every row of `x` with the fitted cuts.
  std::vector<std::uint8_t> transform(const Eigen::Ref<const MatrixXd>& x) const;

  const std::vector<double>& cuts(Eigen::Index feature) const { return cuts_[static_cast<std::size_t>(feature)]; }
  int bin_count(Eigen::Index feature) const { return static_cast<int>(cuts(feature).size()) + 1; }
  Eigen::Index features() const noexcept { return static_cast<Eigen::Index>(cuts_.size()); }

 private:
  std::vector<std::vector<double>> cuts_;
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int bin = 0;  // training-time equivalent of threshold
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf weight (before shrinkage)

  bool is_leaf() const noexcept { return feature < 0; }
};

/// Samples with x[feature] < threshold go left.
struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(const Eigen::Ref<const VectorXd>& x) const;
  double predict_binned(const std::uint8_t* row) const;
  int depth() const;
};

struct GbdtModel {
  double base_score = 0.0;  // initial log-odds
  double learning_rate = 0.05;
  Eigen::Index num_features = 0;
  std::vector<RegressionTree> trees;

  /// base_score + learning_rate * sum of tree outputs.
  double margin(const Eigen::Ref<const VectorXd>& x) const;
};

struct SplitCandidate {
  int feature = -1;
  int bin = 0;  // left child takes bins [0, bin)
  double threshold = 0.0;
  double gain = 0.0;

  bool valid() const noexcept { return feature >= 0; }
};

/// Second-order split gain with L2 penalty lambda:
/// 0.5 * (GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)).
double split_gain(double grad_left, double hess_left, double grad_right, double hess_right, double lambda) noexcept;

/// Best histogram split over `features` for the samples in `rows`. Ties keep
/// the first candidate in (feature, bin) order.
SplitCandidate best_split(const FeatureBins& bins, std::span<const std::uint8_t> binned,
                          std::span<const int> rows, std::span<const double> grad, std::span<const double> hess,
                          std::span<const int> features, const GbdtConfig& config);

/// Depth-wise greedy tree on the given rows and candidate features.
RegressionTree build_tree(const FeatureBins& bins, std::span<const std::uint8_t> binned, std::span<const int> rows,
                          std::span<const double> grad, std::span<const double> hess, std::span<const int> features,
                          const GbdtConfig& config);

/// Logistic-loss boosting on flattened windows. `x_val`/`y_val` are only used
/// for the per-round log (pass empty to skip). Throws DegenerateLabels.
GbdtModel train_gbdt(const Eigen::Ref<const MatrixXd>& x, std::span<const int> labels, const GbdtConfig& config,
                     const Eigen::Ref<const MatrixXd>& x_val = MatrixXd(), std::span<const int> y_val = {},
                     TrainLog* log = nullptr);

}  // namespace onsetwarn
