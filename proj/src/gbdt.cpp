#include "onsetwarn/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>

#include "onsetwarn/error.hpp"
#include "onsetwarn/nn/loss.hpp"

namespace onsetwarn {

namespace {

constexpr std::string_view kModule = "models";
constexpr int kMaxSupportedBins = 256;

struct HistBin {
  double grad = 0.0;
  double hess = 0.0;
  int count = 0;
};

/// Draws `take` distinct indices from [0, n) and returns them ascending.
std::vector<int> sample_indices(int n, int take, std::mt19937_64& rng) {
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  if (take >= n) return all;
  for (int i = 0; i < take; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
  }
  all.resize(static_cast<std::size_t>(take));
  std::sort(all.begin(), all.end());
  return all;
}

double logloss(const VectorXd& margins, std::span<const int> labels, double pos_weight) {
  if (margins.size() == 0) return 0.0;
  return mean_weighted_bce(margins, labels, pos_weight);
}

}  // namespace

FeatureBins FeatureBins::fit(const Eigen::Ref<const MatrixXd>& x, int max_bins) {
  if (max_bins < 2 || max_bins > kMaxSupportedBins) {
    throw Error(ErrorCode::InvalidConfig, kModule, "max_bins must lie in [2, 256]");
  }
  FeatureBins bins;
  bins.cuts_.resize(static_cast<std::size_t>(x.cols()));
  std::vector<double> sorted(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) sorted[static_cast<std::size_t>(r)] = x(r, f);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> distinct = sorted;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    auto& cuts = bins.cuts_[static_cast<std::size_t>(f)];
    if (distinct.size() <= static_cast<std::size_t>(max_bins)) {
      cuts.assign(distinct.begin() + (distinct.empty() ? 0 : 1), distinct.end());
    } else {
      const std::size_t n = sorted.size();
      for (int j = 1; j < max_bins; ++j) {
        const double v = sorted[static_cast<std::size_t>(j) * n / static_cast<std::size_t>(max_bins)];
        if (v > sorted.front() && (cuts.empty() || v > cuts.back())) cuts.push_back(v);
      }
    }
  }
  return bins;
}

std::vector<std::uint8_t> FeatureBins::transform(const Eigen::Ref<const MatrixXd>& x) const {
  if (x.cols() != features()) {
    throw Error(ErrorCode::DimensionMismatch, kModule, "binning matrix with a different feature count");
  }
  const auto cols = static_cast<std::size_t>(x.cols());
  std::vector<std::uint8_t> out(static_cast<std::size_t>(x.rows()) * cols);
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    const auto& c = cuts_[static_cast<std::size_t>(f)];
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const auto bin = std::upper_bound(c.begin(), c.end(), x(r, f)) - c.begin();
      out[static_cast<std::size_t>(r) * cols + static_cast<std::size_t>(f)] = static_cast<std::uint8_t>(bin);
    }
  }
  return out;
}

double RegressionTree::predict(const Eigen::Ref<const VectorXd>& x) const {
  int id = 0;
  while (!nodes[static_cast<std::size_t>(id)].is_leaf()) {
    const auto& n = nodes[static_cast<std::size_t>(id)];
    id = x(n.feature) < n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(id)].value;
}

double RegressionTree::predict_binned(const std::uint8_t* row) const {
  int id = 0;
  while (!nodes[static_cast<std::size_t>(id)].is_leaf()) {
    const auto& n = nodes[static_cast<std::size_t>(id)];
    id = row[n.feature] < n.bin ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(id)].value;
}

int RegressionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> level(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes[i].is_leaf()) {
      level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

double GbdtModel::margin(const Eigen::Ref<const VectorXd>& x) const {
  if (x.size() != num_features) {
    throw Error(ErrorCode::ShapeMismatch, kModule,
                "GBDT expects " + std::to_string(num_features) + " inputs, got " + std::to_string(x.size()));
  }
  double sum = 0.0;
  for (const auto& tree : trees) sum += tree.predict(x);
  return base_score + learning_rate * sum;
}

double split_gain(double grad_left, double hess_left, double grad_right, double hess_right, double lambda) noexcept {
  const double g = grad_left + grad_right;
  const double h = hess_left + hess_right;
  return 0.5 * (grad_left * grad_left / (hess_left + lambda) + grad_right * grad_right / (hess_right + lambda) -
                g * g / (h + lambda));
}

SplitCandidate best_split(const FeatureBins& bins, std::span<const std::uint8_t> binned, std::span<const int> rows,
                          std::span<const double> grad, std::span<const double> hess, std::span<const int> features,
                          const GbdtConfig& config) {
  const auto width = static_cast<std::size_t>(bins.features());
  std::vector<HistBin> hist(features.size() * kMaxSupportedBins);
  double g_total = 0.0;
  double h_total = 0.0;
  for (const int r : rows) {
    const std::uint8_t* row = binned.data() + static_cast<std::size_t>(r) * width;
    const double g = grad[static_cast<std::size_t>(r)];
    const double h = hess[static_cast<std::size_t>(r)];
    g_total += g;
    h_total += h;
    for (std::size_t fi = 0; fi < features.size(); ++fi) {
      auto& b = hist[fi * kMaxSupportedBins + row[features[fi]]];
      b.grad += g;
      b.hess += h;
      ++b.count;
    }
  }

  const int n_total = static_cast<int>(rows.size());
  SplitCandidate best;
  best.gain = config.min_gain;
  for (std::size_t fi = 0; fi < features.size(); ++fi) {
    const int f = features[fi];
    const int nb = bins.bin_count(f);
    double gl = 0.0;
    double hl = 0.0;
    int nl = 0;
    for (int j = 1; j < nb; ++j) {
      const auto& b = hist[fi * kMaxSupportedBins + static_cast<std::size_t>(j - 1)];
      gl += b.grad;
      hl += b.hess;
      nl += b.count;
      if (b.count == 0) continue;  // same partition as the previous boundary
      const int nr = n_total - nl;
      if (nl < config.min_samples_leaf || nr < config.min_samples_leaf) continue;
      const double gain = split_gain(gl, hl, g_total - gl, h_total - hl, config.lambda);
      if (gain > best.gain) {
        best.feature = f;
        best.bin = j;
        best.threshold = bins.cuts(f)[static_cast<std::size_t>(j - 1)];
        best.gain = gain;
      }
    }
  }
  return best;
}

RegressionTree build_tree(const FeatureBins& bins, std::span<const std::uint8_t> binned, std::span<const int> rows,
                          std::span<const double> grad, std::span<const double> hess, std::span<const int> features,
                          const GbdtConfig& config) {
  struct Pending {
    int node;
    int depth;
    std::vector<int> rows;
  };
  const auto width = static_cast<std::size_t>(bins.features());
  RegressionTree tree;
  tree.nodes.emplace_back();
  std::deque<Pending> queue;
  queue.push_back(Pending{0, 0, std::vector<int>(rows.begin(), rows.end())});

  while (!queue.empty()) {
    Pending item = std::move(queue.front());
    queue.pop_front();

    SplitCandidate split;
    if (item.depth < config.max_depth && static_cast<int>(item.rows.size()) >= 2 * config.min_samples_leaf) {
      split = best_split(bins, binned, item.rows, grad, hess, features, config);
    }
    if (!split.valid()) {
      double g = 0.0;
      double h = 0.0;
      for (const int r : item.rows) {
        g += grad[static_cast<std::size_t>(r)];
        h += hess[static_cast<std::size_t>(r)];
      }
      tree.nodes[static_cast<std::size_t>(item.node)].value = -g / (h + config.lambda);
      continue;
    }

    std::vector<int> left;
    std::vector<int> right;
    for (const int r : item.rows) {
      const std::uint8_t b = binned[static_cast<std::size_t>(r) * width + static_cast<std::size_t>(split.feature)];
      (b < split.bin ? left : right).push_back(r);
    }
    const int left_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    auto& node = tree.nodes[static_cast<std::size_t>(item.node)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.bin = split.bin;
    node.left = left_id;
    node.right = left_id + 1;
    queue.push_back(Pending{left_id, item.depth + 1, std::move(left)});
    queue.push_back(Pending{left_id + 1, item.depth + 1, std::move(right)});
  }
  return tree;
}

GbdtModel train_gbdt(const Eigen::Ref<const MatrixXd>& x, std::span<const int> labels, const GbdtConfig& config,
                     const Eigen::Ref<const MatrixXd>& x_val, std::span<const int> y_val, TrainLog* log) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, kModule, "feature rows and labels differ in length");
  }
  if (x.rows() < 2) throw Error(ErrorCode::DegenerateLabels, kModule, "need at least two training samples");
  compute_pos_weight(labels);  // both classes present
  if (config.n_estimators < 0 || config.max_depth < 0 || config.learning_rate <= 0.0 || config.subsample <= 0.0 ||
      config.subsample > 1.0 || config.colsample <= 0.0 || config.colsample > 1.0 || config.pos_weight <= 0.0 ||
      config.min_samples_leaf < 1 || config.lambda < 0.0) {
    throw Error(ErrorCode::InvalidConfig, kModule, "invalid GBDT configuration");
  }
  const bool has_val = x_val.rows() > 0;
  if (has_val && (x_val.cols() != x.cols() || static_cast<std::size_t>(x_val.rows()) != y_val.size())) {
    throw Error(ErrorCode::ShapeMismatch, kModule, "validation matrix does not match training layout");
  }

  const int n = static_cast<int>(x.rows());
  const int width = static_cast<int>(x.cols());
  const FeatureBins bins = FeatureBins::fit(x, config.max_bins);
  const std::vector<std::uint8_t> binned = bins.transform(x);

  std::vector<double> weight(static_cast<std::size_t>(n));
  double w_pos = 0.0;
  double w_all = 0.0;
  for (int i = 0; i < n; ++i) {
    weight[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(i)] ? config.pos_weight : 1.0;
    w_all += weight[static_cast<std::size_t>(i)];
    if (labels[static_cast<std::size_t>(i)]) w_pos += weight[static_cast<std::size_t>(i)];
  }
  const double rate = w_pos / w_all;

  GbdtModel model;
  model.base_score = std::log(rate / (1.0 - rate));
  model.learning_rate = config.learning_rate;
  model.num_features = x.cols();

  VectorXd margins = VectorXd::Constant(n, model.base_score);
  VectorXd val_margins = VectorXd::Constant(x_val.rows(), model.base_score);
  std::vector<double> grad(static_cast<std::size_t>(n));
  std::vector<double> hess(static_cast<std::size_t>(n));
  std::mt19937_64 rng(config.seed);
  const int take_rows = std::max(1, static_cast<int>(std::lround(config.subsample * n)));
  const int take_cols = std::max(1, static_cast<int>(std::lround(config.colsample * width)));
  if (log) log->pos_weight = config.pos_weight;

  for (int round = 0; round < config.n_estimators; ++round) {
    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double p = nn::sigmoid(margins(i));
      grad[k] = weight[k] * (p - labels[k]);
      hess[k] = weight[k] * p * (1.0 - p);
    }
    const auto rows = sample_indices(n, take_rows, rng);
    const auto features = sample_indices(width, take_cols, rng);
    RegressionTree tree = build_tree(bins, binned, rows, grad, hess, features, config);

    for (int i = 0; i < n; ++i) {
      margins(i) += config.learning_rate *
                    tree.predict_binned(binned.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(width));
    }
    for (Eigen::Index i = 0; i < x_val.rows(); ++i) {
      val_margins(i) += config.learning_rate * tree.predict(x_val.row(i).transpose());
    }
    model.trees.push_back(std::move(tree));

    if (log) {
      EpochRecord rec;
      rec.epoch = round + 1;
      rec.train_loss = logloss(margins, labels, config.pos_weight);
      rec.val_loss = has_val ? logloss(val_margins, y_val, config.pos_weight) : 0.0;
      log->epochs.push_back(rec);
      log->best_epoch = round + 1;
    }
  }
  return model;
}

}  // namespace onsetwarn
