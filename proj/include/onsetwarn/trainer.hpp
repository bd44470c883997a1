#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "onsetwarn/error.hpp"
#include "onsetwarn/labeling.hpp"
#include "onsetwarn/nn/adamw.hpp"
#include "onsetwarn/nn/loss.hpp"
#include "onsetwarn/nn/parameters.hpp"

namespace onsetwarn {

enum class EarlyStopMetric { ValidationLoss, ValidationF1 };

struct TrainConfig {
  int max_epochs = 50;
  int patience = 10;
  int batch_size = 32;
  double grad_clip_norm = 1.0;  // <= 0 disables clipping
  nn::AdamWConfig optimizer;
  EarlyStopMetric early_stop = EarlyStopMetric::ValidationLoss;
  std::vector<double> f1_grid;  // thresholds for ValidationF1; empty = default grid
  std::uint64_t seed = 0;
  double pos_weight = 0.0;  // <= 0 means compute from the training labels
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_f1 = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double pos_weight = 1.0;
};

/// N_negative / N_positive. Throws DegenerateLabels on a single-class set.
double compute_pos_weight(std::span<const int> labels);

/// Mean of weighted_bce over a batch of logits.
double mean_weighted_bce(const Eigen::Ref<const VectorXd>& logits, std::span<const int> labels, double pos_weight);

/// Default alert-threshold grid {0.05, 0.10, ..., 0.95}.
std::vector<double> default_threshold_grid();

/// Best F1 over `grid` for sigmoid(logits); used for F1-based early stopping.
double best_grid_f1(const Eigen::Ref<const VectorXd>& logits, std::span<const int> labels,
                    std::span<const double> grid);

std::string train_log_csv(const TrainLog& log);

/// Logits for every sample, evaluated in fixed-size batches without dropout.
template <typename Model>
VectorXd predict_logits(const Model& model, std::span<const WindowSample> samples, Eigen::Index chunk = 256) {
  VectorXd out(static_cast<Eigen::Index>(samples.size()));
  std::vector<MatrixXd> windows;
  for (std::size_t start = 0; start < samples.size(); start += static_cast<std::size_t>(chunk)) {
    const std::size_t stop = std::min(samples.size(), start + static_cast<std::size_t>(chunk));
    windows.clear();
    for (std::size_t i = start; i < stop; ++i) windows.push_back(samples[i].window);
    const auto batch = static_cast<Eigen::Index>(windows.size());
    out.segment(static_cast<Eigen::Index>(start), batch) = model.forward(nn::pack_batch<double>(windows), batch);
  }
  return out;
}

/// Mini-batch AdamW training with global-norm clipping and early stopping.
/// Leaves the model holding the parameters of the best validation epoch.
template <typename Model>
TrainLog train_neural(Model& model, std::span<const WindowSample> train, std::span<const WindowSample> val,
                      const TrainConfig& cfg) {
  std::vector<int> train_labels(train.size());
  std::transform(train.begin(), train.end(), train_labels.begin(), [](const WindowSample& s) { return s.label; });
  std::vector<int> val_labels(val.size());
  std::transform(val.begin(), val.end(), val_labels.begin(), [](const WindowSample& s) { return s.label; });

  TrainLog log;
  const double counted_weight = compute_pos_weight(train_labels);
  log.pos_weight = cfg.pos_weight > 0.0 ? cfg.pos_weight : counted_weight;
  if (cfg.max_epochs <= 0 || cfg.batch_size <= 0 || cfg.patience <= 0 || cfg.patience > cfg.max_epochs) {
    throw Error(ErrorCode::InvalidConfig, "models", "need 0 < patience <= max_epochs and batch_size > 0");
  }
  const auto grid = cfg.f1_grid.empty() ? default_threshold_grid() : cfg.f1_grid;

  std::mt19937_64 rng(cfg.seed);
  nn::AdamW<double> optimizer(model.parameters().size(), cfg.optimizer);
  VectorXd grad(model.parameters().size());
  VectorXd best = model.parameters();
  double best_score = std::numeric_limits<double>::infinity();
  int since_best = 0;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<MatrixXd> windows;
  std::vector<int> labels;
  typename Model::Tape tape;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      windows.clear();
      labels.clear();
      for (std::size_t i = start; i < stop; ++i) {
        windows.push_back(train[order[i]].window);
        labels.push_back(train[order[i]].label);
      }
      const auto batch = static_cast<Eigen::Index>(windows.size());
      const VectorXd logits = model.forward(nn::pack_batch<double>(windows), batch, &rng, &tape);

      VectorXd dlogits(batch);
      double batch_loss = 0.0;
      for (Eigen::Index b = 0; b < batch; ++b) {
        const int y = labels[static_cast<std::size_t>(b)];
        batch_loss += nn::weighted_bce(logits(b), y, log.pos_weight);
        dlogits(b) = nn::weighted_bce_grad(logits(b), y, log.pos_weight) / static_cast<double>(batch);
      }
      if (!std::isfinite(batch_loss)) {
        throw Error(ErrorCode::NonFiniteLoss, "models",
                    "non-finite training loss at epoch " + std::to_string(epoch) + ", batch starting at " +
                        std::to_string(start));
      }
      loss_sum += batch_loss;
      seen += static_cast<std::size_t>(batch);

      grad.setZero();
      model.backward(tape, dlogits, grad);
      nn::clip_grad_norm(grad, cfg.grad_clip_norm);
      optimizer.step(model.parameters(), grad);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(std::max<std::size_t>(seen, 1));
    const VectorXd val_logits = predict_logits(model, val);
    rec.val_loss = val.empty() ? 0.0 : mean_weighted_bce(val_logits, val_labels, log.pos_weight);
    rec.val_f1 = val.empty() ? 0.0 : best_grid_f1(val_logits, val_labels, grid);
    if (!std::isfinite(rec.val_loss)) {
      throw Error(ErrorCode::NonFiniteLoss, "models", "non-finite validation loss at epoch " + std::to_string(epoch));
    }
    log.epochs.push_back(rec);

    const double score = cfg.early_stop == EarlyStopMetric::ValidationLoss ? rec.val_loss : -rec.val_f1;
    if (score < best_score) {
      best_score = score;
      best = model.parameters();
      log.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  model.parameters() = best;
  return log;
}

}  // namespace onsetwarn
