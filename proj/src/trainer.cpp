#include "onsetwarn/trainer.hpp"

#include <sstream>

#include "onsetwarn/csv.hpp"
#include "onsetwarn/evaluation.hpp"

namespace onsetwarn {

double compute_pos_weight(std::span<const int> labels) {
  std::size_t positives = 0;
  for (const int y : labels) positives += y != 0;
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorCode::DegenerateLabels, "models",
                "training labels hold " + std::to_string(positives) + " positives and " + std::to_string(negatives) +
                    " negatives; both classes are required");
  }
  return static_cast<double>(negatives) / static_cast<double>(positives);
}

double mean_weighted_bce(const Eigen::Ref<const VectorXd>& logits, std::span<const int> labels, double pos_weight) {
  if (static_cast<std::size_t>(logits.size()) != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "models", "logits and labels differ in length");
  }
  if (labels.empty()) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    sum += nn::weighted_bce(logits(i), labels[static_cast<std::size_t>(i)], pos_weight);
  }
  return sum / static_cast<double>(labels.size());
}

std::vector<double> default_threshold_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 19; ++k) grid.push_back(k / 20.0);
  return grid;
}

double best_grid_f1(const Eigen::Ref<const VectorXd>& logits, std::span<const int> labels,
                    std::span<const double> grid) {
  std::vector<double> scores(static_cast<std::size_t>(logits.size()));
  for (Eigen::Index i = 0; i < logits.size(); ++i) scores[static_cast<std::size_t>(i)] = nn::probability(logits(i));
  double best = 0.0;
  for (const double thr : grid) best = std::max(best, classification_metrics(scores, labels, thr).f1);
  return best;
}

std::string train_log_csv(const TrainLog& log) {
  std::ostringstream out;
  out << "epoch,train_loss,val_loss\n";
  for (const auto& e : log.epochs) {
    out << e.epoch << ',' << csv::format_number(e.train_loss) << ',' << csv::format_number(e.val_loss) << '\n';
  }
  return out.str();
}

}  // namespace onsetwarn
