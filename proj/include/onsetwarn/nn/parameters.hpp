#pragma once

#include <random>
#include <string>
#include <vector>

#include "onsetwarn/types.hpp"

namespace onsetwarn::nn {

/// Named dense block inside a flat parameter vector.
struct ParamSlot {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::Index offset = 0;

  Eigen::Index size() const noexcept { return rows * cols; }
};

/// All trainable tensors of a model live in one flat vector so the optimizer,
/// clipping and finite-difference checks see a single contiguous buffer.
class ParamLayout {
 public:
  int add(std::string name, Eigen::Index rows, Eigen::Index cols) {
    slots_.push_back(ParamSlot{std::move(name), rows, cols, size_});
    size_ += rows * cols;
    return static_cast<int>(slots_.size()) - 1;
  }

  const ParamSlot& operator[](int id) const { return slots_[static_cast<std::size_t>(id)]; }
  const std::vector<ParamSlot>& slots() const noexcept { return slots_; }
  Eigen::Index size() const noexcept { return size_; }

 private:
  std::vector<ParamSlot> slots_;
  Eigen::Index size_ = 0;
};

template <typename Scalar>
Eigen::Map<Matrix<Scalar>> view(Vector<Scalar>& flat, const ParamSlot& slot) {
  return Eigen::Map<Matrix<Scalar>>(flat.data() + slot.offset, slot.rows, slot.cols);
}

template <typename Scalar>
Eigen::Map<const Matrix<Scalar>> view(const Vector<Scalar>& flat, const ParamSlot& slot) {
  return Eigen::Map<const Matrix<Scalar>>(flat.data() + slot.offset, slot.rows, slot.cols);
}

/// Fills a slot with U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
template <typename Scalar>
void init_uniform_fan_in(Vector<Scalar>& flat, const ParamSlot& slot, Eigen::Index fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  auto block = view(flat, slot);
  for (Eigen::Index c = 0; c < block.cols(); ++c) {
    for (Eigen::Index r = 0; r < block.rows(); ++r) block(r, c) = static_cast<Scalar>(dist(rng));
  }
}

/// Inverted-dropout mask: each entry is 0 with probability `rate`, else
/// 1/(1-rate).
template <typename Scalar>
Matrix<Scalar> dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::mt19937_64& rng) {
  Matrix<Scalar> mask(rows, cols);
  const Scalar keep_scale = static_cast<Scalar>(1.0 / (1.0 - rate));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) mask(r, c) = u(rng) < rate ? Scalar(0) : keep_scale;
  }
  return mask;
}

/// Packs windows (each L x d) into the time-major batch layout used by the
/// sequence models: a d x (L*B) matrix whose column t*B + b is day t of
/// window b.
template <typename Scalar, typename WindowRange>
Matrix<Scalar> pack_batch(const WindowRange& windows) {
  const auto batch = static_cast<Eigen::Index>(std::size(windows));
  if (batch == 0) return {};
  const auto& first = *std::begin(windows);
  const Eigen::Index length = first.rows();
  const Eigen::Index dim = first.cols();
  Matrix<Scalar> packed(dim, length * batch);
  Eigen::Index b = 0;
  for (const auto& w : windows) {
    for (Eigen::Index t = 0; t < length; ++t) packed.col(t * batch + b) = w.row(t).transpose().template cast<Scalar>();
    ++b;
  }
  return packed;
}

}  // namespace onsetwarn::nn
