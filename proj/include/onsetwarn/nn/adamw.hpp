#pragma once

#include <cmath>

#include "onsetwarn/types.hpp"

namespace onsetwarn::nn {

struct AdamWConfig {
  double learning_rate = 1e-3;
  double weight_decay = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with decoupled weight decay: the decay shrinks parameters directly
/// instead of being folded into the gradient.
template <typename Scalar>
class AdamW {
 public:
  AdamW(Eigen::Index size, AdamWConfig config)
      : config_(config), m_(Vector<Scalar>::Zero(size)), v_(Vector<Scalar>::Zero(size)) {}

  void step(Vector<Scalar>& params, const Vector<Scalar>& grad) {
    ++t_;
    const Scalar b1 = static_cast<Scalar>(config_.beta1);
    const Scalar b2 = static_cast<Scalar>(config_.beta2);
    const Scalar lr = static_cast<Scalar>(config_.learning_rate);
    const Scalar bias1 = Scalar(1) - static_cast<Scalar>(std::pow(config_.beta1, t_));
    const Scalar bias2 = Scalar(1) - static_cast<Scalar>(std::pow(config_.beta2, t_));

    params *= Scalar(1) - lr * static_cast<Scalar>(config_.weight_decay);
    m_ = b1 * m_ + (Scalar(1) - b1) * grad;
    v_ = b2 * v_ + (Scalar(1) - b2) * grad.cwiseAbs2();
    params.array() -= lr * (m_.array() / bias1) /
                      ((v_.array() / bias2).sqrt() + static_cast<Scalar>(config_.epsilon));
  }

  long steps() const noexcept { return t_; }

 private:
  AdamWConfig config_;
  Vector<Scalar> m_;
  Vector<Scalar> v_;
  long t_ = 0;
};

/// Rescales `grad` in place so its L2 norm is at most `max_norm` (no-op when
/// max_norm <= 0). Returns the norm before clipping.
template <typename Scalar>
Scalar clip_grad_norm(Vector<Scalar>& grad, Scalar max_norm) {
  const Scalar norm = grad.norm();
  if (max_norm > Scalar(0) && norm > max_norm) grad *= max_norm / (norm + Scalar(1e-12));
  return norm;
}

}  // namespace onsetwarn::nn
