#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace onsetwarn::nn {

template <typename Scalar>
Scalar sigmoid(Scalar z) noexcept {
  if (z >= 0) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar ez = std::exp(z);
  return ez / (Scalar(1) + ez);
}

/// log(1 + exp(x)) without overflow.
template <typename Scalar>
Scalar softplus(Scalar x) noexcept {
  return std::max(x, Scalar(0)) + std::log1p(std::exp(-std::abs(x)));
}

/// Score in the open interval (0, 1) even when the logit saturates.
inline double probability(double logit) noexcept {
  return std::clamp(sigmoid(logit), std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

/// -[w*y*log(sigmoid(z)) + (1-y)*log(1-sigmoid(z))], written with softplus:
/// -log(sigmoid(z)) = softplus(-z) and -log(1-sigmoid(z)) = softplus(z).
template <typename Scalar>
Scalar weighted_bce(Scalar logit, int label, Scalar pos_weight) noexcept {
  return label ? pos_weight * softplus(-logit) : softplus(logit);
}

/// d weighted_bce / d logit.
template <typename Scalar>
Scalar weighted_bce_grad(Scalar logit, int label, Scalar pos_weight) noexcept {
  const Scalar p = sigmoid(logit);
  return label ? pos_weight * (p - Scalar(1)) : p;
}

}  // namespace onsetwarn::nn
