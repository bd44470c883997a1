#pragma once

#include <random>
#include <string>
#include <vector>

#include "onsetwarn/error.hpp"
#include "onsetwarn/nn/parameters.hpp"

namespace onsetwarn::nn {

struct TcnConfig {
  int input_dim = 0;
  int channels = 64;
  int levels = 3;        // residual blocks; block b uses dilation 2^b
  int kernel = 3;
  int convs_per_block = 1;
  double dropout = 0.2;
};

/// Number of past days (inclusive of the current one) an output can see.
inline int tcn_receptive_field(const TcnConfig& c) noexcept {
  return 1 + c.convs_per_block * (c.kernel - 1) * ((1 << c.levels) - 1);
}

/// Residual temporal convolutional network over time-major packed batches.
///
/// Each block runs `convs_per_block` causal dilated convolutions, each
/// followed by ReLU and dropout, and adds the block input (through a 1x1
/// projection when the channel count changes). The head reads the last time
/// step. Tap k of a convolution with dilation r reads x[t - (K-1-k)*r], so
/// tap K-1 is the current day; positions before the window start read zero.
template <typename Scalar>
class Tcn {
 public:
  struct ConvSlots {
    int weight;  // C_out x (K*C_in), tap k occupies columns [k*C_in, (k+1)*C_in)
    int bias;
  };

  struct BlockSlots {
    std::vector<ConvSlots> convs;
    int proj_weight = -1;  // C_out x C_in, only when C_in != C_out
    int proj_bias = -1;
    int dilation = 1;
    Eigen::Index in_channels = 0;
  };

  struct BlockTape {
    Matrix<Scalar> input;
    std::vector<Matrix<Scalar>> conv_inputs;  // input of each conv
    std::vector<Matrix<Scalar>> pre_act;      // conv output before ReLU
    std::vector<Matrix<Scalar>> masks;        // dropout after each ReLU
  };

  struct Tape {
    Eigen::Index batch = 0;
    Eigen::Index length = 0;
    std::vector<BlockTape> blocks;
    Matrix<Scalar> head_input;
    Matrix<Scalar> head_mask;
  };

  Tcn() = default;

  explicit Tcn(TcnConfig config) : config_(config) {
    if (config.input_dim <= 0 || config.channels <= 0 || config.levels <= 0 || config.kernel <= 0 ||
        config.convs_per_block <= 0 || config.dropout < 0.0 || config.dropout >= 1.0) {
      throw Error(ErrorCode::InvalidConfig, "models", "invalid TCN configuration");
    }
    const Eigen::Index ch = config.channels;
    for (int b = 0; b < config.levels; ++b) {
      BlockSlots block;
      block.dilation = 1 << b;
      block.in_channels = b == 0 ? config.input_dim : ch;
      const std::string prefix = "tcn.block" + std::to_string(b) + ".";
      for (int c = 0; c < config.convs_per_block; ++c) {
        const Eigen::Index in = c == 0 ? block.in_channels : ch;
        const std::string name = prefix + "conv" + std::to_string(c) + ".";
        block.convs.push_back(
            ConvSlots{layout_.add(name + "weight", ch, config.kernel * in), layout_.add(name + "bias", ch, 1)});
      }
      if (block.in_channels != ch) {
        block.proj_weight = layout_.add(prefix + "proj.weight", ch, block.in_channels);
        block.proj_bias = layout_.add(prefix + "proj.bias", ch, 1);
      }
      blocks_.push_back(std::move(block));
    }
    head_weight_ = layout_.add("head.weight", 1, ch);
    head_bias_ = layout_.add("head.bias", 1, 1);
    params_ = Vector<Scalar>::Zero(layout_.size());
  }

  const TcnConfig& config() const noexcept { return config_; }
  const ParamLayout& layout() const noexcept { return layout_; }
  const std::vector<BlockSlots>& blocks() const noexcept { return blocks_; }
  int head_weight_slot() const noexcept { return head_weight_; }
  int head_bias_slot() const noexcept { return head_bias_; }
  Vector<Scalar>& parameters() noexcept { return params_; }
  const Vector<Scalar>& parameters() const noexcept { return params_; }
  int receptive_field() const noexcept { return tcn_receptive_field(config_); }

  void initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (const auto& block : blocks_) {
      for (std::size_t c = 0; c < block.convs.size(); ++c) {
        const Eigen::Index in = c == 0 ? block.in_channels : config_.channels;
        init_uniform_fan_in(params_, layout_[block.convs[c].weight], config_.kernel * in, rng);
        init_uniform_fan_in(params_, layout_[block.convs[c].bias], config_.kernel * in, rng);
      }
      if (block.proj_weight >= 0) {
        init_uniform_fan_in(params_, layout_[block.proj_weight], block.in_channels, rng);
        init_uniform_fan_in(params_, layout_[block.proj_bias], block.in_channels, rng);
      }
    }
    init_uniform_fan_in(params_, layout_[head_weight_], config_.channels, rng);
    init_uniform_fan_in(params_, layout_[head_bias_], config_.channels, rng);
  }

  /// Representation of every time step after the last block, C x (L*B).
  Matrix<Scalar> features(const Matrix<Scalar>& packed, Eigen::Index batch, std::mt19937_64* dropout_rng = nullptr,
                          Tape* tape = nullptr) const {
    if (batch <= 0 || packed.cols() % batch != 0 || packed.rows() != config_.input_dim) {
      throw Error(ErrorCode::ShapeMismatch, "models",
                  "TCN expects " + std::to_string(config_.input_dim) + " features per day, got " +
                      std::to_string(packed.rows()));
    }
    const bool train = dropout_rng != nullptr && config_.dropout > 0.0;
    const Eigen::Index length = packed.cols() / batch;
    if (tape) {
      tape->batch = batch;
      tape->length = length;
      tape->blocks.assign(blocks_.size(), BlockTape{});
    }

    Matrix<Scalar> x = packed;
    for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
      const auto& block = blocks_[bi];
      Matrix<Scalar> a = x;
      for (const auto& conv : block.convs) {
        Matrix<Scalar> z = convolve(a, conv, block.dilation, batch);
        Matrix<Scalar> mask;
        if (tape) {
          tape->blocks[bi].conv_inputs.push_back(a);
          tape->blocks[bi].pre_act.push_back(z);
        }
        a = z.cwiseMax(Scalar(0));
        if (train) {
          mask = dropout_mask<Scalar>(a.rows(), a.cols(), config_.dropout, *dropout_rng);
          a.array() *= mask.array();
        }
        if (tape) tape->blocks[bi].masks.push_back(std::move(mask));
      }
      if (block.proj_weight >= 0) {
        a.noalias() += view(params_, layout_[block.proj_weight]) * x;
        a.colwise() += view(params_, layout_[block.proj_bias]).col(0);
      } else {
        a += x;
      }
      if (tape) tape->blocks[bi].input = std::move(x);
      x = std::move(a);
    }
    return x;
  }

  Vector<Scalar> forward(const Matrix<Scalar>& packed, Eigen::Index batch, std::mt19937_64* dropout_rng = nullptr,
                         Tape* tape = nullptr) const {
    Tape local;
    Tape& tp = tape ? *tape : local;
    const Matrix<Scalar> rep = features(packed, batch, dropout_rng, &tp);
    const Eigen::Index length = packed.cols() / batch;
    tp.head_input = rep.middleCols((length - 1) * batch, batch);
    if (dropout_rng != nullptr && config_.dropout > 0.0) {
      tp.head_mask = dropout_mask<Scalar>(tp.head_input.rows(), batch, config_.dropout, *dropout_rng);
      tp.head_input.array() *= tp.head_mask.array();
    } else {
      tp.head_mask.resize(0, 0);
    }
    return head(tp.head_input);
  }

  Scalar forward_window(const Matrix<Scalar>& window, std::mt19937_64* dropout_rng = nullptr) const {
    const std::vector<Matrix<Scalar>> one{window};
    return forward(pack_batch<Scalar>(one), 1, dropout_rng)(0);
  }

  /// Head applied at every time step of one window (evaluation mode); entry t
  /// is the logit the model would emit if the window ended at day t.
  Vector<Scalar> per_step_logits(const Matrix<Scalar>& window) const {
    const std::vector<Matrix<Scalar>> one{window};
    return head(features(pack_batch<Scalar>(one), 1));
  }

  void backward(const Tape& tp, const Vector<Scalar>& dlogits, Vector<Scalar>& grad) const {
    const Eigen::Index batch = tp.batch;
    const Eigen::Index length = tp.length;
    const auto hw = view(params_, layout_[head_weight_]);
    view(grad, layout_[head_weight_]).noalias() += dlogits.transpose() * tp.head_input.transpose();
    view(grad, layout_[head_bias_])(0, 0) += dlogits.sum();

    Matrix<Scalar> d_out = Matrix<Scalar>::Zero(config_.channels, length * batch);
    d_out.middleCols((length - 1) * batch, batch) = hw.transpose() * dlogits.transpose();
    if (tp.head_mask.size() > 0) d_out.middleCols((length - 1) * batch, batch).array() *= tp.head_mask.array();

    for (std::size_t bi = blocks_.size(); bi-- > 0;) {
      const auto& block = blocks_[bi];
      const auto& bt = tp.blocks[bi];

      // Residual path.
      Matrix<Scalar> d_in;
      if (block.proj_weight >= 0) {
        view(grad, layout_[block.proj_weight]).noalias() += d_out * bt.input.transpose();
        view(grad, layout_[block.proj_bias]).col(0) += d_out.rowwise().sum();
        d_in.noalias() = view(params_, layout_[block.proj_weight]).transpose() * d_out;
      } else {
        d_in = d_out;
      }

      // Convolution path, last conv first.
      Matrix<Scalar> d_a = d_out;
      for (std::size_t ci = block.convs.size(); ci-- > 0;) {
        if (bt.masks[ci].size() > 0) d_a.array() *= bt.masks[ci].array();
        d_a = (bt.pre_act[ci].array() > Scalar(0)).select(d_a, Scalar(0));
        d_a = convolve_backward(d_a, bt.conv_inputs[ci], block.convs[ci], block.dilation, batch, grad);
      }
      d_out = d_in + d_a;
    }
  }

 private:
  Vector<Scalar> head(const Matrix<Scalar>& rep) const {
    Vector<Scalar> logits = (view(params_, layout_[head_weight_]) * rep).transpose();
    logits.array() += view(params_, layout_[head_bias_])(0, 0);
    return logits;
  }

  Matrix<Scalar> convolve(const Matrix<Scalar>& in, const ConvSlots& conv, int dilation, Eigen::Index batch) const {
    const Eigen::Index in_ch = in.rows();
    const Eigen::Index total = in.cols();
    const Eigen::Index length = total / batch;
    const auto w = view(params_, layout_[conv.weight]);
    Matrix<Scalar> out(w.rows(), total);
    out.colwise() = view(params_, layout_[conv.bias]).col(0);
    for (int k = 0; k < config_.kernel; ++k) {
      const Eigen::Index shift = static_cast<Eigen::Index>(config_.kernel - 1 - k) * dilation;
      if (shift >= length) continue;
      const Eigen::Index span = (length - shift) * batch;
      out.rightCols(span).noalias() += w.middleCols(k * in_ch, in_ch) * in.leftCols(span);
    }
    return out;
  }

  /// Accumulates weight/bias gradients and returns d(input).
  Matrix<Scalar> convolve_backward(const Matrix<Scalar>& d_out, const Matrix<Scalar>& in, const ConvSlots& conv,
                                   int dilation, Eigen::Index batch, Vector<Scalar>& grad) const {
    const Eigen::Index in_ch = in.rows();
    const Eigen::Index total = in.cols();
    const Eigen::Index length = total / batch;
    const auto w = view(params_, layout_[conv.weight]);
    auto gw = view(grad, layout_[conv.weight]);
    view(grad, layout_[conv.bias]).col(0) += d_out.rowwise().sum();
    Matrix<Scalar> d_in = Matrix<Scalar>::Zero(in_ch, total);
    for (int k = 0; k < config_.kernel; ++k) {
      const Eigen::Index shift = static_cast<Eigen::Index>(config_.kernel - 1 - k) * dilation;
      if (shift >= length) continue;
      const Eigen::Index span = (length - shift) * batch;
      gw.middleCols(k * in_ch, in_ch).noalias() += d_out.rightCols(span) * in.leftCols(span).transpose();
      d_in.leftCols(span).noalias() += w.middleCols(k * in_ch, in_ch).transpose() * d_out.rightCols(span);
    }
    return d_in;
  }

  TcnConfig config_;
  ParamLayout layout_;
  std::vector<BlockSlots> blocks_;
  int head_weight_ = -1;
  int head_bias_ = -1;
  Vector<Scalar> params_;
};

}  // namespace onsetwarn::nn
