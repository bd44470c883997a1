#pragma once

#include <random>
#include <string>
#include <vector>

#include "onsetwarn/error.hpp"
#include "onsetwarn/nn/parameters.hpp"

namespace onsetwarn::nn {

struct LstmConfig {
  int input_dim = 0;
  int hidden = 64;
  int layers = 2;
  double dropout = 0.2;
};

/// Stacked unidirectional LSTM. The final hidden state of the top layer goes
/// through dropout and a single affine map to one logit.
///
/// Gate rows are ordered input, forget, cell candidate, output. Dropout masks
/// are drawn only when a generator is passed to forward(); without one the
/// network runs in evaluation mode.
template <typename Scalar>
class Lstm {
 public:
  struct LayerSlots {
    int input_weight;      // 4H x in
    int recurrent_weight;  // 4H x H
    int bias;              // 4H x 1
  };

  struct LayerTape {
    Matrix<Scalar> input;  // in x (L*B), after inter-layer dropout
    Matrix<Scalar> gates;  // 4H x (L*B), activated
    Matrix<Scalar> cell;   // H x (L*B)
    Matrix<Scalar> hidden; // H x (L*B)
    Matrix<Scalar> mask;   // dropout applied to `input`, empty when none
  };

  struct Tape {
    Eigen::Index batch = 0;
    Eigen::Index length = 0;
    std::vector<LayerTape> layers;
    Matrix<Scalar> head_input;  // H x B, after head dropout
    Matrix<Scalar> head_mask;
  };

  Lstm() = default;

  explicit Lstm(LstmConfig config) : config_(config) {
    if (config.input_dim <= 0 || config.hidden <= 0 || config.layers <= 0 || config.dropout < 0.0 ||
        config.dropout >= 1.0) {
      throw Error(ErrorCode::InvalidConfig, "models", "invalid LSTM configuration");
    }
    const Eigen::Index h = config.hidden;
    for (int l = 0; l < config.layers; ++l) {
      const Eigen::Index in = l == 0 ? config.input_dim : h;
      const std::string prefix = "lstm.layer" + std::to_string(l) + ".";
      layers_.push_back(LayerSlots{layout_.add(prefix + "input_weight", 4 * h, in),
                                   layout_.add(prefix + "recurrent_weight", 4 * h, h),
                                   layout_.add(prefix + "bias", 4 * h, 1)});
    }
    head_weight_ = layout_.add("head.weight", 1, h);
    head_bias_ = layout_.add("head.bias", 1, 1);
    params_ = Vector<Scalar>::Zero(layout_.size());
  }

  const LstmConfig& config() const noexcept { return config_; }
  const ParamLayout& layout() const noexcept { return layout_; }
  Vector<Scalar>& parameters() noexcept { return params_; }
  const Vector<Scalar>& parameters() const noexcept { return params_; }

  /// Uniform fan-in initialization with forget-gate biases set to 1.
  void initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const Eigen::Index h = config_.hidden;
    for (const auto& l : layers_) {
      init_uniform_fan_in(params_, layout_[l.input_weight], h, rng);
      init_uniform_fan_in(params_, layout_[l.recurrent_weight], h, rng);
      init_uniform_fan_in(params_, layout_[l.bias], h, rng);
      view(params_, layout_[l.bias]).middleRows(h, h).setOnes();
    }
    init_uniform_fan_in(params_, layout_[head_weight_], h, rng);
    init_uniform_fan_in(params_, layout_[head_bias_], h, rng);
  }

  /// Batched forward over a packed d x (L*B) input (see pack_batch).
  Vector<Scalar> forward(const Matrix<Scalar>& packed, Eigen::Index batch, std::mt19937_64* dropout_rng = nullptr,
                         Tape* tape = nullptr) const {
    if (batch <= 0 || packed.cols() % batch != 0 || packed.rows() != config_.input_dim) {
      throw Error(ErrorCode::ShapeMismatch, "models",
                  "LSTM expects " + std::to_string(config_.input_dim) + " features per day, got " +
                      std::to_string(packed.rows()));
    }
    const Eigen::Index h = config_.hidden;
    const Eigen::Index length = packed.cols() / batch;
    const bool train = dropout_rng != nullptr && config_.dropout > 0.0;

    Tape local;
    Tape& tp = tape ? *tape : local;
    tp.batch = batch;
    tp.length = length;
    tp.layers.assign(layers_.size(), LayerTape{});

    for (std::size_t li = 0; li < layers_.size(); ++li) {
      auto& lt = tp.layers[li];
      const auto& slots = layers_[li];
      if (li == 0) {
        lt.input = packed;
      } else {
        lt.input = tp.layers[li - 1].hidden;
        if (train) {
          lt.mask = dropout_mask<Scalar>(h, length * batch, config_.dropout, *dropout_rng);
          lt.input.array() *= lt.mask.array();
        }
      }
      const auto w = view(params_, layout_[slots.input_weight]);
      const auto u = view(params_, layout_[slots.recurrent_weight]);
      const auto b = view(params_, layout_[slots.bias]);

      lt.gates.noalias() = w * lt.input;
      lt.gates.colwise() += b.col(0);
      lt.cell.resize(h, length * batch);
      lt.hidden.resize(h, length * batch);

      for (Eigen::Index t = 0; t < length; ++t) {
        auto z = lt.gates.middleCols(t * batch, batch);
        if (t > 0) z.noalias() += u * lt.hidden.middleCols((t - 1) * batch, batch);
        z.topRows(2 * h) = z.topRows(2 * h).unaryExpr([](Scalar v) { return sigmoid_(v); });
        z.middleRows(2 * h, h) = z.middleRows(2 * h, h).array().tanh().matrix();
        z.bottomRows(h) = z.bottomRows(h).unaryExpr([](Scalar v) { return sigmoid_(v); });

        auto c = lt.cell.middleCols(t * batch, batch);
        c = z.topRows(h).cwiseProduct(z.middleRows(2 * h, h));
        if (t > 0) c += z.middleRows(h, h).cwiseProduct(lt.cell.middleCols((t - 1) * batch, batch));
        lt.hidden.middleCols(t * batch, batch) = z.bottomRows(h).cwiseProduct(c.array().tanh().matrix());
      }
    }

    tp.head_input = tp.layers.back().hidden.middleCols((length - 1) * batch, batch);
    if (train) {
      tp.head_mask = dropout_mask<Scalar>(h, batch, config_.dropout, *dropout_rng);
      tp.head_input.array() *= tp.head_mask.array();
    } else {
      tp.head_mask.resize(0, 0);
    }
    const auto hw = view(params_, layout_[head_weight_]);
    const Scalar hb = view(params_, layout_[head_bias_])(0, 0);
    Vector<Scalar> logits = (hw * tp.head_input).transpose();
    logits.array() += hb;
    return logits;
  }

  /// Single-window convenience; `window` is L x d.
  Scalar forward_window(const Matrix<Scalar>& window, std::mt19937_64* dropout_rng = nullptr) const {
    const std::vector<Matrix<Scalar>> one{window};
    return forward(pack_batch<Scalar>(one), 1, dropout_rng)(0);
  }

  /// Accumulates d(sum_b dlogits_b * logit_b)/d(params) into `grad`.
  void backward(const Tape& tp, const Vector<Scalar>& dlogits, Vector<Scalar>& grad) const {
    const Eigen::Index h = config_.hidden;
    const Eigen::Index batch = tp.batch;
    const Eigen::Index length = tp.length;
    const Eigen::Index total = length * batch;

    const auto hw = view(params_, layout_[head_weight_]);
    view(grad, layout_[head_weight_]).noalias() += dlogits.transpose() * tp.head_input.transpose();
    view(grad, layout_[head_bias_])(0, 0) += dlogits.sum();

    // Gradient w.r.t. the hidden outputs of the current layer, all steps.
    Matrix<Scalar> d_hidden = Matrix<Scalar>::Zero(h, total);
    d_hidden.middleCols((length - 1) * batch, batch) = hw.transpose() * dlogits.transpose();
    if (tp.head_mask.size() > 0) {
      d_hidden.middleCols((length - 1) * batch, batch).array() *= tp.head_mask.array();
    }

    for (std::size_t li = layers_.size(); li-- > 0;) {
      const auto& lt = tp.layers[li];
      const auto& slots = layers_[li];
      const auto w = view(params_, layout_[slots.input_weight]);
      const auto u = view(params_, layout_[slots.recurrent_weight]);

      Matrix<Scalar> dz(4 * h, total);
      Matrix<Scalar> dh_next = Matrix<Scalar>::Zero(h, batch);
      Matrix<Scalar> dc_next = Matrix<Scalar>::Zero(h, batch);
      for (Eigen::Index t = length; t-- > 0;) {
        const auto gates = lt.gates.middleCols(t * batch, batch);
        const auto ig = gates.topRows(h).array();
        const auto fg = gates.middleRows(h, h).array();
        const auto gg = gates.middleRows(2 * h, h).array();
        const auto og = gates.bottomRows(h).array();
        const Matrix<Scalar> tc = lt.cell.middleCols(t * batch, batch).array().tanh().matrix();

        const Matrix<Scalar> dh = d_hidden.middleCols(t * batch, batch) + dh_next;
        const Matrix<Scalar> dc =
            (dh.array() * og * (Scalar(1) - tc.array().square())).matrix() + dc_next;

        auto dzt = dz.middleCols(t * batch, batch);
        dzt.topRows(h) = (dc.array() * gg * ig * (Scalar(1) - ig)).matrix();
        if (t > 0) {
          dzt.middleRows(h, h) =
              (dc.array() * lt.cell.middleCols((t - 1) * batch, batch).array() * fg * (Scalar(1) - fg)).matrix();
        } else {
          dzt.middleRows(h, h).setZero();
        }
        dzt.middleRows(2 * h, h) = (dc.array() * ig * (Scalar(1) - gg.square())).matrix();
        dzt.bottomRows(h) = (dh.array() * tc.array() * og * (Scalar(1) - og)).matrix();

        dc_next = (dc.array() * fg).matrix();
        dh_next.noalias() = u.transpose() * dzt;
      }

      view(grad, layout_[slots.input_weight]).noalias() += dz * lt.input.transpose();
      if (length > 1) {
        view(grad, layout_[slots.recurrent_weight]).noalias() +=
            dz.rightCols((length - 1) * batch) * lt.hidden.leftCols((length - 1) * batch).transpose();
      }
      view(grad, layout_[slots.bias]).col(0) += dz.rowwise().sum();

      if (li > 0) {
        d_hidden.noalias() = w.transpose() * dz;
        if (lt.mask.size() > 0) d_hidden.array() *= lt.mask.array();
      }
    }
  }

 private:
  static Scalar sigmoid_(Scalar v) {
    if (v >= 0) return Scalar(1) / (Scalar(1) + std::exp(-v));
    const Scalar e = std::exp(v);
    return e / (Scalar(1) + e);
  }

  LstmConfig config_;
  ParamLayout layout_;
  std::vector<LayerSlots> layers_;
  int head_weight_ = -1;
  int head_bias_ = -1;
  Vector<Scalar> params_;
};

}  // namespace onsetwarn::nn
