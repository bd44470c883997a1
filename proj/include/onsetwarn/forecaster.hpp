#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "onsetwarn/gbdt.hpp"
#include "onsetwarn/labeling.hpp"
#include "onsetwarn/nn/lstm.hpp"
#include "onsetwarn/nn/tcn.hpp"

namespace onsetwarn {

enum class ModelKind { Gbdt, Lstm, Tcn };

std::string_view to_string(ModelKind kind) noexcept;
/// Accepts "gbdt", "lstm", "tcn". Throws ConfigError otherwise.
ModelKind parse_model_kind(std::string_view name);

using LstmModel = nn::Lstm<double>;
using TcnModel = nn::Tcn<double>;
using Forecaster = std::variant<GbdtModel, LstmModel, TcnModel>;

ModelKind kind_of(const Forecaster& model) noexcept;

/// One logit per sample, in sample order.
VectorXd predict_logits(const Forecaster& model, std::span<const WindowSample> samples);
/// sigmoid(logit) per sample, always strictly inside (0, 1).
std::vector<double> predict_scores(const Forecaster& model, std::span<const WindowSample> samples);

/// Versioned JSON document; layout described in docs/model_format.md.
std::string serialize_model(const Forecaster& model);
Forecaster deserialize_model(std::string_view text);

void save_model(const Forecaster& model, const std::filesystem::path& path);
Forecaster load_model(const std::filesystem::path& path);

}  // namespace onsetwarn
