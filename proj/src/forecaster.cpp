#include "onsetwarn/forecaster.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "onsetwarn/error.hpp"
#include "onsetwarn/nn/loss.hpp"
#include "onsetwarn/trainer.hpp"

namespace onsetwarn {

namespace {

using nlohmann::json;

constexpr std::string_view kModule = "models";
constexpr std::string_view kFormat = "onset-warn-model";
constexpr int kVersion = 1;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

json parameters_to_json(const nn::ParamLayout& layout, const VectorXd& params) {
  json out = json::array();
  for (const auto& slot : layout.slots()) {
    std::vector<double> values(params.data() + slot.offset, params.data() + slot.offset + slot.size());
    out.push_back({{"name", slot.name}, {"rows", slot.rows}, {"cols", slot.cols}, {"values", std::move(values)}});
  }
  return out;
}

void parameters_from_json(const json& j, const nn::ParamLayout& layout, VectorXd& params) {
  const auto& slots = layout.slots();
  if (!j.is_array() || j.size() != slots.size()) {
    throw Error(ErrorCode::FormatError, kModule, "parameter list does not match the model layout");
  }
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto& entry = j[i];
    const auto& slot = slots[i];
    const auto values = entry.at("values").get<std::vector<double>>();
    if (entry.at("name").get<std::string>() != slot.name || entry.at("rows").get<Eigen::Index>() != slot.rows ||
        entry.at("cols").get<Eigen::Index>() != slot.cols || static_cast<Eigen::Index>(values.size()) != slot.size()) {
      throw Error(ErrorCode::FormatError, kModule, "parameter block '" + slot.name + "' has an unexpected shape");
    }
    std::copy(values.begin(), values.end(), params.data() + slot.offset);
  }
}

json gbdt_to_json(const GbdtModel& m) {
  json trees = json::array();
  for (const auto& tree : m.trees) {
    json nodes = json::array();
    for (const auto& n : tree.nodes) nodes.push_back(json::array({n.feature, n.threshold, n.bin, n.left, n.right, n.value}));
    trees.push_back(std::move(nodes));
  }
  return {{"base_score", m.base_score},
          {"learning_rate", m.learning_rate},
          {"num_features", m.num_features},
          {"node_fields", {"feature", "threshold", "bin", "left", "right", "value"}},
          {"trees", std::move(trees)}};
}

GbdtModel gbdt_from_json(const json& j) {
  GbdtModel m;
  m.base_score = j.at("base_score").get<double>();
  m.learning_rate = j.at("learning_rate").get<double>();
  m.num_features = j.at("num_features").get<Eigen::Index>();
  for (const auto& jt : j.at("trees")) {
    RegressionTree tree;
    for (const auto& jn : jt) {
      TreeNode n;
      n.feature = jn.at(0).get<int>();
      n.threshold = jn.at(1).get<double>();
      n.bin = jn.at(2).get<int>();
      n.left = jn.at(3).get<int>();
      n.right = jn.at(4).get<int>();
      n.value = jn.at(5).get<double>();
      tree.nodes.push_back(n);
    }
    const auto count = static_cast<int>(tree.nodes.size());
    for (const auto& n : tree.nodes) {
      if (!n.is_leaf() && (n.feature >= m.num_features || n.left <= 0 || n.right <= 0 || n.left >= count ||
                           n.right >= count)) {
        throw Error(ErrorCode::FormatError, kModule, "tree node refers outside the model");
      }
    }
    if (tree.nodes.empty()) throw Error(ErrorCode::FormatError, kModule, "empty tree");
    m.trees.push_back(std::move(tree));
  }
  return m;
}

}  // namespace

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Gbdt: return "gbdt";
    case ModelKind::Lstm: return "lstm";
    case ModelKind::Tcn: return "tcn";
  }
  return "gbdt";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "gbdt") return ModelKind::Gbdt;
  if (name == "lstm") return ModelKind::Lstm;
  if (name == "tcn") return ModelKind::Tcn;
  throw Error(ErrorCode::ConfigError, "cli", "unknown model '" + std::string(name) + "'");
}

ModelKind kind_of(const Forecaster& model) noexcept { return static_cast<ModelKind>(model.index()); }

VectorXd predict_logits(const Forecaster& model, std::span<const WindowSample> samples) {
  return std::visit(Overloaded{[&](const GbdtModel& m) {
                                 VectorXd out(static_cast<Eigen::Index>(samples.size()));
                                 for (std::size_t i = 0; i < samples.size(); ++i) {
                                   out(static_cast<Eigen::Index>(i)) = m.margin(flatten_window(samples[i].window));
                                 }
                                 return out;
                               },
                               [&](const auto& m) { return onsetwarn::predict_logits(m, samples); }},
                    model);
}

std::vector<double> predict_scores(const Forecaster& model, std::span<const WindowSample> samples) {
  const VectorXd logits = predict_logits(model, samples);
  std::vector<double> scores(static_cast<std::size_t>(logits.size()));
  for (Eigen::Index i = 0; i < logits.size(); ++i) scores[static_cast<std::size_t>(i)] = nn::probability(logits(i));
  return scores;
}

std::string serialize_model(const Forecaster& model) {
  json doc = {{"format", kFormat}, {"version", kVersion}, {"kind", to_string(kind_of(model))}};
  std::visit(Overloaded{[&](const GbdtModel& m) { doc["gbdt"] = gbdt_to_json(m); },
                        [&](const LstmModel& m) {
                          const auto& c = m.config();
                          doc["config"] = {{"input_dim", c.input_dim},
                                           {"hidden", c.hidden},
                                           {"layers", c.layers},
                                           {"dropout", c.dropout}};
                          doc["parameters"] = parameters_to_json(m.layout(), m.parameters());
                        },
                        [&](const TcnModel& m) {
                          const auto& c = m.config();
                          doc["config"] = {{"input_dim", c.input_dim},     {"channels", c.channels},
                                           {"levels", c.levels},           {"kernel", c.kernel},
                                           {"convs_per_block", c.convs_per_block}, {"dropout", c.dropout}};
                          doc["parameters"] = parameters_to_json(m.layout(), m.parameters());
                        }},
             model);
  return doc.dump() + "\n";
}

Forecaster deserialize_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, kModule, std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kFormat) {
      throw Error(ErrorCode::FormatError, kModule, "not an onset-warn model file");
    }
    if (doc.at("version").get<int>() != kVersion) {
      throw Error(ErrorCode::FormatError, kModule,
                  "unsupported model file version " + std::to_string(doc.at("version").get<int>()));
    }
    switch (parse_model_kind(doc.at("kind").get<std::string>())) {
      case ModelKind::Gbdt:
        return gbdt_from_json(doc.at("gbdt"));
      case ModelKind::Lstm: {
        const auto& c = doc.at("config");
        LstmModel m(nn::LstmConfig{c.at("input_dim").get<int>(), c.at("hidden").get<int>(), c.at("layers").get<int>(),
                                   c.at("dropout").get<double>()});
        parameters_from_json(doc.at("parameters"), m.layout(), m.parameters());
        return m;
      }
      case ModelKind::Tcn: {
        const auto& c = doc.at("config");
        TcnModel m(nn::TcnConfig{c.at("input_dim").get<int>(), c.at("channels").get<int>(), c.at("levels").get<int>(),
                                 c.at("kernel").get<int>(), c.at("convs_per_block").get<int>(),
                                 c.at("dropout").get<double>()});
        parameters_from_json(doc.at("parameters"), m.layout(), m.parameters());
        return m;
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, kModule, std::string("malformed model file: ") + e.what());
  }
  throw Error(ErrorCode::FormatError, kModule, "unknown model kind");
}

void save_model(const Forecaster& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, kModule, "cannot write " + path.string());
  out << serialize_model(model);
}

Forecaster load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, kModule, "model file " + path.string() + " not found");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace onsetwarn
