#include "onsetwarn/config.hpp"

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "onsetwarn/csv.hpp"
#include "onsetwarn/error.hpp"

namespace onsetwarn {

namespace {

constexpr std::string_view kModule = "cli";

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorCode::ConfigError, kModule, "invalid value '" + std::string(value) + "' for key " + std::string(key));
}

struct Field {
  std::string_view key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

int to_int(std::string_view key, std::string_view v) {
  const auto parsed = csv::parse_int(v);
  if (!parsed || *parsed < INT32_MIN || *parsed > INT32_MAX) bad_value(key, v);
  return static_cast<int>(*parsed);
}

double to_double(std::string_view key, std::string_view v) {
  const auto parsed = csv::parse_double(v);
  if (!parsed) bad_value(key, v);
  return *parsed;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v);
}

std::uint64_t to_seed(std::string_view key, std::string_view v) {
  const auto parsed = csv::parse_int(v);
  if (!parsed || *parsed < 0) bad_value(key, v);
  return static_cast<std::uint64_t>(*parsed);
}

template <typename T>
std::vector<T> to_list(std::string_view key, std::string_view v, T (*one)(std::string_view, std::string_view)) {
  std::vector<T> out;
  if (csv::trim(v).empty()) return out;
  for (const auto part : csv::split(v)) out.push_back(one(key, csv::trim(part)));
  return out;
}

std::string show(bool v) { return v ? "true" : "false"; }
std::string show(int v) { return std::to_string(v); }
std::string show(std::uint64_t v) { return std::to_string(v); }
std::string show(double v) { return csv::format_number(v); }

template <typename T>
std::string show_list(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + show(values[i]);
  return out;
}

#define OW_INT(name, member) \
  Field{name, [](const RunConfig& c) { return show(c.member); }, [](RunConfig& c, std::string_view v) { c.member = to_int(name, v); }}
#define OW_REAL(name, member)                                        \
  Field{name, [](const RunConfig& c) { return show(c.member); }, \
        [](RunConfig& c, std::string_view v) { c.member = to_double(name, v); }}
#define OW_BOOL(name, member) \
  Field{name, [](const RunConfig& c) { return show(c.member); }, [](RunConfig& c, std::string_view v) { c.member = to_bool(name, v); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"input", [](const RunConfig& c) { return c.input; }, [](RunConfig& c, std::string_view v) { c.input = v; }},
      Field{"out", [](const RunConfig& c) { return c.out; }, [](RunConfig& c, std::string_view v) { c.out = v; }},
      Field{"seed", [](const RunConfig& c) { return show(c.seed); },
            [](RunConfig& c, std::string_view v) { c.seed = to_seed("seed", v); }},
      Field{"model", [](const RunConfig& c) { return c.model; }, [](RunConfig& c, std::string_view v) { c.model = v; }},
      Field{"split.train_years", [](const RunConfig& c) { return show_list(c.train_years); },
            [](RunConfig& c, std::string_view v) { c.train_years = to_list<int>("split.train_years", v, to_int); }},
      OW_INT("split.val_year", val_year),
      OW_INT("split.test_year", test_year),
      OW_INT("labels.gap", labels.gap),
      OW_INT("labels.h_min", labels.h_min),
      OW_INT("labels.h_max", labels.h_max),
      OW_INT("labels.window", labels.window),
      OW_BOOL("labels.count_year_opening_event", labels.count_year_opening_event),
      OW_BOOL("features.normalize_cyclic", normalize_cyclic),
      OW_INT("gbdt.n_estimators", gbdt.n_estimators),
      OW_REAL("gbdt.learning_rate", gbdt.learning_rate),
      OW_INT("gbdt.max_depth", gbdt.max_depth),
      OW_REAL("gbdt.subsample", gbdt.subsample),
      OW_REAL("gbdt.colsample", gbdt.colsample),
      OW_INT("gbdt.max_bins", gbdt.max_bins),
      OW_INT("gbdt.min_samples_leaf", gbdt.min_samples_leaf),
      OW_REAL("gbdt.lambda", gbdt.lambda),
      OW_REAL("gbdt.pos_weight", gbdt.pos_weight),
      OW_INT("lstm.hidden", lstm.hidden),
      OW_INT("lstm.layers", lstm.layers),
      OW_REAL("lstm.dropout", lstm.dropout),
      OW_INT("tcn.channels", tcn.channels),
      OW_INT("tcn.levels", tcn.levels),
      OW_INT("tcn.kernel", tcn.kernel),
      OW_INT("tcn.convs_per_block", tcn.convs_per_block),
      OW_REAL("tcn.dropout", tcn.dropout),
      OW_INT("train.max_epochs", train.max_epochs),
      OW_INT("train.patience", train.patience),
      OW_INT("train.batch_size", train.batch_size),
      OW_REAL("train.grad_clip_norm", train.grad_clip_norm),
      OW_REAL("train.learning_rate", train.optimizer.learning_rate),
      OW_REAL("train.weight_decay", train.optimizer.weight_decay),
      OW_REAL("train.beta1", train.optimizer.beta1),
      OW_REAL("train.beta2", train.optimizer.beta2),
      OW_REAL("train.epsilon", train.optimizer.epsilon),
      OW_REAL("train.pos_weight", train.pos_weight),
      Field{"train.early_stop",
            [](const RunConfig& c) {
              return std::string(c.train.early_stop == EarlyStopMetric::ValidationLoss ? "val_loss" : "val_f1");
            },
            [](RunConfig& c, std::string_view v) {
              if (v == "val_loss") {
                c.train.early_stop = EarlyStopMetric::ValidationLoss;
              } else if (v == "val_f1") {
                c.train.early_stop = EarlyStopMetric::ValidationF1;
              } else {
                bad_value("train.early_stop", v);
              }
            }},
      Field{"eval.threshold_grid",
            [](const RunConfig& c) {
              return show_list(c.evaluation.threshold_grid.empty() ? default_threshold_grid()
                                                                   : c.evaluation.threshold_grid);
            },
            [](RunConfig& c, std::string_view v) {
              c.evaluation.threshold_grid = to_list<double>("eval.threshold_grid", v, to_double);
            }},
      OW_INT("eval.episode_gap", evaluation.episode_gap),
      OW_INT("eval.near_miss_slack", evaluation.near_miss_slack),
      Field{"synth.years", [](const RunConfig& c) { return show_list(c.synth.years); },
            [](RunConfig& c, std::string_view v) { c.synth.years = to_list<int>("synth.years", v, to_int); }},
      OW_REAL("synth.rain_prob_amplitude", synth.rain_prob_amplitude),
      OW_REAL("synth.rain_peak_doy", synth.rain_peak_doy),
      OW_REAL("synth.rain_persistence", synth.rain_persistence),
      OW_REAL("synth.rain_amount_scale", synth.rain_amount_scale),
      OW_REAL("synth.temp_annual_mean", synth.temp_annual_mean),
      OW_REAL("synth.temp_amplitude", synth.temp_amplitude),
      OW_REAL("synth.temp_peak_doy", synth.temp_peak_doy),
      OW_REAL("synth.temp_noise", synth.temp_noise),
      OW_REAL("synth.temp_range_mean", synth.temp_range_mean),
      OW_REAL("synth.humidity_base", synth.humidity_base),
      OW_REAL("synth.humidity_rain_coupling", synth.humidity_rain_coupling),
      OW_REAL("synth.humidity_rain_lag_coupling", synth.humidity_rain_lag_coupling),
      OW_REAL("synth.humidity_temp_coupling", synth.humidity_temp_coupling),
      OW_REAL("synth.humidity_noise", synth.humidity_noise),
      OW_INT("synth.trigger_humid_days", synth.trigger_humid_days),
      OW_REAL("synth.trigger_rain_mm", synth.trigger_rain_mm),
      OW_REAL("synth.trigger_temp_min", synth.trigger_temp_min),
      OW_REAL("synth.trigger_temp_max", synth.trigger_temp_max),
      OW_INT("synth.incubation_days", synth.incubation_days),
      OW_INT("synth.episode_min", synth.episode_min),
      OW_INT("synth.episode_max", synth.episode_max),
      OW_INT("synth.min_gap", synth.min_gap),
      OW_REAL("synth.label_noise", synth.label_noise),
  };
  return table;
}

#undef OW_INT
#undef OW_REAL
#undef OW_BOOL

}  // namespace

void set_config_value(RunConfig& config, std::string_view key, std::string_view value) {
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(config, value);
      return;
    }
  }
  throw Error(ErrorCode::ConfigError, kModule, "unknown key " + std::string(key));
}

void apply_config_text(RunConfig& config, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view = csv::trim(line);
    if (number == 1 && view.starts_with("\xEF\xBB\xBF")) view = csv::trim(view.substr(3));
    if (view.empty() || view.front() == '#') continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::ConfigError, kModule, "line " + std::to_string(number) + ": expected key = value");
    }
    try {
      set_config_value(config, csv::trim(view.substr(0, eq)), csv::trim(view.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, kModule, "line " + std::to_string(number) + ": " + e.what());
    }
  }
}

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  apply_config_text(config, text);
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, kModule, "cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string format_config(const RunConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(config) + "\n";
  return out;
}

RunConfig resolve(RunConfig c) {
  const auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigError, kModule, what); };
  if (c.model != "gbdt" && c.model != "lstm" && c.model != "tcn" && c.model != "all") {
    fail("model must be one of gbdt, lstm, tcn, all; got '" + c.model + "'");
  }
  if (c.out.empty()) fail("out must name a directory");
  if (c.train_years.empty()) fail("split.train_years is empty");
  if (c.labels.gap < 1 || c.labels.h_min < 1 || c.labels.h_min > c.labels.h_max || c.labels.window < 1) {
    fail("labels require gap >= 1, 1 <= h_min <= h_max and window >= 1");
  }
  if (c.gbdt.n_estimators < 1 || c.gbdt.max_depth < 1 || c.gbdt.learning_rate <= 0.0 || c.gbdt.subsample <= 0.0 ||
      c.gbdt.subsample > 1.0 || c.gbdt.colsample <= 0.0 || c.gbdt.colsample > 1.0 || c.gbdt.max_bins < 2) {
    fail("gbdt parameters out of range");
  }
  if (c.lstm.hidden < 1 || c.lstm.layers < 1 || c.lstm.dropout < 0.0 || c.lstm.dropout >= 1.0) {
    fail("lstm parameters out of range");
  }
  if (c.tcn.channels < 1 || c.tcn.levels < 1 || c.tcn.kernel < 1 || c.tcn.convs_per_block < 1 || c.tcn.dropout < 0.0 ||
      c.tcn.dropout >= 1.0) {
    fail("tcn parameters out of range");
  }
  if (c.train.max_epochs < 1 || c.train.patience < 1 || c.train.batch_size < 1) {
    fail("train.max_epochs, train.patience and train.batch_size must be positive");
  }
  if (c.train.patience > c.train.max_epochs) fail("train.patience must not exceed train.max_epochs");
  if (c.evaluation.episode_gap < 1 || c.evaluation.near_miss_slack < 0) {
    fail("eval.episode_gap >= 1 and eval.near_miss_slack >= 0 required");
  }
  for (const double t : c.evaluation.threshold_grid) {
    if (!(t > 0.0 && t < 1.0)) fail("eval.threshold_grid values must lie in (0, 1)");
  }
  c.synth.seed = c.seed;
  c.gbdt.seed = c.seed;
  c.train.seed = c.seed;
  c.evaluation.h_min = c.labels.h_min;
  c.evaluation.h_max = c.labels.h_max;
  if (c.evaluation.threshold_grid.empty()) c.evaluation.threshold_grid = default_threshold_grid();
  c.train.f1_grid = c.evaluation.threshold_grid;
  return c;
}

std::filesystem::path input_path(const RunConfig& config) {
  if (!config.input.empty()) return config.input;
  return std::filesystem::path(config.out) / "synthetic.csv";
}

std::vector<std::string> selected_models(const RunConfig& config) {
  if (config.model == "all") return {"gbdt", "lstm", "tcn"};
  return {config.model};
}

}  // namespace onsetwarn
