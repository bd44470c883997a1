#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "onsetwarn/evaluation.hpp"
#include "onsetwarn/gbdt.hpp"
#include "onsetwarn/labeling.hpp"
#include "onsetwarn/nn/lstm.hpp"
#include "onsetwarn/nn/tcn.hpp"
#include "onsetwarn/synth.hpp"
#include "onsetwarn/trainer.hpp"

namespace onsetwarn {

/// Everything a run depends on. `seed` feeds the generator, the tree
/// subsampling and the neural initialisation/shuffling alike.
struct RunConfig {
  std::string input;          // empty: <out>/synthetic.csv
  std::string out = "run";
  std::vector<int> train_years = {2020, 2021};
  int val_year = 2022;
  int test_year = 2023;
  LabelConfig labels;
  bool normalize_cyclic = false;
  std::string model = "all";  // gbdt | lstm | tcn | all
  std::uint64_t seed = 42;
  GbdtConfig gbdt;
  nn::LstmConfig lstm;
  nn::TcnConfig tcn;
  TrainConfig train;
  EvaluationConfig evaluation;
  SynthConfig synth;
};

/// Flat `key = value` text. Blank lines and `#` comments are skipped; unknown
/// keys and malformed values throw ConfigError naming the line.
void apply_config_text(RunConfig& config, std::string_view text);
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Sets one key; throws ConfigError.
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);

/// Every key in a fixed order, one `key = value` per line.
std::string format_config(const RunConfig& config);

/// Pushes the shared seed and label horizon into the per-module configs and
/// checks cross-field constraints. Throws ConfigError.
RunConfig resolve(RunConfig config);

/// The dataset CSV: `input`, or the generator output inside `out`.
std::filesystem::path input_path(const RunConfig& config);

/// Models selected by `config.model`, in the order gbdt, lstm, tcn.
std::vector<std::string> selected_models(const RunConfig& config);

}  // namespace onsetwarn
