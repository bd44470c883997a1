#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "onsetwarn/config.hpp"
#include "onsetwarn/error.hpp"
#include "onsetwarn/logging.hpp"
#include "onsetwarn/pipeline.hpp"

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::string> model;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> input;
  std::vector<std::string> overrides;
};

onsetwarn::RunConfig build_config(const GlobalOptions& g) {
  onsetwarn::RunConfig config;
  if (!g.config_path.empty()) config = onsetwarn::load_config(g.config_path);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw onsetwarn::Error(onsetwarn::ErrorCode::ConfigError, "cli", "--set expects key=value, got '" + kv + "'");
    }
    onsetwarn::apply_config_text(config, kv);
  }
  if (g.model) config.model = *g.model;
  if (g.seed) config.seed = *g.seed;
  if (g.out) config.out = *g.out;
  if (g.input) config.input = *g.input;
  return onsetwarn::resolve(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Onset early-warning pipeline: synthetic data, labeling, training and event-level evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "key = value config file (a run-manifest.txt works too)");
  app.add_option("--model", g.model, "gbdt, lstm, tcn or all");
  app.add_option("--seed", g.seed, "seed for generation, subsampling, initialisation and shuffling");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--input", g.input, "input CSV (default: <out>/synthetic.csv)");
  app.add_option("--set", g.overrides, "override one config key, e.g. --set train.max_epochs=20");

  auto* synth = app.add_subcommand("synth", "generate the synthetic dataset and trigger sidecar");
  auto* prepare = app.add_subcommand("prepare", "label, featurize, normalize and window the input CSV");
  auto* train = app.add_subcommand("train", "train the selected models on prepared windows");
  auto* evaluate = app.add_subcommand("evaluate", "score validation and test years and write evaluation CSVs");
  bool svg = false;
  evaluate->add_flag("--svg", svg, "also write timeline.svg for the test year");
  auto* report = app.add_subcommand("report", "render report.txt from the evaluation CSVs");
  auto* config_cmd = app.add_subcommand("config", "print the resolved config");
  bool defaults = false;
  config_cmd->add_flag("--defaults", defaults, "print the built-in defaults instead");
  auto* feature = app.add_subcommand("feature", "feature utilities");
  auto* feature_export = feature->add_subcommand("export", "write features.csv for every input year");
  feature->require_subcommand(1);
  auto* label = app.add_subcommand("label", "label utilities");
  auto* label_export = label->add_subcommand("export", "write labels.csv for every input year");
  label->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  onsetwarn::init_logging();
  try {
    if (config_cmd->parsed() && defaults) {
      std::cout << onsetwarn::format_config(onsetwarn::RunConfig{});
      return EXIT_SUCCESS;
    }
    const onsetwarn::RunConfig config = build_config(g);
    if (synth->parsed()) {
      onsetwarn::cmd_synth(config);
    } else if (prepare->parsed()) {
      onsetwarn::cmd_prepare(config);
    } else if (train->parsed()) {
      onsetwarn::cmd_train(config);
    } else if (evaluate->parsed()) {
      onsetwarn::cmd_evaluate(config, svg);
    } else if (report->parsed()) {
      std::cout << onsetwarn::cmd_report(config);
    } else if (config_cmd->parsed()) {
      std::cout << onsetwarn::format_config(config);
    } else if (feature_export->parsed()) {
      onsetwarn::cmd_feature_export(config);
    } else if (label_export->parsed()) {
      onsetwarn::cmd_label_export(config);
    }
  } catch (const std::exception& e) {
    std::cerr << "onset-warn: error: " << e.what() << '\n';
    return EXIT_FAILURE;
  }
  return EXIT_SUCCESS;
}
