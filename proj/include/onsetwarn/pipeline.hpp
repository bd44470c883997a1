#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "onsetwarn/config.hpp"
#include "onsetwarn/evaluation.hpp"
#include "onsetwarn/features.hpp"
#include "onsetwarn/forecaster.hpp"
#include "onsetwarn/ingest.hpp"
#include "onsetwarn/labeling.hpp"

namespace onsetwarn {

/// Normalized window samples per chronological split.
struct WindowSet {
  std::vector<WindowSample> train;
  std::vector<WindowSample> validation;
  std::vector<WindowSample> test;
};

struct PreparedData {
  std::vector<YearLabels> labels;      // train years, then validation, then test
  std::vector<YearFeatures> features;  // unnormalized, aligned with labels
  Normalizer normalizer;
  WindowSet windows;
};

/// Labels, features and windows for the configured split. The normalizer is
/// fitted on the training years' daily rows only.
PreparedData prepare_data(const RunConfig& config, std::span<const YearSeries> series);

/// Binary window file, layout in docs/windows_format.md.
void write_windows(const std::filesystem::path& path, const WindowSet& windows);
WindowSet read_windows(const std::filesystem::path& path);

std::string normalizer_csv(const Normalizer& normalizer);
std::string onsets_csv(std::span<const YearLabels> labels);
/// Reads `year,event_date` rows back into per-year lists.
std::vector<EventList> read_onsets(const std::filesystem::path& path);

struct TrainedModel {
  Forecaster model;
  TrainLog log;
};

TrainedModel train_model(ModelKind kind, const RunConfig& config, const WindowSet& windows);

/// Threshold chosen on the validation year, then applied to both the
/// validation and the test year.
struct ModelEvaluation {
  std::string model;
  double threshold = 0.5;
  EvaluationResult validation;
  EvaluationResult test;
  std::vector<double> test_scores;
  std::vector<SampleKey> test_samples;
};

ModelEvaluation evaluate_model(std::string model_name, const Forecaster& model, const RunConfig& config,
                               const WindowSet& windows, std::span<const EventList> events);

std::string metrics_csv(std::span<const ModelEvaluation> evaluations);
std::string events_csv(std::span<const ModelEvaluation> evaluations);
std::string alerts_csv(std::span<const ModelEvaluation> evaluations);

/// `# command` header followed by the full config; loadable with load_config.
std::string manifest_text(const RunConfig& config, std::string_view command);

// Subcommands. Each writes run-manifest.txt into config.out and throws on
// failure.
void cmd_synth(const RunConfig& config);
void cmd_prepare(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_evaluate(const RunConfig& config, bool write_svg);
/// Returns the rendered text, which is also written to report.txt.
std::string cmd_report(const RunConfig& config);
void cmd_feature_export(const RunConfig& config);
void cmd_label_export(const RunConfig& config);

}  // namespace onsetwarn
