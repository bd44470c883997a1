#include "onsetwarn/pipeline.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "onsetwarn/csv.hpp"
#include "onsetwarn/error.hpp"
#include "onsetwarn/report.hpp"
#include "onsetwarn/synth.hpp"

namespace onsetwarn {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kModule = "cli";
constexpr char kWindowMagic[8] = {'O', 'W', 'W', 'I', 'N', 'D', 'O', 'W'};
constexpr std::uint32_t kWindowVersion = 1;

std::string read_file(const fs::path& path, std::string_view what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, kModule, std::string(what) + " " + path.string() + " not found");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_file(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::IoError, kModule, "cannot write " + path.string());
}

fs::path out_dir(const RunConfig& config) {
  const fs::path dir = config.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, kModule, "cannot create output directory " + dir.string());
  return dir;
}

void write_manifest(const RunConfig& config, std::string_view command) {
  write_file(out_dir(config) / "run-manifest.txt", manifest_text(config, command));
}

// Little-endian fixed-width encoding, independent of the host.
void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_i32(std::string& buf, std::int32_t v) { put_u32(buf, static_cast<std::uint32_t>(v)); }
void put_f64(std::string& buf, double v) { put_u64(buf, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::uint64_t uint(int bytes) {
    need(static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(bytes);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
  std::uint64_t u64() { return uint(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string_view bytes(std::size_t n) {
    need(n);
    const auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  bool done() const noexcept { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw Error(ErrorCode::FormatError, kModule, "window file is truncated");
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string optional_text(const std::optional<double>& v) { return v ? csv::format_fixed(*v, 6) : "none"; }

const EventList* events_for(std::span<const EventList> events, int year) {
  for (const auto& e : events) {
    if (e.year == year) return &e;
  }
  return nullptr;
}

std::vector<YearSeries> load_series(const RunConfig& config) {
  const auto path = input_path(config);
  const auto raw = parse_dataset(read_file(path, "input CSV"));
  CleaningStats stats;
  auto series = clean_years(raw, &stats);
  spdlog::info("read {} years from {}; imputed {} cells, swapped {} min/max pairs, clamped {} values, {} calendar gaps",
               series.size(), path.string(), stats.imputed_cells, stats.swapped_min_max, stats.clamped_values,
               stats.calendar_gaps);
  return series;
}

std::vector<const YearSeries*> split_years(const RunConfig& config, std::span<const YearSeries> series) {
  [[maybe_unused]] const ChronoSplit split = make_split(series, config.train_years, config.val_year, config.test_year);
  std::vector<const YearSeries*> out;
  for (const int y : config.train_years) out.push_back(find_year(series, y));
  out.push_back(find_year(series, config.val_year));
  out.push_back(find_year(series, config.test_year));
  return out;
}

}  // namespace

PreparedData prepare_data(const RunConfig& config, std::span<const YearSeries> series) {
  const auto years = split_years(config, series);
  const std::size_t n_train = config.train_years.size();

  PreparedData data;
  for (const YearSeries* ys : years) {
    data.labels.push_back(label_year(*ys, config.labels));
    data.features.push_back(build_features(*ys));
  }
  const MatrixXd train_rows = stack_rows(std::span<const YearFeatures>(data.features).first(n_train));
  const auto mask = cyclic_passthrough_mask(config.normalize_cyclic);
  data.normalizer = fit_normalizer(train_rows, mask);

  for (std::size_t i = 0; i < years.size(); ++i) {
    const YearFeatures normed{data.features[i].year, data.features[i].dates,
                              apply_normalizer(data.features[i].values, data.normalizer)};
    auto samples = build_windows(normed, data.labels[i].sequences, config.labels);
    auto& target = i < n_train ? data.windows.train : (i == n_train ? data.windows.validation : data.windows.test);
    target.insert(target.end(), std::make_move_iterator(samples.begin()), std::make_move_iterator(samples.end()));
  }
  return data;
}

void write_windows(const fs::path& path, const WindowSet& windows) {
  const auto& names = feature_names();
  std::uint32_t length = 0;
  for (const auto* split : {&windows.train, &windows.validation, &windows.test}) {
    if (!split->empty()) length = static_cast<std::uint32_t>(split->front().window.rows());
  }
  std::string buf(kWindowMagic, sizeof kWindowMagic);
  put_u32(buf, kWindowVersion);
  put_u32(buf, length);
  put_u32(buf, static_cast<std::uint32_t>(names.size()));
  for (const auto& n : names) {
    put_u32(buf, static_cast<std::uint32_t>(n.size()));
    buf += n;
  }
  for (const auto* split : {&windows.train, &windows.validation, &windows.test}) {
    put_u64(buf, split->size());
    for (const auto& s : *split) {
      if (s.window.rows() != length || s.window.cols() != static_cast<Eigen::Index>(names.size())) {
        throw Error(ErrorCode::ShapeMismatch, kModule, "window shapes differ within one file");
      }
      put_i32(buf, year_of(s.prediction_date));
      put_i32(buf, static_cast<std::int32_t>(static_cast<unsigned>(s.prediction_date.month())));
      put_i32(buf, static_cast<std::int32_t>(static_cast<unsigned>(s.prediction_date.day())));
      put_i32(buf, s.label);
      for (Eigen::Index t = 0; t < s.window.rows(); ++t) {
        for (Eigen::Index j = 0; j < s.window.cols(); ++j) put_f64(buf, s.window(t, j));
      }
    }
  }
  write_file(path, buf);
}

WindowSet read_windows(const fs::path& path) {
  const std::string data = read_file(path, "prepared windows");
  Reader in(data);
  if (in.bytes(sizeof kWindowMagic) != std::string_view(kWindowMagic, sizeof kWindowMagic)) {
    throw Error(ErrorCode::FormatError, kModule, path.string() + " is not a window file");
  }
  if (const auto v = in.u32(); v != kWindowVersion) {
    throw Error(ErrorCode::FormatError, kModule, "unsupported window file version " + std::to_string(v));
  }
  const auto length = static_cast<Eigen::Index>(in.u32());
  const auto& names = feature_names();
  if (in.u32() != names.size()) throw Error(ErrorCode::FormatError, kModule, "window file feature count differs");
  for (const auto& n : names) {
    if (in.bytes(in.u32()) != n) throw Error(ErrorCode::FormatError, kModule, "window file feature names differ");
  }
  const auto dim = static_cast<Eigen::Index>(names.size());
  WindowSet out;
  for (auto* split : {&out.train, &out.validation, &out.test}) {
    const std::uint64_t count = in.u64();
    for (std::uint64_t k = 0; k < count; ++k) {
      const int y = in.i32();
      const int m = in.i32();
      const int d = in.i32();
      WindowSample s;
      s.prediction_date = Date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                               std::chrono::day{static_cast<unsigned>(d)}};
      if (!s.prediction_date.ok()) throw Error(ErrorCode::FormatError, kModule, "window file holds an invalid date");
      s.year = y;
      s.label = in.i32();
      s.window.resize(length, dim);
      for (Eigen::Index t = 0; t < length; ++t) {
        for (Eigen::Index j = 0; j < dim; ++j) s.window(t, j) = in.f64();
      }
      split->push_back(std::move(s));
    }
  }
  if (!in.done()) throw Error(ErrorCode::FormatError, kModule, "trailing bytes in window file");
  return out;
}

std::string normalizer_csv(const Normalizer& normalizer) {
  std::ostringstream out;
  out << "feature,mu,sigma\n";
  const auto& names = feature_names();
  for (Eigen::Index j = 0; j < normalizer.dim(); ++j) {
    out << names[static_cast<std::size_t>(j)] << ',' << csv::format_number(normalizer.mu(j)) << ','
        << csv::format_number(normalizer.sigma(j)) << '\n';
  }
  return out.str();
}

std::string onsets_csv(std::span<const YearLabels> labels) {
  std::ostringstream out;
  out << "year,event_date\n";
  for (const auto& y : labels) {
    for (const auto& e : y.events.events) out << y.events.year << ',' << format_iso_date(e) << '\n';
  }
  return out.str();
}

std::vector<EventList> read_onsets(const fs::path& path) {
  std::istringstream in(read_file(path, "onset list"));
  std::string line;
  std::getline(in, line);
  if (csv::trim(line) != "year,event_date") throw Error(ErrorCode::FormatError, kModule, "bad header in " + path.string());
  std::vector<EventList> out;
  while (std::getline(in, line)) {
    if (csv::trim(line).empty()) continue;
    const auto cells = csv::split(csv::trim(line));
    const auto year = cells.size() == 2 ? csv::parse_int(cells[0]) : std::nullopt;
    if (!year) throw Error(ErrorCode::FormatError, kModule, "bad row in " + path.string() + ": " + line);
    if (out.empty() || out.back().year != *year) out.push_back(EventList{static_cast<int>(*year), {}});
    out.back().events.push_back(parse_iso_date(cells[1]));
  }
  return out;
}

TrainedModel train_model(ModelKind kind, const RunConfig& config, const WindowSet& windows) {
  if (windows.train.empty()) throw Error(ErrorCode::EmptyTrainingSet, "models", "no training windows");
  const int dim = static_cast<int>(windows.train.front().window.cols());
  TrainedModel out{GbdtModel{}, {}};
  switch (kind) {
    case ModelKind::Gbdt: {
      std::vector<int> y_train;
      std::vector<int> y_val;
      for (const auto& s : windows.train) y_train.push_back(s.label);
      for (const auto& s : windows.validation) y_val.push_back(s.label);
      const MatrixXd x_val = windows.validation.empty() ? MatrixXd() : flatten_samples(windows.validation);
      out.model = train_gbdt(flatten_samples(windows.train), y_train, config.gbdt, x_val, y_val, &out.log);
      break;
    }
    case ModelKind::Lstm: {
      nn::LstmConfig c = config.lstm;
      c.input_dim = dim;
      LstmModel model(c);
      model.initialize(config.seed);
      out.log = train_neural(model, windows.train, windows.validation, config.train);
      out.model = std::move(model);
      break;
    }
    case ModelKind::Tcn: {
      nn::TcnConfig c = config.tcn;
      c.input_dim = dim;
      TcnModel model(c);
      model.initialize(config.seed);
      out.log = train_neural(model, windows.train, windows.validation, config.train);
      out.model = std::move(model);
      break;
    }
  }
  return out;
}

ModelEvaluation evaluate_model(std::string model_name, const Forecaster& model, const RunConfig& config,
                               const WindowSet& windows, std::span<const EventList> events) {
  ModelEvaluation out;
  out.model = std::move(model_name);
  const auto val_scores = predict_scores(model, windows.validation);
  std::vector<int> val_labels;
  for (const auto& s : windows.validation) val_labels.push_back(s.label);
  out.threshold = select_threshold(val_scores, val_labels, config.evaluation.threshold_grid);

  const auto run = [&](std::span<const WindowSample> samples, const std::vector<double>& scores, int year) {
    const auto keys = sample_keys(samples);
    const EventList* ev = events_for(events, year);
    const std::vector<Date> dates = ev ? ev->events : std::vector<Date>{};
    return build_report(scores, keys, dates, out.threshold, config.evaluation);
  };
  out.validation = run(windows.validation, val_scores, config.val_year);
  out.test_scores = predict_scores(model, windows.test);
  out.test_samples = sample_keys(windows.test);
  out.test = run(windows.test, out.test_scores, config.test_year);
  return out;
}

std::string metrics_csv(std::span<const ModelEvaluation> evaluations) {
  std::ostringstream out;
  out << "model,split,threshold,f1,precision,recall,auroc,event_recall,mean_lead_days,alert_precision,"
         "episode_precision,alerts,false_alerts,near_miss_alerts,strict_false_alerts,episodes,near_miss_episodes,"
         "strict_false_episodes\n";
  for (const auto& ev : evaluations) {
    for (const auto& [split, res] : {std::pair<std::string_view, const EvaluationResult*>{"validation", &ev.validation},
                                     {"test", &ev.test}}) {
      const auto& s = res->standard;
      const auto& r = res->report;
      const auto& c = r.counts;
      out << ev.model << ',' << split << ',' << csv::format_fixed(ev.threshold, 2) << ','
          << csv::format_fixed(s.f1, 6) << ',' << csv::format_fixed(s.precision, 6) << ','
          << csv::format_fixed(s.recall, 6) << ',' << optional_text(s.auroc) << ',' << optional_text(r.event_recall)
          << ',' << optional_text(r.mean_lead_days) << ',' << optional_text(r.alert_precision) << ','
          << optional_text(r.episode_precision) << ',' << c.alerts << ',' << c.false_alerts << ','
          << c.near_miss_alerts << ',' << c.strict_false_alerts << ',' << c.episodes << ',' << c.near_miss_episodes
          << ',' << c.strict_false_episodes << '\n';
    }
  }
  return out.str();
}

std::string events_csv(std::span<const ModelEvaluation> evaluations) {
  std::ostringstream out;
  out << "model,split,event_date,detected,lead_days,undetectable\n";
  for (const auto& ev : evaluations) {
    for (const auto& [split, res] : {std::pair<std::string_view, const EvaluationResult*>{"validation", &ev.validation},
                                     {"test", &ev.test}}) {
      for (const auto& e : res->report.events) {
        out << ev.model << ',' << split << ',' << format_iso_date(e.event_date) << ',' << (e.detected ? 1 : 0) << ','
            << (e.lead_days ? std::to_string(*e.lead_days) : "none") << ',' << (e.undetectable ? 1 : 0) << '\n';
      }
    }
  }
  return out.str();
}

std::string alerts_csv(std::span<const ModelEvaluation> evaluations) {
  std::ostringstream out;
  out << "model,split,date,score,class,episode_id\n";
  for (const auto& ev : evaluations) {
    for (const auto& [split, res] : {std::pair<std::string_view, const EvaluationResult*>{"validation", &ev.validation},
                                     {"test", &ev.test}}) {
      for (const auto& a : res->report.alerts) {
        out << ev.model << ',' << split << ',' << format_iso_date(a.date) << ',' << csv::format_fixed(a.score, 6)
            << ',' << to_string(a.classification) << ',' << a.episode_id << '\n';
      }
    }
  }
  return out.str();
}

std::string manifest_text(const RunConfig& config, std::string_view command) {
  return "# onset-warn run manifest\n# command: " + std::string(command) + "\n" + format_config(config);
}

void cmd_synth(const RunConfig& config) {
  const fs::path dir = out_dir(config);
  write_manifest(config, "synth");
  const auto series = generate(config.synth);
  const auto triggers = ground_truth_precursors(config.synth, series);
  write_file(dir / "synthetic.csv", serialize_dataset(std::span<const YearSeries>(series)));
  write_file(dir / "triggers.csv", export_triggers_csv(series, triggers));
  spdlog::info("wrote {} synthetic years to {}", series.size(), (dir / "synthetic.csv").string());
}

void cmd_prepare(const RunConfig& config) {
  const fs::path dir = out_dir(config);
  write_manifest(config, "prepare");
  const auto series = load_series(config);
  const PreparedData data = prepare_data(config, series);
  write_file(dir / "labels.csv", export_labels_csv(data.labels, config.labels));
  write_file(dir / "onsets.csv", onsets_csv(data.labels));
  write_file(dir / "normalizer.csv", normalizer_csv(data.normalizer));
  write_windows(dir / "windows.bin", data.windows);
  spdlog::info("windows: {} train, {} validation, {} test", data.windows.train.size(), data.windows.validation.size(),
               data.windows.test.size());
}

void cmd_train(const RunConfig& config) {
  const fs::path dir = out_dir(config);
  write_manifest(config, "train");
  const WindowSet windows = read_windows(dir / "windows.bin");
  for (const auto& name : selected_models(config)) {
    const ModelKind kind = parse_model_kind(name);
    spdlog::info("training {}", name);
    const TrainedModel trained = train_model(kind, config, windows);
    save_model(trained.model, dir / ("model_" + name + ".json"));
    write_file(dir / ("train_log_" + name + ".csv"), train_log_csv(trained.log));
    spdlog::info("{}: {} epochs logged, best epoch {}", name, trained.log.epochs.size(), trained.log.best_epoch);
  }
}

void cmd_evaluate(const RunConfig& config, bool write_svg) {
  const fs::path dir = out_dir(config);
  write_manifest(config, "evaluate");
  std::vector<std::pair<std::string, Forecaster>> models;
  for (const auto& name : selected_models(config)) models.emplace_back(name, load_model(dir / ("model_" + name + ".json")));
  const WindowSet windows = read_windows(dir / "windows.bin");
  const auto events = read_onsets(dir / "onsets.csv");

  std::vector<ModelEvaluation> evaluations;
  for (const auto& [name, model] : models) {
    evaluations.push_back(evaluate_model(name, model, config, windows, events));
    const auto& t = evaluations.back().test;
    spdlog::info("{}: threshold {:.2f}, test f1 {:.3f}, event recall {}", name, evaluations.back().threshold,
                 t.standard.f1, optional_text(t.report.event_recall));
  }
  write_file(dir / "metrics.csv", metrics_csv(evaluations));
  write_file(dir / "events.csv", events_csv(evaluations));
  write_file(dir / "alerts.csv", alerts_csv(evaluations));
  if (write_svg) {
    std::vector<TimelinePanel> panels;
    for (const auto& ev : evaluations) {
      TimelinePanel p;
      p.title = ev.model + " (" + std::to_string(config.test_year) + ")";
      for (const auto& k : ev.test_samples) p.dates.push_back(k.prediction_date);
      p.scores = ev.test_scores;
      p.threshold = ev.threshold;
      for (const auto& e : ev.test.report.events) p.events.push_back(e.event_date);
      for (const auto& e : ev.test.report.episodes) p.episodes.push_back({e.start, e.end, e.classification});
      panels.push_back(std::move(p));
    }
    write_file(dir / "timeline.svg", render_timeline_svg(panels));
  }
}

std::string cmd_report(const RunConfig& config) {
  const fs::path dir = out_dir(config);
  write_manifest(config, "report");
  const CsvTable metrics = parse_csv_table(read_file(dir / "metrics.csv", "metrics file"));
  const CsvTable events = parse_csv_table(read_file(dir / "events.csv", "per-event file"));
  const std::string text = render_report(metrics, events);
  write_file(dir / "report.txt", text);
  return text;
}

void cmd_feature_export(const RunConfig& config) {
  const fs::path dir = out_dir(config);
  write_manifest(config, "feature export");
  const auto series = load_series(config);
  std::vector<YearFeatures> features;
  for (const auto& ys : series) features.push_back(build_features(ys));
  write_file(dir / "features.csv", export_features_csv(features));
}

void cmd_label_export(const RunConfig& config) {
  const fs::path dir = out_dir(config);
  write_manifest(config, "label export");
  const auto series = load_series(config);
  std::vector<YearLabels> labels;
  for (const auto& ys : series) labels.push_back(label_year(ys, config.labels));
  write_file(dir / "labels.csv", export_labels_csv(labels, config.labels));
}

}  // namespace onsetwarn
