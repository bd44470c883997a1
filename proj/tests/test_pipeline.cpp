#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "onsetwarn/config.hpp"
#include "onsetwarn/error.hpp"
#include "onsetwarn/forecaster.hpp"
#include "onsetwarn/nn/loss.hpp"
#include "onsetwarn/pipeline.hpp"
#include "onsetwarn/synth.hpp"
#include "onsetwarn/trainer.hpp"

using namespace onsetwarn;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("onsetwarn-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig small_config() {
  RunConfig cfg;
  cfg.synth.years = {2020, 2021, 2022, 2023};
  return resolve(cfg);
}

void require_same_windows(const std::vector<WindowSample>& a, const std::vector<WindowSample>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].prediction_date == b[i].prediction_date);
    CHECK(a[i].year == b[i].year);
    CHECK(a[i].label == b[i].label);
    CHECK(a[i].window == b[i].window);
  }
}

std::vector<WindowSample> toy_samples(int count, int length, int dim, std::uint64_t seed, bool flip) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<WindowSample> out;
  for (int k = 0; k < count; ++k) {
    const int label = k % 2;
    MatrixXd w(length, dim);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = n(rng) + (label ? 1.0 : -1.0);
    out.push_back(WindowSample{Date{}, 2020, flip ? 1 - label : label, w});
  }
  return out;
}

}  // namespace

TEST_SUITE("models") {
  TEST_CASE("sigmoid scores") {
    CHECK(nn::sigmoid(0.0) == 0.5);
    CHECK(nn::sigmoid(0.3) < nn::sigmoid(0.31));
    CHECK(nn::sigmoid(-2.0) < nn::sigmoid(2.0));
  }

  TEST_CASE("an all-zero LSTM outputs its head bias") {
    LstmModel model(nn::LstmConfig{5, 8, 2, 0.2});
    model.parameters().setZero();
    const auto& slots = model.layout().slots();
    REQUIRE(slots.back().name == "head.bias");
    model.parameters()(slots.back().offset) = 0.37;
    const MatrixXd window = MatrixXd::Random(30, 5);
    CHECK(model.forward_window(window) == doctest::Approx(0.37).epsilon(1e-15));
  }

  TEST_CASE("identical windows give identical logits") {
    const auto samples = toy_samples(2, 30, 4, 3, false);
    std::vector<WindowSample> twins{samples[0], samples[0]};
    LstmModel lstm(nn::LstmConfig{4, 16, 2, 0.2});
    lstm.initialize(1);
    TcnModel tcn(nn::TcnConfig{4, 16, 3, 3, 1, 0.2});
    tcn.initialize(1);
    for (const Forecaster& f : {Forecaster{lstm}, Forecaster{tcn}}) {
      const VectorXd z = predict_logits(f, twins);
      CHECK(z(0) == z(1));
    }
  }

  TEST_CASE("TCN final logit sees the last day but not the first") {
    TcnModel model(nn::TcnConfig{4, 16, 3, 3, 1, 0.2});
    model.initialize(12);
    const MatrixXd window = toy_samples(1, 30, 4, 9, false)[0].window;
    const double base = model.forward_window(window);
    MatrixXd last = window;
    last.row(29).array() += 1.0;
    CHECK(model.forward_window(last) != base);
    MatrixXd first = window;
    first.row(0).array() += 100.0;
    CHECK(model.forward_window(first) == base);
    // Earliest influential day, counted back from the last one.
    int reach = 0;
    for (int s = 0; s < 30; ++s) {
      MatrixXd probe = window;
      probe.row(s).array() += 1.0;
      if (model.forward_window(probe) != base) {
        reach = 30 - s;
        break;
      }
    }
    CHECK(reach == 15);
  }

  TEST_CASE("patience 1 stops after the first worse epoch and keeps epoch 1") {
    const auto train = toy_samples(40, 6, 3, 21, false);
    const auto val = toy_samples(20, 6, 3, 22, true);
    TrainConfig cfg;
    cfg.max_epochs = 10;
    cfg.patience = 1;
    cfg.batch_size = 8;
    cfg.optimizer.learning_rate = 5e-2;
    LstmModel model(nn::LstmConfig{3, 8, 1, 0.0});
    model.initialize(4);
    const TrainLog log = train_neural(model, train, val, cfg);
    REQUIRE(log.epochs.size() == 2);
    CHECK(log.epochs[1].val_loss > log.epochs[0].val_loss);
    CHECK(log.best_epoch == 1);

    cfg.max_epochs = 1;
    LstmModel once(nn::LstmConfig{3, 8, 1, 0.0});
    once.initialize(4);
    train_neural(once, train, val, cfg);
    CHECK(model.parameters() == once.parameters());
  }

  TEST_CASE("same seed and data give byte-identical parameters") {
    const auto train = toy_samples(30, 8, 3, 1, false);
    const auto val = toy_samples(10, 8, 3, 2, false);
    TrainConfig cfg;
    cfg.max_epochs = 3;
    cfg.patience = 3;
    cfg.seed = 17;
    for (int rep = 0; rep < 2; ++rep) {
      TcnModel a(nn::TcnConfig{3, 8, 2, 3, 1, 0.2});
      TcnModel b(nn::TcnConfig{3, 8, 2, 3, 1, 0.2});
      a.initialize(5);
      b.initialize(5);
      train_neural(a, train, val, cfg);
      train_neural(b, train, val, cfg);
      CHECK(serialize_model(Forecaster{a}) == serialize_model(Forecaster{b}));
    }
  }

  TEST_CASE("model files round-trip") {
    const fs::path dir = scratch_dir("models");
    const auto samples = toy_samples(12, 30, 4, 6, false);
    LstmModel lstm(nn::LstmConfig{4, 6, 2, 0.2});
    lstm.initialize(2);
    TcnModel tcn(nn::TcnConfig{4, 6, 3, 3, 1, 0.2});
    tcn.initialize(2);
    GbdtConfig gc;
    gc.n_estimators = 10;
    std::vector<int> y;
    for (const auto& s : samples) y.push_back(s.label);
    const GbdtModel gbdt = train_gbdt(flatten_samples(samples), y, gc);
    for (const Forecaster& f : {Forecaster{gbdt}, Forecaster{lstm}, Forecaster{tcn}}) {
      const fs::path p = dir / "m.json";
      save_model(f, p);
      const Forecaster back = load_model(p);
      CHECK(kind_of(back) == kind_of(f));
      CHECK(serialize_model(back) == serialize_model(f));
      CHECK(predict_logits(back, samples) == predict_logits(f, samples));
    }
    CHECK_THROWS_AS(deserialize_model("{\"format\": \"nope\"}"), Error);
    CHECK_THROWS_AS(load_model(dir / "missing.json"), Error);
  }
}

TEST_SUITE("cli") {
  TEST_CASE("defaults match the reference hyperparameters") {
    const RunConfig c = resolve(RunConfig{});
    CHECK(c.labels.gap == 5);
    CHECK(c.labels.h_min == 3);
    CHECK(c.labels.h_max == 7);
    CHECK(c.labels.window == 30);
    CHECK(c.train.max_epochs == 50);
    CHECK(c.train.patience == 10);
    CHECK(c.gbdt.n_estimators == 400);
    CHECK(c.gbdt.learning_rate == 0.05);
    CHECK(c.gbdt.max_depth == 4);
    CHECK(c.gbdt.subsample == 0.9);
    CHECK(c.gbdt.colsample == 0.9);
    CHECK(c.lstm.hidden == 64);
    CHECK(c.lstm.layers == 2);
    CHECK(c.lstm.dropout == 0.2);
    CHECK(c.tcn.channels == 64);
    CHECK(c.tcn.levels == 3);
    CHECK(c.tcn.kernel == 3);
    CHECK(c.tcn.dropout == 0.2);
    CHECK(c.evaluation.threshold_grid.size() == 19);
    CHECK(c.synth.years.size() == 5);
  }

  TEST_CASE("config text round-trips through format and parse") {
    RunConfig c;
    set_config_value(c, "seed", "7");
    set_config_value(c, "gbdt.max_depth", "3");
    set_config_value(c, "split.train_years", "2019,2020");
    set_config_value(c, "model", "tcn");
    c = resolve(c);
    const std::string text = format_config(c);
    const RunConfig back = resolve(parse_config(text));
    CHECK(format_config(back) == text);
    CHECK(back.seed == 7);
    CHECK(back.gbdt.max_depth == 3);
    CHECK(back.train_years == std::vector<int>{2019, 2020});
    CHECK(selected_models(back) == std::vector<std::string>{"tcn"});
  }

  TEST_CASE("config errors are reported") {
    const auto code_of = [](auto fn) {
      try {
        fn();
      } catch (const Error& e) {
        return e.code();
      }
      return ErrorCode::IoError;
    };
    CHECK(code_of([] { parse_config("nonsense.key = 1\n"); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { parse_config("seed = abc\n"); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { parse_config("no equals sign\n"); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { resolve(parse_config("model = forest\n")); }) == ErrorCode::ConfigError);
    try {
      parse_config("# comment\n\nseed = 1\nlabels.gap = x\n");
      FAIL("expected ConfigError");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
    RunConfig bad;
    bad.train.patience = 60;
    CHECK_THROWS_AS(resolve(bad), Error);
    // Comments and blank lines are ignored.
    CHECK(parse_config("# x\n\n  seed =  9  \n").seed == 9);
  }

  TEST_CASE("window files round-trip and reject damage") {
    const fs::path dir = scratch_dir("windows");
    const RunConfig cfg = small_config();
    const PreparedData data = prepare_data(cfg, generate(cfg.synth));
    const fs::path p = dir / "windows.bin";
    write_windows(p, data.windows);
    const WindowSet back = read_windows(p);
    require_same_windows(back.train, data.windows.train);
    require_same_windows(back.validation, data.windows.validation);
    require_same_windows(back.test, data.windows.test);

    const std::string bytes = slurp(p);
    {
      std::ofstream out(dir / "short.bin", std::ios::binary);
      out << bytes.substr(0, bytes.size() - 9);
    }
    CHECK_THROWS_AS(read_windows(dir / "short.bin"), Error);
    {
      std::ofstream out(dir / "magic.bin", std::ios::binary);
      out << "X" << bytes.substr(1);
    }
    CHECK_THROWS_AS(read_windows(dir / "magic.bin"), Error);
    CHECK_THROWS_AS(read_windows(dir / "absent.bin"), Error);
  }
}

TEST_SUITE("leakage") {
  TEST_CASE("normalizer statistics come from the training years only") {
    const RunConfig cfg = small_config();
    auto years = generate(cfg.synth);
    const Normalizer base = prepare_data(cfg, years).normalizer;
    for (auto& s : years) {
      if (s.year == cfg.val_year || s.year == cfg.test_year) {
        s.records[100].rainfall += 250.0;
        s.records[200].temp_mean += 15.0;
        s.records[200].temp_max += 15.0;
        s.records[50].humidity_mean = 3.0;
      }
    }
    const Normalizer after = prepare_data(cfg, years).normalizer;
    CHECK(after.mu == base.mu);
    CHECK(after.sigma == base.sigma);
    for (auto& s : years) {
      if (s.year == cfg.train_years.front()) s.records[100].rainfall += 250.0;
    }
    CHECK(prepare_data(cfg, years).normalizer.mu != base.mu);
  }

  TEST_CASE("no window or horizon crosses a year boundary") {
    const RunConfig cfg = small_config();
    const PreparedData data = prepare_data(cfg, generate(cfg.synth));
    const auto check_split = [&](const std::vector<WindowSample>& split, std::vector<int> years) {
      REQUIRE(!split.empty());
      for (const auto& s : split) {
        CHECK(std::find(years.begin(), years.end(), s.year) != years.end());
        CHECK(year_of(s.prediction_date) == s.year);
        CHECK(year_of(add_days(s.prediction_date, -(cfg.labels.window - 1))) == s.year);
        CHECK(year_of(add_days(s.prediction_date, cfg.labels.h_max)) == s.year);
        CHECK(s.window.rows() == cfg.labels.window);
      }
    };
    check_split(data.windows.train, cfg.train_years);
    check_split(data.windows.validation, {cfg.val_year});
    check_split(data.windows.test, {cfg.test_year});
  }
}
