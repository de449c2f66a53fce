// aquacast — train, run and evaluate short-term water demand forecasters.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aquacast/checkpoint.hpp"
#include "aquacast/errors.hpp"
#include "aquacast/forecast.hpp"
#include "aquacast/kmeans.hpp"
#include "aquacast/metrics.hpp"
#include "aquacast/models.hpp"
#include "aquacast/series.hpp"

namespace {

using namespace aquacast;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// ------------------------------------------------------------ config files
//
// CLI11 only applies config files attached to the root command, so each
// subcommand's --config is expanded by hand before parsing: every
// key=value line becomes a --key=value token inserted ahead of the user's
// flags, and scalar options keep the last occurrence. Command-line flags
// therefore override the file, which overrides the compiled-in defaults.

std::string strip(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string key = eq == std::string::npos ? "" : strip(line.substr(0, eq));
    if (key.empty())
      throw std::invalid_argument("config line is not key=value: " + line);
    tokens.push_back("--" + key + "=" + strip(line.substr(eq + 1)));
  }
  return tokens;
}

void expand_config(std::vector<std::string>& args) {
  const auto sub =
      std::find_if(args.begin(), args.end(),
                   [](const std::string& a) { return !a.starts_with("-"); });
  if (sub == args.end()) return;
  std::string path;
  for (auto it = sub + 1; it != args.end(); ++it) {
    if (*it == "--config" && it + 1 != args.end()) {
      path = *(it + 1);
    } else if (it->starts_with("--config=")) {
      path = it->substr(std::string("--config=").size());
    }
  }
  if (path.empty()) return;
  const std::vector<std::string> tokens = config_tokens(path);
  args.insert(sub + 1, tokens.begin(), tokens.end());
}

struct SplitBounds {
  std::size_t train_end;  // training block is [0, train_end)
  std::size_t val_end;    // validation block is [train_end, val_end)
  std::size_t test_end;   // test block is [val_end, test_end)
};

SplitBounds split_bounds(std::size_t n, std::size_t train_n,
                         std::size_t test_n, double val_frac) {
  if (train_n + test_n > n)
    throw DataError("series shorter than train_n + test_n");
  const auto val_n =
      static_cast<std::size_t>(std::llround(train_n * val_frac));
  if (val_n == 0 || val_n >= train_n)
    throw DataError("validation split empty or swallows training data");
  return {train_n - val_n, train_n, train_n + test_n};
}

// ----------------------------------------------------------------- synth

struct SynthArgs {
  SyntheticConfig config;
  std::string start = "2016-01-01T00:00:00";
  std::string out;
};

void run_synth(const SynthArgs& args) {
  SyntheticConfig config = args.config;
  config.start_time = parse_iso8601(args.start);
  const DemandSeries series = generate_synthetic(config);
  save_csv(series, args.out);
  const SeriesStats stats = compute_stats(series);
  std::cout << "rows: " << stats.count << '\n'
            << "mean: " << fmt(stats.mean) << " (target " << fmt(config.mean)
            << ")\n"
            << "std: " << fmt(stats.std) << " (target " << fmt(config.std)
            << ")\n"
            << "min: " << fmt(stats.min) << '\n'
            << "q25: " << fmt(stats.q25) << '\n'
            << "median: " << fmt(stats.median) << '\n'
            << "q75: " << fmt(stats.q75) << '\n'
            << "max: " << fmt(stats.max) << '\n'
            << "mode: " << fmt(stats.mode) << '\n'
            << "skewness: " << fmt(stats.skewness) << '\n'
            << "excess_kurtosis: " << fmt(stats.excess_kurtosis) << '\n'
            << "csv: " << args.out << '\n';
}

// ----------------------------------------------------------------- elbow

struct ElbowArgs {
  std::string data;
  int m_min = 2;
  int m_max = 10;
  int classes = 0;  // >0 bypasses detection
  std::size_t train_n = 0;  // 0 = whole series
  std::uint64_t seed = 42;
  std::string out = "elbow.csv";
};

void run_elbow(const ElbowArgs& args) {
  if (args.m_min >= args.m_max)
    throw std::invalid_argument("--m-min must be below --m-max");
  const DemandSeries series = load_csv(args.data);
  std::span<const double> values(series.values);
  if (args.train_n > 0) {
    if (args.train_n > values.size())
      throw DataError("--train-n exceeds the series");
    values = values.first(args.train_n);
  }
  const DistortionCurve curve = elbow(values, args.m_min, args.m_max,
                                      args.seed);
  std::ofstream out(args.out);
  if (!out) throw DataError("cannot write " + args.out);
  out << "m,distortion\n";
  for (std::size_t i = 0; i < curve.m_values.size(); ++i)
    out << curve.m_values[i] << ',' << fmt(curve.distortions[i]) << '\n';

  if (args.classes > 0) {
    std::cout << "chosen m: " << args.classes << " (override)\n";
  } else {
    std::cout << "chosen m: " << curve.chosen_m
              << (curve.low_confidence ? " (low confidence)" : "") << '\n';
  }
  std::cout << "curve: " << args.out << '\n';
}

// ----------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string model;
  std::string out = "model.ckpt";
  std::string history;
  int classes = 0;  // 0 = elbow-chosen
  int rho = 1;
  int m_min = 2;
  int m_max = 10;
  std::size_t train_n = 22500;
  std::size_t test_n = 2500;
  double val_frac = 0.15;
  std::uint64_t seed = 42;
  // Per-model defaults fill these when the flags are not passed.
  double lr = 0.0;
  int halve_every = -1;
  int batch_size = 0;
  int max_epochs = 60;
  int patience = 0;
};

struct ModelDefaults {
  double lr;
  int halve_every;
  int batch_size;
  int patience;
};

ModelDefaults defaults_for(ModelKind kind) {
  switch (kind) {
    case ModelKind::BGRU:
      return {0.001, 0, 100, 2};
    case ModelKind::DCGRU:
      return {0.002, 0, 100, 2};
    case ModelKind::EDCGRU:
      return {0.002, 5, 100, 4};
    case ModelKind::GRUN:
      return {0.001, 0, 60, 2};
  }
  return {0.001, 0, 100, 2};
}

void write_history_csv(const std::string& path, const nn::TrainHistory& h) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "epoch,train_loss,val_loss\n";
  for (int e = 0; e < h.stopped_epoch; ++e)
    out << (e + 1) << ',' << fmt(h.train_loss[e]) << ','
        << fmt(h.val_loss[e]) << '\n';
}

void run_train(const TrainArgs& args) {
  const ModelKind kind = model_kind_from_string(args.model);
  if (kind == ModelKind::EDCGRU && args.rho < 1)
    throw std::invalid_argument("edcgru needs --rho >= 1");

  const ModelDefaults d = defaults_for(kind);
  const double lr = args.lr > 0.0 ? args.lr : d.lr;
  const int halve = args.halve_every >= 0 ? args.halve_every : d.halve_every;
  const int batch = args.batch_size > 0 ? args.batch_size : d.batch_size;
  const int patience = args.patience > 0 ? args.patience : d.patience;

  const DemandSeries series = load_csv(args.data);
  const SplitBounds bounds =
      split_bounds(series.size(), args.train_n, args.test_n, args.val_frac);
  std::span<const double> values(series.values);
  std::span<const double> fit_block = values.first(bounds.train_end);

  const Scaler scaler = fit_scaler(fit_block);

  std::optional<KMeansModel> kmeans;
  const bool needs_classes =
      kind == ModelKind::DCGRU || kind == ModelKind::EDCGRU;
  if (needs_classes) {
    int m = args.classes;
    if (m == 0) {
      const DistortionCurve curve =
          elbow(fit_block, args.m_min, args.m_max, args.seed);
      m = curve.chosen_m;
      std::cout << "chosen m: " << m
                << (curve.low_confidence ? " (low confidence)" : "") << '\n';
    } else {
      std::cout << "chosen m: " << m << " (override)\n";
    }
    kmeans = lloyd(fit_block, m, args.seed);
  }
  const KMeansModel* km = kmeans ? &*kmeans : nullptr;

  Model model = [&] {
    switch (kind) {
      case ModelKind::BGRU:
        return build_bgru(args.seed);
      case ModelKind::DCGRU:
        return build_dcgru(kmeans->m(), args.seed);
      case ModelKind::EDCGRU:
        return build_edcgru(kmeans->m(), args.rho, args.seed);
      case ModelKind::GRUN:
        return build_grun(args.seed);
    }
    throw std::logic_error("unreachable");
  }();

  const std::size_t first_target = (kind == ModelKind::GRUN)
                                       ? kGrunHistory
                                       : kSamplesPerDay;
  const nn::WindowDataset train_set = build_windows(
      model, values.first(bounds.train_end), scaler, km, first_target,
      bounds.train_end);
  const nn::WindowDataset val_set =
      build_windows(model, values.first(bounds.val_end), scaler, km,
                    bounds.train_end, bounds.val_end);

  nn::TrainConfig config;
  config.learning_rate = {lr, halve};
  config.batch_size = batch;
  config.max_epochs = args.max_epochs;
  config.early_stop_patience = patience;
  config.shuffle_seed = args.seed + 1;

  const auto t0 = std::chrono::steady_clock::now();
  const nn::TrainHistory history =
      nn::train(model.net, train_set, val_set, config);
  std::cout << "epochs: " << history.stopped_epoch << " (best epoch "
            << history.best_epoch << " restored)\n";

  if (kind == ModelKind::GRUN) {
    const nn::WindowDataset corr_train = build_correction_windows(
        model, values.first(bounds.train_end), scaler, kGrunHistory,
        bounds.train_end);
    const nn::WindowDataset corr_val =
        build_correction_windows(model, values.first(bounds.val_end), scaler,
                                 bounds.train_end, bounds.val_end);
    nn::Network correction = build_grun_correction(args.seed + 2);
    nn::TrainConfig corr_config = config;
    corr_config.batch_size = static_cast<int>(
        std::min<std::size_t>(config.batch_size, corr_train.size()));
    corr_config.shuffle_seed = args.seed + 3;
    const nn::TrainHistory corr_history =
        nn::train(correction, corr_train, corr_val, corr_config);
    std::cout << "correction epochs: " << corr_history.stopped_epoch
              << " (best epoch " << corr_history.best_epoch
              << " restored)\n";
    model.correction = std::move(correction);
  }
  const auto t1 = std::chrono::steady_clock::now();
  const double train_s = std::chrono::duration<double>(t1 - t0).count();

  save_checkpoint({std::move(model), scaler, std::move(kmeans)}, args.out);
  if (!args.history.empty()) write_history_csv(args.history, history);

  const Checkpoint saved = load_checkpoint(args.out);
  std::cout << "model: " << to_string(kind) << '\n'
            << "k: " << saved.model.param_count() << '\n'
            << "train_s: " << fmt(train_s) << '\n'
            << "checkpoint: " << args.out << '\n';
  if (!args.history.empty()) std::cout << "history: " << args.history << '\n';
}

// --------------------------------------------------------------- predict

struct PredictArgs {
  std::string checkpoint;
  std::string data;
  int scenario = 1;
  std::string at;  // ISO-8601; empty = first period after the series
  std::string out = "predictions.csv";
};

void run_predict(const PredictArgs& args) {
  const Checkpoint ckpt = load_checkpoint(args.checkpoint);
  const DemandSeries series = load_csv(args.data);
  const KMeansModel* km = ckpt.kmeans ? &*ckpt.kmeans : nullptr;
  std::span<const double> values(series.values);

  std::size_t at = series.size();
  if (!args.at.empty()) {
    const std::int64_t ts = parse_iso8601(args.at);
    const std::int64_t delta = ts - series.start_time;
    if (delta < 0 || delta % kIntervalSeconds != 0)
      throw DataError("--at is not aligned to the series grid");
    at = static_cast<std::size_t>(delta / kIntervalSeconds);
    if (at > series.size())
      throw DataError("--at lies beyond one step past the series");
  }
  const std::int64_t at_time =
      series.start_time + static_cast<std::int64_t>(at) * kIntervalSeconds;

  if (args.scenario == 1) {
    const double pred =
        predict_one_at(ckpt.model, values, at, ckpt.scaler, km);
    if (at < series.size()) {
      const double actual = values[at];
      save_predictions_csv(args.out, at_time, {&pred, 1}, {&actual, 1});
    } else {
      save_predictions_csv(args.out, at_time, {&pred, 1});
    }
    std::cout << "predicted: " << fmt(pred) << '\n';
  } else if (args.scenario == 2) {
    std::span<const double> actuals;
    if (at + kSamplesPerDay <= series.size())
      actuals = values.subspan(at, kSamplesPerDay);
    const ForecastResult day =
        predict_day(ckpt.model, values.first(at), km, ckpt.scaler, actuals);
    save_predictions_csv(args.out, at_time, day.predicted, actuals);
    std::cout << "predicted: " << day.predicted.size() << " steps\n";
    if (!day.abs_errors.empty()) {
      std::cout << "day mae: " << fmt(mae(actuals, day.predicted)) << '\n';
    }
  } else {
    throw std::invalid_argument("--scenario must be 1 or 2");
  }
  std::cout << "csv: " << args.out << '\n';
}

// -------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::vector<std::string> checkpoints;
  std::string data;
  std::size_t test_n = 2500;
  int reps = 1000;
  std::string out_csv = "report.csv";
  std::string out_json = "report.json";
};

void run_evaluate(const EvaluateArgs& args) {
  const DemandSeries series = load_csv(args.data);
  std::vector<Checkpoint> ckpts;
  ckpts.reserve(args.checkpoints.size());
  for (const std::string& path : args.checkpoints)
    ckpts.push_back(load_checkpoint(path));

  std::vector<EvaluatedModel> models;
  models.reserve(ckpts.size());
  for (const Checkpoint& c : ckpts) {
    EvaluatedModel em;
    em.name = to_string(c.model.kind);
    em.model = &c.model;
    em.scaler = &c.scaler;
    em.kmeans = c.kmeans ? &*c.kmeans : nullptr;
    models.push_back(em);
  }

  const EvalReport report =
      build_report(models, series.values, args.test_n, args.reps);
  const std::string csv = report.to_csv();
  {
    std::ofstream out(args.out_csv);
    if (!out) throw DataError("cannot write " + args.out_csv);
    out << csv;
  }
  {
    std::ofstream out(args.out_json);
    if (!out) throw DataError("cannot write " + args.out_json);
    out << report.to_json();
  }
  std::cout << csv;
}

// ----------------------------------------------------------- param-count

void run_param_count(const std::string& path) {
  const Checkpoint ckpt = load_checkpoint(path);
  std::cout << ckpt.model.param_count() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aquacast: short-term water demand forecasting toolkit"};
  app.require_subcommand(1);

  // Consumed by expand_config before parsing; bound so --help lists it.
  std::string config_file;
  const std::string kConfigHelp =
      "Apply unset flags from a flat key=value file";

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand(
      "synth", "Generate a synthetic 15-minute demand series CSV");
  synth->add_option("--config", config_file, kConfigHelp);
  synth->add_option("--n", synth_args.config.n_samples, "Number of readings");
  synth->add_option("--mean", synth_args.config.mean, "Target mean");
  synth->add_option("--std", synth_args.config.std, "Target std");
  synth->add_option("--daily-amplitude", synth_args.config.daily_amplitude,
                    "Relative weight of the daily profile");
  synth->add_option("--weekly-amplitude", synth_args.config.weekly_amplitude,
                    "Relative weight of the weekly profile");
  synth->add_option("--noise-std", synth_args.config.noise_std,
                    "Relative weight of the noise component");
  synth->add_option("--spike-rate", synth_args.config.spike_rate,
                    "Daily spike slots as a fraction of the 96 readings");
  synth->add_option("--min-clip", synth_args.config.min_clip,
                    "Lower clip applied to the finished series");
  synth->add_option("--spike-magnitude", synth_args.config.spike_magnitude,
                    "Spike height in series units");
  synth->add_option("--seed", synth_args.config.seed, "Generator seed")
      ->envname("AQUACAST_SEED");
  synth->add_option("--start", synth_args.start,
                    "ISO-8601 timestamp of the first reading");
  synth->add_option("--out", synth_args.out, "Output CSV path")->required();
  synth->callback([&] { run_synth(synth_args); });

  ElbowArgs elbow_args;
  CLI::App* elbow_cmd = app.add_subcommand(
      "elbow", "Distortion curve and elbow-chosen class count");
  elbow_cmd->add_option("--config", config_file, kConfigHelp);
  elbow_cmd->add_option("--data", elbow_args.data, "Input series CSV")
      ->required();
  elbow_cmd->add_option("--m-min", elbow_args.m_min, "Smallest m");
  elbow_cmd->add_option("--m-max", elbow_args.m_max, "Largest m");
  elbow_cmd->add_option("--classes", elbow_args.classes,
                        "Bypass detection and report this m");
  elbow_cmd->add_option("--train-n", elbow_args.train_n,
                        "Fit on the first train-n readings (0 = all)");
  elbow_cmd->add_option("--seed", elbow_args.seed, "Clustering seed")
      ->envname("AQUACAST_SEED");
  elbow_cmd->add_option("--out", elbow_args.out, "Distortion CSV path");
  elbow_cmd->callback([&] { run_elbow(elbow_args); });

  TrainArgs train_args;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Train a model and write a checkpoint");
  train_cmd->add_option("--config", config_file, kConfigHelp);
  train_cmd->add_option("--data", train_args.data, "Input series CSV")
      ->required();
  train_cmd
      ->add_option("--model", train_args.model,
                   "Model kind: bgru, dcgru, edcgru or grun")
      ->required()
      ->check(CLI::IsMember({"bgru", "dcgru", "edcgru", "grun"}));
  train_cmd->add_option("--out", train_args.out, "Checkpoint path");
  train_cmd->add_option("--history", train_args.history,
                        "Per-epoch loss CSV path");
  train_cmd->add_option("--classes", train_args.classes,
                        "Class count m (0 = elbow-chosen)");
  train_cmd->add_option("--rho", train_args.rho,
                        "Virtual values per gap (edcgru)");
  train_cmd->add_option("--m-min", train_args.m_min, "Elbow scan start");
  train_cmd->add_option("--m-max", train_args.m_max, "Elbow scan end");
  train_cmd->add_option("--train-n", train_args.train_n,
                        "Readings used for train+validation");
  train_cmd->add_option("--test-n", train_args.test_n,
                        "Readings held out for testing");
  train_cmd->add_option("--val-frac", train_args.val_frac,
                        "Validation share of train-n");
  train_cmd->add_option("--seed", train_args.seed, "Master seed")
      ->envname("AQUACAST_SEED");
  train_cmd->add_option("--lr", train_args.lr,
                        "Learning rate (default per model)");
  train_cmd->add_option("--halve-every", train_args.halve_every,
                        "Halve the rate every N epochs (0 = fixed)");
  train_cmd->add_option("--batch-size", train_args.batch_size,
                        "Mini-batch size (default per model)");
  train_cmd->add_option("--max-epochs", train_args.max_epochs,
                        "Upper bound on epochs");
  train_cmd->add_option("--patience", train_args.patience,
                        "Early-stop patience (default per model)");
  train_cmd->callback([&] { run_train(train_args); });

  PredictArgs predict_args;
  CLI::App* predict_cmd = app.add_subcommand(
      "predict", "Forecast one step (scenario 1) or one day (scenario 2)");
  predict_cmd->add_option("--config", config_file, kConfigHelp);
  predict_cmd
      ->add_option("--checkpoint", predict_args.checkpoint,
                   "Trained checkpoint")
      ->required();
  predict_cmd->add_option("--data", predict_args.data, "Input series CSV")
      ->required();
  predict_cmd->add_option("--scenario", predict_args.scenario,
                          "1 = one step, 2 = one day");
  predict_cmd->add_option("--at", predict_args.at,
                          "Forecast start timestamp (ISO-8601)");
  predict_cmd->add_option("--out", predict_args.out, "Predictions CSV path");
  predict_cmd->callback([&] { run_predict(predict_args); });

  EvaluateArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand(
      "evaluate", "Score checkpoints on the test block of a series");
  eval_cmd->add_option("--config", config_file, kConfigHelp);
  eval_cmd
      ->add_option("checkpoints", eval_args.checkpoints,
                   "Checkpoint files to score")
      ->required();
  eval_cmd->add_option("--data", eval_args.data, "Input series CSV")
      ->required();
  eval_cmd->add_option("--test-n", eval_args.test_n, "Test block length");
  eval_cmd->add_option("--reps", eval_args.reps,
                       "Timing repetitions (0 skips timing)");
  eval_cmd->add_option("--out-csv", eval_args.out_csv, "Report CSV path");
  eval_cmd->add_option("--out-json", eval_args.out_json, "Report JSON path");
  eval_cmd->callback([&] { run_evaluate(eval_args); });

  std::string param_count_path;
  CLI::App* pc_cmd = app.add_subcommand(
      "param-count", "Print the parameter count of a checkpoint");
  pc_cmd->add_option("checkpoint", param_count_path, "Checkpoint file")
      ->required();
  pc_cmd->callback([&] { run_param_count(param_count_path); });

  // Config values must lose to explicit flags, so scalar options keep the
  // last occurrence (expand_config puts file-derived tokens first).
  for (CLI::App* cmd : app.get_subcommands([](CLI::App*) { return true; })) {
    for (CLI::Option* opt : cmd->get_options()) {
      if (!opt->get_positional() && opt->get_expected_max() == 1) {
        opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
      }
    }
  }

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    expand_config(args);
    std::reverse(args.begin(), args.end());  // CLI11 parses back to front
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
