#include "hypervec/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "json.hpp"

#include "hypervec/data.hpp"
#include "hypervec/encoding.hpp"
#include "hypervec/io.hpp"
#include "hypervec/kernels.hpp"
#include "hypervec/model.hpp"
#include "hypervec/reference.hpp"
#include "hypervec/rng.hpp"

namespace hypervec {

namespace {

using nlohmann::json;

// Substream tags off the user-facing seed; documented in the README.
constexpr std::uint64_t kCodebookTag = 1;
constexpr std::uint64_t kEncodeTiebreakTag = 2;
constexpr std::uint64_t kModelTiebreakTag = 3;  // applied inside make_empty_model
constexpr std::uint64_t kSubsampleTag = 4;

ExperimentConfig apply_json(const json& j, const ExperimentConfig& base, bool* seed_present) {
  ExperimentConfig cfg = base;
  if (seed_present != nullptr) *seed_present = false;
  if (!j.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "data") {
        cfg.data_path = value.get<std::string>();
      } else if (key == "label_column") {
        cfg.label_column = value.get<std::string>();
      } else if (key == "segment_column") {
        cfg.segment_column = value.get<std::string>();
      } else if (key == "dim") {
        cfg.dim = value.get<std::size_t>();
      } else if (key == "bins") {
        cfg.bins = value.get<std::size_t>();
      } else if (key == "generation") {
        cfg.generation = value.get<std::string>();
      } else if (key == "binding") {
        cfg.binding = value.get<std::string>();
      } else if (key == "metric") {
        cfg.metric = value.get<std::string>();
      } else if (key == "trainer") {
        cfg.trainer = value.get<std::string>();
      } else if (key == "split") {
        cfg.split = value.get<std::string>();
      } else if (key == "backend") {
        cfg.backend = value.get<std::string>();
      } else if (key == "gamma") {
        cfg.gamma = value.get<double>();
      } else if (key == "batch_size") {
        cfg.batch_size = value.get<std::size_t>();
      } else if (key == "subsample_factor") {
        cfg.subsample_factor = value.get<std::size_t>();
      } else if (key == "smooth_window") {
        cfg.smooth_window = value.get<std::size_t>();
      } else if (key == "positive_class") {
        cfg.positive_class = value.get<int>();
      } else if (key == "seed") {
        cfg.seed = value.get<std::uint64_t>();
        if (seed_present != nullptr) *seed_present = true;
      } else if (key == "threads") {
        cfg.threads = value.get<std::size_t>();
      } else if (key == "out") {
        cfg.out = value.get<std::string>();
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return cfg;
}

Dataset load_dataset(const ExperimentConfig& cfg) {
  try {
    return load_csv(cfg.data_path, CsvSchema{cfg.label_column, cfg.segment_column});
  } catch (const std::runtime_error& e) {
    throw DataError(e.what());
  }
}

SplitPlan make_split(const ExperimentConfig& cfg, const Dataset& data) {
  try {
    if (cfg.split == "tscv") return tscv_folds(data);
    if (cfg.split == "loso") return leave_one_segment_out(data);
    return single_split(data);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
}

// Everything the per-fold pipeline shares across folds.
struct RunContext {
  Codebook codebook;
  PackedBitMatrix encode_tiebreak;
  ModelConfig model_config;
  // naive-backend mirrors (built only when used)
  ref::DenseCodebook dense_codebook;
  DenseBitMatrix dense_encode_tiebreak;
  DenseBitMatrix dense_model_tiebreak;
};

RunContext build_context(const ExperimentConfig& cfg, std::size_t features,
                         std::size_t class_count, bool naive) {
  RunContext ctx;
  try {
    ctx.codebook = make_codebook(generation_from_name(cfg.generation),
                                 binding_from_name(cfg.binding), features, cfg.bins, cfg.dim,
                                 derive_seed(cfg.seed, kCodebookTag));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (ctx.codebook.binding == BindingStrategy::kAppending && features > cfg.dim) {
    throw ConfigError("appending binding needs dim >= feature count (" +
                      std::to_string(features) + " features, dim " + std::to_string(cfg.dim) +
                      ")");
  }
  ctx.encode_tiebreak = generate_random(1, cfg.dim, derive_seed(cfg.seed, kEncodeTiebreakTag));
  ctx.model_config = ModelConfig{class_count, cfg.dim, metric_from_name(cfg.metric), cfg.gamma,
                                 cfg.seed};
  if (naive) {
    ctx.dense_codebook = ref::to_dense(ctx.codebook);
    ctx.dense_encode_tiebreak = unpack(ctx.encode_tiebreak);
    ctx.dense_model_tiebreak =
        unpack(generate_random(1, cfg.dim, derive_seed(cfg.seed, kModelTiebreakTag)));
  }
  return ctx;
}

// Labels predicted for the test rows of one fold, with stages accumulated
// into `timings` under "discretize" / "encode" / "train" / "predict".
std::vector<int> run_fold_packed(const ExperimentConfig& cfg, const RunContext& ctx,
                                 const Dataset& train, const Dataset& test,
                                 StageTimings& timings) {
  Discretizer disc;
  std::vector<std::uint32_t> train_bins;
  std::vector<std::uint32_t> test_bins;
  time_stage("discretize", timings, [&] {
    disc = fit_discretizer(train.X, train.rows, train.features, cfg.bins);
    train_bins = discretize_matrix(train.X, train.rows, disc);
    test_bins = discretize_matrix(test.X, test.rows, disc);
  });
  PackedBitMatrix encoded_train;
  PackedBitMatrix encoded_test;
  time_stage("encode", timings, [&] {
    encoded_train = encode_batch(train_bins, train.rows, ctx.codebook, ctx.encode_tiebreak,
                                 cfg.threads);
    encoded_test = encode_batch(test_bins, test.rows, ctx.codebook, ctx.encode_tiebreak,
                                cfg.threads);
  });
  HDModel model;
  time_stage("train", timings, [&] {
    model = cfg.trainer == "online"
                ? train_online(encoded_train, train.y, cfg.batch_size, ctx.model_config)
                : train_classical(encoded_train, train.y, ctx.model_config);
  });
  std::vector<Prediction> preds;
  time_stage("predict", timings, [&] { preds = predict(model, encoded_test, cfg.threads); });
  std::vector<int> labels(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) labels[i] = preds[i].label;
  return labels;
}

std::vector<int> run_fold_naive(const ExperimentConfig& cfg, const RunContext& ctx,
                                const Dataset& train, const Dataset& test,
                                StageTimings& timings) {
  Discretizer disc;
  std::vector<std::uint32_t> train_bins;
  std::vector<std::uint32_t> test_bins;
  time_stage("discretize", timings, [&] {
    disc = fit_discretizer(train.X, train.rows, train.features, cfg.bins);
    train_bins = discretize_matrix(train.X, train.rows, disc);
    test_bins = discretize_matrix(test.X, test.rows, disc);
  });
  DenseBitMatrix encoded_train;
  DenseBitMatrix encoded_test;
  time_stage("encode", timings, [&] {
    encoded_train = ref::encode_batch(train_bins, train.rows, ctx.dense_codebook,
                                      ctx.dense_encode_tiebreak);
    encoded_test = ref::encode_batch(test_bins, test.rows, ctx.dense_codebook,
                                     ctx.dense_encode_tiebreak);
  });
  ref::NaiveModel model;
  time_stage("train", timings, [&] {
    model = cfg.trainer == "online"
                ? ref::train_online(encoded_train, train.y, cfg.batch_size, ctx.model_config,
                                    ctx.dense_model_tiebreak)
                : ref::train_classical(encoded_train, train.y, ctx.model_config,
                                       ctx.dense_model_tiebreak);
  });
  std::vector<Prediction> preds;
  time_stage("predict", timings, [&] { preds = ref::predict(model, encoded_test); });
  std::vector<int> labels(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) labels[i] = preds[i].label;
  return labels;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

std::string predictions_csv(const std::vector<PredictionRow>& rows) {
  std::string text = "index,truth,predicted,smoothed\n";
  for (const PredictionRow& r : rows) {
    text += std::to_string(r.index) + "," + std::to_string(r.truth) + "," +
            std::to_string(r.predicted) + "," + std::to_string(r.smoothed) + "\n";
  }
  return text;
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text, const ExperimentConfig& base,
                                  bool* seed_present) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return apply_json(j, base, seed_present);
}

ExperimentConfig load_config_file(const std::string& path, const ExperimentConfig& base,
                                  bool* seed_present) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return config_from_json(text, base, seed_present);
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.data_path.empty()) throw ConfigError("no dataset path (--config data field or flag)");
  if (cfg.dim == 0) throw ConfigError("dim must be >= 1");
  if (cfg.bins < 2) throw ConfigError("bins must be >= 2");
  if (cfg.batch_size == 0) throw ConfigError("batch-size must be >= 1");
  if (cfg.gamma < 0.0) throw ConfigError("gamma must be >= 0");
  if (cfg.smooth_window == 0 || cfg.smooth_window % 2 == 0) {
    throw ConfigError("smooth-window must be odd and >= 1");
  }
  if (cfg.threads == 0) throw ConfigError("threads must be >= 1");
  if (cfg.positive_class < 0) throw ConfigError("positive class must be >= 0");
  try {
    generation_from_name(cfg.generation);
    binding_from_name(cfg.binding);
    metric_from_name(cfg.metric);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (cfg.trainer != "classical" && cfg.trainer != "online") {
    throw ConfigError("unknown trainer '" + cfg.trainer + "' (expected classical or online)");
  }
  if (cfg.split != "single" && cfg.split != "tscv" && cfg.split != "loso") {
    throw ConfigError("unknown split '" + cfg.split + "' (expected single, tscv, or loso)");
  }
  if (cfg.backend != "packed" && cfg.backend != "naive") {
    throw ConfigError("unknown backend '" + cfg.backend + "' (expected packed or naive)");
  }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  Dataset data = load_dataset(cfg);
  if (data.rows == 0 || data.features == 0) {
    throw DataError(cfg.data_path + ": dataset has no rows or no feature columns");
  }
  std::size_t class_count = 0;
  try {
    class_count = class_count_of(data);
    if (class_count < 2) {
      throw std::invalid_argument("dataset contains a single class");
    }
    if (cfg.subsample_factor > 0) {
      data = subsample_factor(data, cfg.positive_class, cfg.subsample_factor,
                              derive_seed(cfg.seed, kSubsampleTag));
    }
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  const SplitPlan plan = make_split(cfg, data);
  const bool naive = cfg.backend == "naive";
  const RunContext ctx = build_context(cfg, data.features, class_count, naive);

  StageTimings timings;
  std::vector<int> predicted(data.rows, -1);
  for (const Fold& fold : plan.folds) {
    const Dataset train = select_rows(data, fold.train);
    const Dataset test = select_rows(data, fold.test);
    const std::vector<int> labels =
        naive ? run_fold_naive(cfg, ctx, train, test, timings)
              : run_fold_packed(cfg, ctx, train, test, timings);
    for (std::size_t k = 0; k < fold.test.size(); ++k) {
      predicted[fold.test[k]] = labels[k];
    }
  }

  // Concatenate every tested sample in original row order.
  std::vector<std::size_t> tested;
  for (std::size_t i = 0; i < data.rows; ++i) {
    if (predicted[i] >= 0) tested.push_back(i);
  }
  if (tested.empty()) {
    throw DataError("no test samples produced by split '" + cfg.split + "'");
  }
  std::vector<int> pred_seq(tested.size());
  std::vector<int> truth_seq(tested.size());
  for (std::size_t k = 0; k < tested.size(); ++k) {
    pred_seq[k] = predicted[tested[k]];
    truth_seq[k] = data.y[tested[k]];
  }
  // Smoothing operates on binary label sequences; multi-class runs keep raw
  // predictions.
  const std::vector<int> final_seq = (class_count == 2 && cfg.smooth_window > 1)
                                         ? smooth_labels(pred_seq, cfg.smooth_window)
                                         : pred_seq;

  ExperimentResult result;
  result.fold_count = plan.folds.size();
  result.report = sample_metrics(final_seq, truth_seq, cfg.positive_class);
  result.report.episodes = episode_metrics(final_seq, truth_seq, cfg.positive_class);
  result.report.timings = timings;
  result.predictions.resize(tested.size());
  for (std::size_t k = 0; k < tested.size(); ++k) {
    result.predictions[k] = PredictionRow{tested[k], truth_seq[k], pred_seq[k], final_seq[k]};
  }

  if (!cfg.out.empty()) {
    const std::filesystem::path dir(cfg.out);
    std::filesystem::create_directories(dir);
    write_text(dir / "metrics.json", report_to_json(result.report, false));
    json t = {{"folds", result.fold_count}, {"timings", timings}};
    write_text(dir / "timings.json", t.dump(2) + "\n");
    write_text(dir / "predictions.csv", predictions_csv(result.predictions));
    write_text(dir / "splits.json", split_plan_to_json(plan));
  }
  return result;
}

void run_sweep(const ExperimentConfig& cfg, const std::string& axis,
               std::span<const std::uint64_t> values) {
  if (axis != "dim" && axis != "batch") {
    throw ConfigError("sweep axis must be 'dim' or 'batch', got '" + axis + "'");
  }
  if (values.size() < 2) {
    throw ConfigError("sweep needs at least 2 values, got " + std::to_string(values.size()));
  }
  if (cfg.out.empty()) {
    throw ConfigError("sweep needs an output CSV path (--out)");
  }
  std::string csv = "axis,value,status,accuracy,f1,discretize_seconds,encode_seconds,"
                    "train_seconds,predict_seconds\n";
  for (const std::uint64_t value : values) {
    ExperimentConfig run = cfg;
    run.out.clear();  // per-value runs emit no files, only the table row
    if (axis == "dim") {
      run.dim = value;
    } else {
      run.batch_size = value;
      run.trainer = "online";  // batch size only means something online
    }
    std::string row = axis + "," + std::to_string(value);
    try {
      const ExperimentResult res = run_experiment(run);
      char acc[32];
      std::snprintf(acc, sizeof acc, "%.6f", res.report.accuracy);
      std::string f1;
      if (res.report.f1) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", *res.report.f1);
        f1 = buf;
      }
      auto seconds = [&res](const char* stage) {
        char buf[32];
        const auto it = res.report.timings.find(stage);
        std::snprintf(buf, sizeof buf, "%.6f", it == res.report.timings.end() ? 0.0 : it->second);
        return std::string(buf);
      };
      row += ",ok," + std::string(acc) + "," + f1 + "," + seconds("discretize") + "," +
             seconds("encode") + "," + seconds("train") + "," + seconds("predict");
    } catch (const std::exception& e) {
      std::cerr << "sweep " << axis << "=" << value << " failed: " << e.what() << "\n";
      row += ",failed,,,,,,";
    }
    csv += row + "\n";
  }
  write_text(std::filesystem::path(cfg.out), csv);
}

BenchResult run_bench(const ExperimentConfig& cfg) {
  validate(cfg);
  Dataset data = load_dataset(cfg);
  if (data.rows == 0 || data.features == 0) {
    throw DataError(cfg.data_path + ": dataset has no rows or no feature columns");
  }
  std::size_t class_count = 0;
  try {
    class_count = class_count_of(data);
    if (class_count < 2) throw std::invalid_argument("dataset contains a single class");
    if (cfg.subsample_factor > 0) {
      data = subsample_factor(data, cfg.positive_class, cfg.subsample_factor,
                              derive_seed(cfg.seed, kSubsampleTag));
    }
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  const SplitPlan plan = make_split(cfg, data);
  const Fold& fold = plan.folds.front();
  const Dataset train = select_rows(data, fold.train);
  const Dataset test = select_rows(data, fold.test);
  const RunContext ctx = build_context(cfg, data.features, class_count, /*naive=*/true);

  const Discretizer disc = fit_discretizer(train.X, train.rows, train.features, cfg.bins);
  const std::vector<std::uint32_t> train_bins = discretize_matrix(train.X, train.rows, disc);
  const std::vector<std::uint32_t> test_bins = discretize_matrix(test.X, test.rows, disc);

  BenchResult result;
  StageTimings packed_times;
  StageTimings naive_times;

  // encode
  PackedBitMatrix p_train;
  PackedBitMatrix p_test;
  time_stage("encode", packed_times, [&] {
    p_train = encode_batch(train_bins, train.rows, ctx.codebook, ctx.encode_tiebreak,
                           cfg.threads);
    p_test = encode_batch(test_bins, test.rows, ctx.codebook, ctx.encode_tiebreak, cfg.threads);
  });
  DenseBitMatrix n_train;
  DenseBitMatrix n_test;
  time_stage("encode", naive_times, [&] {
    n_train = ref::encode_batch(train_bins, train.rows, ctx.dense_codebook,
                                ctx.dense_encode_tiebreak);
    n_test = ref::encode_batch(test_bins, test.rows, ctx.dense_codebook,
                               ctx.dense_encode_tiebreak);
  });
  if (unpack(p_train) != n_train || unpack(p_test) != n_test) {
    throw BackendMismatchError("backends disagree on encoded hypervectors");
  }

  // train_classical
  HDModel p_classical;
  time_stage("train_classical", packed_times,
             [&] { p_classical = train_classical(p_train, train.y, ctx.model_config); });
  ref::NaiveModel n_classical;
  time_stage("train_classical", naive_times, [&] {
    n_classical = ref::train_classical(n_train, train.y, ctx.model_config,
                                       ctx.dense_model_tiebreak);
  });
  if (unpack(p_classical.class_vectors) != n_classical.class_vectors) {
    throw BackendMismatchError("backends disagree on classically trained class vectors");
  }

  // train_online
  HDModel p_online;
  time_stage("train_online", packed_times, [&] {
    p_online = train_online(p_train, train.y, cfg.batch_size, ctx.model_config);
  });
  ref::NaiveModel n_online;
  time_stage("train_online", naive_times, [&] {
    n_online = ref::train_online(n_train, train.y, cfg.batch_size, ctx.model_config,
                                 ctx.dense_model_tiebreak);
  });
  for (std::size_t k = 0; k < p_online.accumulators.size(); ++k) {
    const double a = p_online.accumulators[k];
    const double b = n_online.accumulators[k];
    if (std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(a))) {
      throw BackendMismatchError("backends disagree on online-trained accumulators");
    }
  }

  // predict (with the classically trained models)
  std::vector<Prediction> p_preds;
  time_stage("predict", packed_times,
             [&] { p_preds = predict(p_classical, p_test, cfg.threads); });
  std::vector<Prediction> n_preds;
  time_stage("predict", naive_times, [&] { n_preds = ref::predict(n_classical, n_test); });
  for (std::size_t i = 0; i < p_preds.size(); ++i) {
    if (p_preds[i].label != n_preds[i].label) {
      throw BackendMismatchError("backends disagree on predicted label at test row " +
                                 std::to_string(i));
    }
  }
  result.labels_match = true;
  for (const char* stage : {"encode", "train_classical", "train_online", "predict"}) {
    result.stages[stage] = BenchStage{packed_times[stage], naive_times[stage]};
  }

  if (!cfg.out.empty()) {
    const std::filesystem::path dir(cfg.out);
    std::filesystem::create_directories(dir);
    json stages;
    for (const auto& [name, stage] : result.stages) {
      stages[name] = {{"packed_seconds", stage.packed_seconds},
                      {"naive_seconds", stage.naive_seconds},
                      {"speedup", stage.packed_seconds > 0.0
                                      ? stage.naive_seconds / stage.packed_seconds
                                      : 0.0}};
    }
    const json report = {{"labels_match", result.labels_match},
                         {"train_rows", train.rows},
                         {"test_rows", test.rows},
                         {"dim", cfg.dim},
                         {"stages", stages}};
    write_text(dir / "bench.json", report.dump(2) + "\n");
  }
  return result;
}

}  // namespace hypervec
