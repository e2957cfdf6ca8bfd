// Command-line front end: encode / train / predict pipeline tools plus the
// experiment, sweep, and bench harnesses. Exit codes: 0 success, 1 usage or
// configuration error, 2 data error, 3 backend output mismatch.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hypervec/data.hpp"
#include "hypervec/encoding.hpp"
#include "hypervec/experiment.hpp"
#include "hypervec/io.hpp"
#include "hypervec/model.hpp"
#include "hypervec/rng.hpp"

namespace {

using hypervec::ConfigError;
using hypervec::DataError;
using hypervec::ExperimentConfig;

/// CLI11 bindings for the shared run-configuration flags. Flag values land
/// in `flags`; option pointers tell us which were actually given so they can
/// override the config file.
struct ConfigCli {
  std::string config_path;
  ExperimentConfig flags;
  CLI::Option* config = nullptr;
  CLI::Option* data = nullptr;
  CLI::Option* label_column = nullptr;
  CLI::Option* segment_column = nullptr;
  CLI::Option* dim = nullptr;
  CLI::Option* bins = nullptr;
  CLI::Option* generation = nullptr;
  CLI::Option* binding = nullptr;
  CLI::Option* metric = nullptr;
  CLI::Option* trainer = nullptr;
  CLI::Option* split = nullptr;
  CLI::Option* backend = nullptr;
  CLI::Option* gamma = nullptr;
  CLI::Option* batch_size = nullptr;
  CLI::Option* subsample_factor = nullptr;
  CLI::Option* smooth_window = nullptr;
  CLI::Option* positive_class = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* threads = nullptr;
  CLI::Option* out = nullptr;
};

void add_config_flags(CLI::App& cmd, ConfigCli& c) {
  c.config = cmd.add_option("--config", c.config_path,
                            "JSON config file; explicit flags override its values");
  c.data = cmd.add_option("--data", c.flags.data_path, "dataset CSV path");
  c.label_column = cmd.add_option("--label-column", c.flags.label_column,
                                  "label column name (default: label)");
  c.segment_column = cmd.add_option("--segment-column", c.flags.segment_column,
                                    "segment column name (default: segment)");
  c.dim = cmd.add_option("--dim", c.flags.dim, "hypervector dimension (default: 10240)");
  c.bins = cmd.add_option("--bins", c.flags.bins, "discretization bins (default: 16)");
  c.generation = cmd.add_option("--generation", c.flags.generation,
                                "value-vector generation: random|scale_random|sandwich");
  c.binding = cmd.add_option("--binding", c.flags.binding,
                             "binding: id_level|permutation|appending");
  c.metric = cmd.add_option("--metric", c.flags.metric, "similarity: hamming|cosine");
  c.trainer = cmd.add_option("--trainer", c.flags.trainer, "training: classical|online");
  c.split = cmd.add_option("--split", c.flags.split, "split: single|tscv|loso");
  c.backend = cmd.add_option("--backend", c.flags.backend, "backend: packed|naive");
  c.gamma = cmd.add_option("--gamma", c.flags.gamma, "online learning rate (default: 1.0)");
  c.batch_size = cmd.add_option("--batch-size", c.flags.batch_size,
                                "online training batch size (default: 1024)");
  c.subsample_factor = cmd.add_option("--subsample-factor", c.flags.subsample_factor,
                                      "keep all positive-class rows plus factor x as many "
                                      "others (0 = off)");
  c.smooth_window = cmd.add_option("--smooth-window", c.flags.smooth_window,
                                   "odd smoothing window in samples (default: 11)");
  c.positive_class = cmd.add_option("--positive-class", c.flags.positive_class,
                                    "label treated as positive (default: 1)");
  c.seed = cmd.add_option("--seed", c.flags.seed,
                          "RNG seed (fallback: config file, then HYPERVEC_SEED, then 1)");
  c.threads = cmd.add_option("--threads", c.flags.threads, "worker thread cap (default: 1)");
  c.out = cmd.add_option("--out", c.flags.out, "output directory (experiment/bench) or "
                                               "CSV path (sweep)");
}

std::uint64_t seed_from_env() {
  const char* env = std::getenv("HYPERVEC_SEED");
  if (env == nullptr) return 1;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0') {
    throw ConfigError(std::string("HYPERVEC_SEED must be an unsigned integer, got '") + env +
                      "'");
  }
  return v;
}

// defaults < config file < explicit flags; seed falls back to HYPERVEC_SEED.
ExperimentConfig resolve_config(const ConfigCli& c) {
  ExperimentConfig cfg;
  bool seed_in_file = false;
  if (c.config->count() > 0) {
    cfg = hypervec::load_config_file(c.config_path, cfg, &seed_in_file);
  }
  if (c.data->count() > 0) cfg.data_path = c.flags.data_path;
  if (c.label_column->count() > 0) cfg.label_column = c.flags.label_column;
  if (c.segment_column->count() > 0) cfg.segment_column = c.flags.segment_column;
  if (c.dim->count() > 0) cfg.dim = c.flags.dim;
  if (c.bins->count() > 0) cfg.bins = c.flags.bins;
  if (c.generation->count() > 0) cfg.generation = c.flags.generation;
  if (c.binding->count() > 0) cfg.binding = c.flags.binding;
  if (c.metric->count() > 0) cfg.metric = c.flags.metric;
  if (c.trainer->count() > 0) cfg.trainer = c.flags.trainer;
  if (c.split->count() > 0) cfg.split = c.flags.split;
  if (c.backend->count() > 0) cfg.backend = c.flags.backend;
  if (c.gamma->count() > 0) cfg.gamma = c.flags.gamma;
  if (c.batch_size->count() > 0) cfg.batch_size = c.flags.batch_size;
  if (c.subsample_factor->count() > 0) cfg.subsample_factor = c.flags.subsample_factor;
  if (c.smooth_window->count() > 0) cfg.smooth_window = c.flags.smooth_window;
  if (c.positive_class->count() > 0) cfg.positive_class = c.flags.positive_class;
  if (c.threads->count() > 0) cfg.threads = c.flags.threads;
  if (c.out->count() > 0) cfg.out = c.flags.out;
  if (c.seed->count() > 0) {
    cfg.seed = c.flags.seed;
  } else if (!seed_in_file) {
    cfg.seed = seed_from_env();
  }
  return cfg;
}

std::vector<int> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<int> labels;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    try {
      labels.push_back(std::stoi(line));
    } catch (const std::exception&) {
      throw DataError(path + ": line " + std::to_string(row) + ": expected an integer label");
    }
  }
  return labels;
}

int run_encode(const ConfigCli& c) {
  const ExperimentConfig cfg = resolve_config(c);
  if (cfg.data_path.empty()) throw ConfigError("encode needs --data");
  if (cfg.out.empty()) throw ConfigError("encode needs --out <stem>");
  hypervec::Dataset data;
  try {
    data = hypervec::load_csv(cfg.data_path, {cfg.label_column, cfg.segment_column});
  } catch (const std::runtime_error& e) {
    throw DataError(e.what());
  }
  if (data.rows == 0 || data.features == 0) {
    throw DataError(cfg.data_path + ": dataset has no rows or no feature columns");
  }
  hypervec::Codebook codebook;
  try {
    codebook = hypervec::make_codebook(
        hypervec::generation_from_name(cfg.generation), hypervec::binding_from_name(cfg.binding),
        data.features, cfg.bins, cfg.dim, hypervec::derive_seed(cfg.seed, 1));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const hypervec::Discretizer disc =
      hypervec::fit_discretizer(data.X, data.rows, data.features, cfg.bins);
  const std::vector<std::uint32_t> bins = hypervec::discretize_matrix(data.X, data.rows, disc);
  const hypervec::PackedBitMatrix tiebreak =
      hypervec::generate_random(1, cfg.dim, hypervec::derive_seed(cfg.seed, 2));
  const hypervec::PackedBitMatrix encoded =
      hypervec::encode_batch(bins, data.rows, codebook, tiebreak, cfg.threads);

  hypervec::save_codebook(codebook, cfg.out + ".codebook");
  hypervec::io::write_file(cfg.out + ".discretizer.json",
                           hypervec::discretizer_to_json(disc) + "\n");
  {
    std::ofstream out(cfg.out + ".encoded.hvpb", std::ios::binary);
    if (!out) throw DataError("cannot open " + cfg.out + ".encoded.hvpb for writing");
    hypervec::io::write_packed(out, encoded);
  }
  {
    std::string text;
    for (int label : data.y) text += std::to_string(label) + "\n";
    hypervec::io::write_file(cfg.out + ".labels.txt", text);
  }
  std::cout << "encoded " << data.rows << " rows x " << cfg.dim << " bits -> " << cfg.out
            << ".encoded.hvpb\n";
  return 0;
}

int run_train(const std::string& encoded_path, const std::string& labels_path,
              const ConfigCli& c, std::size_t classes) {
  const ExperimentConfig cfg = resolve_config(c);
  if (cfg.out.empty()) throw ConfigError("train needs --out <model file>");
  hypervec::PackedBitMatrix encoded;
  try {
    std::ifstream in(encoded_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + encoded_path);
    encoded = hypervec::io::read_packed(in);
  } catch (const std::runtime_error& e) {
    throw DataError(e.what());
  }
  const std::vector<int> labels = load_labels(labels_path);
  if (labels.size() != encoded.rows()) {
    throw DataError(labels_path + ": " + std::to_string(labels.size()) + " labels for " +
                    std::to_string(encoded.rows()) + " encoded rows");
  }
  std::size_t class_count = classes;
  if (class_count == 0) {
    int max_label = 0;
    for (int label : labels) {
      if (label < 0) throw DataError(labels_path + ": negative label");
      max_label = std::max(max_label, label);
    }
    class_count = static_cast<std::size_t>(max_label) + 1;
  }
  hypervec::ModelConfig mc;
  mc.class_count = class_count;
  mc.dim = encoded.dim();
  mc.metric = hypervec::metric_from_name(cfg.metric);
  mc.gamma = cfg.gamma;
  mc.seed = cfg.seed;
  hypervec::HDModel model;
  try {
    model = cfg.trainer == "online"
                ? hypervec::train_online(encoded, labels, cfg.batch_size, mc)
                : hypervec::train_classical(encoded, labels, mc);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  hypervec::save_model(model, cfg.out);
  std::cout << "trained " << cfg.trainer << " model on " << encoded.rows() << " rows -> "
            << cfg.out << "\n";
  return 0;
}

int run_predict(const std::string& model_path, const std::string& encoded_path,
                const ConfigCli& c) {
  const ExperimentConfig cfg = resolve_config(c);
  if (cfg.out.empty()) throw ConfigError("predict needs --out <csv path>");
  hypervec::HDModel model;
  hypervec::PackedBitMatrix encoded;
  try {
    model = hypervec::load_model(model_path);
    std::ifstream in(encoded_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + encoded_path);
    encoded = hypervec::io::read_packed(in);
  } catch (const std::runtime_error& e) {
    throw DataError(e.what());
  }
  if (encoded.dim() != model.config.dim) {
    throw DataError(encoded_path + ": dimension " + std::to_string(encoded.dim()) +
                    " does not match model dimension " + std::to_string(model.config.dim));
  }
  const std::vector<hypervec::Prediction> preds =
      hypervec::predict(model, encoded, cfg.threads);
  std::string csv = "index,label";
  for (std::size_t cls = 0; cls < model.config.class_count; ++cls) {
    csv += ",score_" + std::to_string(cls);
  }
  csv += "\n";
  char buf[40];
  for (std::size_t i = 0; i < preds.size(); ++i) {
    csv += std::to_string(i) + "," + std::to_string(preds[i].label);
    for (double s : preds[i].distances) {
      std::snprintf(buf, sizeof buf, "%.9g", s);
      csv += std::string(",") + buf;
    }
    csv += "\n";
  }
  hypervec::io::write_file(cfg.out, csv);
  std::cout << "predicted " << preds.size() << " rows -> " << cfg.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bit-packed hyperdimensional-computing classifier"};
  app.require_subcommand(1);

  CLI::App* cmd_encode = app.add_subcommand("encode", "discretize a CSV and encode it into "
                                                      "packed hypervectors");
  ConfigCli encode_cli;
  add_config_flags(*cmd_encode, encode_cli);

  CLI::App* cmd_train = app.add_subcommand("train", "train a model from encoded hypervectors");
  ConfigCli train_cli;
  std::string train_encoded;
  std::string train_labels;
  std::size_t train_classes = 0;
  add_config_flags(*cmd_train, train_cli);
  cmd_train->add_option("--encoded", train_encoded, "packed hypervector file from encode")
      ->required();
  cmd_train->add_option("--labels", train_labels, "label file from encode")->required();
  cmd_train->add_option("--classes", train_classes, "class count (default: max label + 1)");

  CLI::App* cmd_predict = app.add_subcommand("predict", "classify encoded hypervectors");
  ConfigCli predict_cli;
  std::string predict_model;
  std::string predict_encoded;
  add_config_flags(*cmd_predict, predict_cli);
  cmd_predict->add_option("--model", predict_model, "model file from train")->required();
  cmd_predict->add_option("--encoded", predict_encoded, "packed hypervector file")->required();

  CLI::App* cmd_experiment = app.add_subcommand("experiment", "run the full split/encode/"
                                                              "train/predict/score pipeline");
  ConfigCli experiment_cli;
  add_config_flags(*cmd_experiment, experiment_cli);

  CLI::App* cmd_sweep = app.add_subcommand("sweep", "repeat the experiment along one axis");
  ConfigCli sweep_cli;
  std::string sweep_axis;
  std::vector<std::uint64_t> sweep_values;
  add_config_flags(*cmd_sweep, sweep_cli);
  cmd_sweep->add_option("--axis", sweep_axis, "swept parameter: dim|batch")->required();
  cmd_sweep->add_option("--values", sweep_values, "values to sweep (>= 2)")->required();

  CLI::App* cmd_bench = app.add_subcommand("bench", "time packed vs naive backends and verify "
                                                    "identical outputs");
  ConfigCli bench_cli;
  add_config_flags(*cmd_bench, bench_cli);

  try {
    app.parse(argc, argv);
    if (cmd_encode->parsed()) return run_encode(encode_cli);
    if (cmd_train->parsed()) {
      return run_train(train_encoded, train_labels, train_cli, train_classes);
    }
    if (cmd_predict->parsed()) return run_predict(predict_model, predict_encoded, predict_cli);
    if (cmd_experiment->parsed()) {
      const ExperimentConfig cfg = resolve_config(experiment_cli);
      const hypervec::ExperimentResult res = hypervec::run_experiment(cfg);
      std::cout << "folds: " << res.fold_count << "\naccuracy: " << res.report.accuracy << "\n";
      if (!cfg.out.empty()) std::cout << "reports written to " << cfg.out << "\n";
      return 0;
    }
    if (cmd_sweep->parsed()) {
      const ExperimentConfig cfg = resolve_config(sweep_cli);
      hypervec::run_sweep(cfg, sweep_axis, sweep_values);
      std::cout << "sweep table written to " << cfg.out << "\n";
      return 0;
    }
    if (cmd_bench->parsed()) {
      const ExperimentConfig cfg = resolve_config(bench_cli);
      const hypervec::BenchResult res = hypervec::run_bench(cfg);
      for (const auto& [name, stage] : res.stages) {
        std::printf("%-16s packed %.6fs  naive %.6fs  speedup %.2fx\n", name.c_str(),
                    stage.packed_seconds, stage.naive_seconds,
                    stage.packed_seconds > 0.0 ? stage.naive_seconds / stage.packed_seconds
                                               : 0.0);
      }
      std::cout << "labels match: " << (res.labels_match ? "yes" : "no") << "\n";
      return 0;
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors are exit 1; --help stays 0
  } catch (const hypervec::BackendMismatchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
