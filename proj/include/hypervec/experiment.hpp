#pragma once

// Experiment orchestration shared by the CLI subcommands: validated run
// configuration, the fold pipeline (discretize -> encode -> train ->
// predict -> smooth -> score), hyperparameter sweeps, and the packed-vs-
// naive benchmark with enforced output equality.

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypervec/eval.hpp"

namespace hypervec {

/// Invalid or inconsistent run parameters (exit code 1 at the CLI).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Unreadable or malformed dataset/model files (exit code 2).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Packed and naive backends disagreed on outputs (exit code 3).
struct BackendMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Every knob of one run. Defaults give a packed, classically trained
/// Hamming pipeline on a chronological 80/20 split.
struct ExperimentConfig {
  std::string data_path;
  std::string label_column = "label";
  std::string segment_column = "segment";
  std::size_t dim = 10240;
  std::size_t bins = 16;
  std::string generation = "random";    // random | scale_random | sandwich
  std::string binding = "id_level";     // id_level | permutation | appending
  std::string metric = "hamming";       // hamming | cosine
  std::string trainer = "classical";    // classical | online
  std::string split = "single";         // single | tscv | loso
  std::string backend = "packed";       // packed | naive
  double gamma = 1.0;
  std::size_t batch_size = 1024;
  std::size_t subsample_factor = 0;     // 0 = keep the full dataset
  std::size_t smooth_window = 11;       // samples; 1 disables smoothing
  int positive_class = 1;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::string out;  // output directory (experiment/bench) or CSV path (sweep)
};

// Overlays JSON fields onto `base`; unknown keys and wrong types are
// ConfigErrors. `seed_present` (optional) reports whether the JSON carried a
// seed, so the CLI can apply its fallback chain.
ExperimentConfig config_from_json(const std::string& text, const ExperimentConfig& base,
                                  bool* seed_present = nullptr);
ExperimentConfig load_config_file(const std::string& path, const ExperimentConfig& base,
                                  bool* seed_present = nullptr);

// Rejects out-of-range values and unknown strategy names with ConfigError.
void validate(const ExperimentConfig& cfg);

/// One prediction row of predictions.csv.
struct PredictionRow {
  std::size_t index = 0;  // row index in the loaded dataset
  int truth = 0;
  int predicted = 0;      // raw model output
  int smoothed = 0;       // after smoothing (== predicted when disabled)
};

struct ExperimentResult {
  EvalReport report;
  std::size_t fold_count = 0;
  std::vector<PredictionRow> predictions;
};

// Full protocol: per fold fit the discretizer on training rows only, encode,
// train, predict the test rows; concatenate fold predictions in original row
// order; smooth binary predictions; score sample- and episode-level. Writes
// metrics.json (no timings), timings.json, predictions.csv, and splits.json
// under cfg.out when it is non-empty. Deterministic per (config, seed).
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Measured stage seconds per backend.
struct BenchStage {
  double packed_seconds = 0.0;
  double naive_seconds = 0.0;
};

struct BenchResult {
  std::map<std::string, BenchStage> stages;  // encode, train_classical, train_online, predict
  bool labels_match = false;
};

// One run of each value along `axis` ("dim" or "batch"; batch forces the
// online trainer) with a constant seed; appends one CSV row per value to
// cfg.out, marking failed runs instead of aborting the sweep.
void run_sweep(const ExperimentConfig& cfg, const std::string& axis,
               std::span<const std::uint64_t> values);

// Runs encode / train_classical / train_online / predict on both backends
// over the first fold of the configured split, enforcing equal outputs
// (BackendMismatchError otherwise) and reporting per-stage seconds. Writes
// bench.json under cfg.out when non-empty.
BenchResult run_bench(const ExperimentConfig& cfg);

}  // namespace hypervec
