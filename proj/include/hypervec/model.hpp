#pragma once

// HD classification model: classical single-pass accumulation, online
// training with distance-weighted batch updates, Hamming/cosine similarity,
// and nearest-class prediction.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hypervec/bitmat.hpp"

namespace hypervec {

enum class Metric { kHamming, kCosine };

Metric metric_from_name(const std::string& name);
std::string to_name(Metric m);

struct ModelConfig {
  std::size_t class_count = 2;
  std::size_t dim = 0;
  Metric metric = Metric::kHamming;
  double gamma = 1.0;  // learning rate for wrong-class penalties
  std::uint64_t seed = 1;
};

/// Per-class signed accumulators plus their majority binarization.
///
/// class_vectors bit j of class c is 1 iff 2*acc > weight, 0 iff 2*acc <
/// weight, and the tiebreak bit on equality, where weight is the class's
/// running positive-weight total (classical samples contribute 1.0 each,
/// online correct-class updates contribute their delta). Classes that never
/// received a sample keep weight 0 and binarize to the tiebreak vector.
struct HDModel {
  ModelConfig config;
  std::vector<double> accumulators;        // class_count x dim, row-major
  std::vector<double> class_weight;        // positive-weight total per class
  std::vector<std::uint64_t> sample_counts;
  PackedBitMatrix class_vectors;           // class_count x dim
  PackedBitMatrix tiebreak;                // 1 x dim, derived from config.seed

  [[nodiscard]] std::span<const double> accumulator_row(std::size_t c) const {
    return {accumulators.data() + c * config.dim, config.dim};
  }
  [[nodiscard]] std::span<double> accumulator_row(std::size_t c) {
    return {accumulators.data() + c * config.dim, config.dim};
  }
  [[nodiscard]] bool class_empty(std::size_t c) const { return sample_counts[c] == 0; }

  // Recomputes the binarization of one class (or all); idempotent.
  void refresh_binarization(std::size_t c);
  void refresh_binarization();
};

/// Prediction for one datapoint: distances holds the normalized Hamming
/// distance (argmin wins) or cosine similarity (argmax wins) per class;
/// ties resolve to the lowest class index.
struct Prediction {
  int label = 0;
  std::vector<double> distances;
};

// Normalized Hamming distance popcount(a xor b) / D between two packed rows.
double hamming_distance(const PackedBitMatrix& a, std::size_t row_a,
                        const PackedBitMatrix& b, std::size_t row_b);
double hamming_distance_words(std::span<const std::uint32_t> a,
                              std::span<const std::uint32_t> b, std::size_t dim);

// Cosine of an accumulator row against an unpacked 0/1 row. Throws
// std::domain_error when either vector is all-zero.
double cosine_similarity(std::span<const double> acc,
                         std::span<const std::uint32_t> packed_row, std::size_t dim);

HDModel make_empty_model(const ModelConfig& config);

// Single-pass accumulation: accumulator[c] is the per-position count of set
// bits over rows labeled c; order-independent. Labels must be < class_count.
HDModel train_classical(const PackedBitMatrix& encoded, std::span<const int> labels,
                        const ModelConfig& config);

/// Class state frozen at batch start; online updates compute all distances
/// against this snapshot.
struct ModelSnapshot {
  PackedBitMatrix class_vectors;
  std::vector<double> accumulators;  // referenced by the cosine metric only
};

ModelSnapshot freeze(const HDModel& model);

// Applies one batch of online updates against the frozen snapshot: every
// sample adds delta_true per set bit to its true class; a misclassified
// sample additionally subtracts gamma * (1 - delta_wrong) per set bit from
// the wrongly predicted class. Touched classes are re-binarized afterwards.
void online_update(HDModel& model, const PackedBitMatrix& batch, std::span<const int> labels,
                   const ModelSnapshot& frozen);

// Online training: the first batch is accumulated classically to bootstrap
// the class vectors, then every batch (including the first) receives an
// online_update pass against a snapshot frozen at its start. batch_size = 1
// reproduces per-datapoint updating.
HDModel train_online(const PackedBitMatrix& encoded, std::span<const int> labels,
                     std::size_t batch_size, const ModelConfig& config);

// Nearest-class scan per row. Hamming compares against class_vectors,
// cosine against raw accumulators (an all-zero accumulator scores -inf so
// empty classes are never selected). Deterministic for any thread count.
std::vector<Prediction> predict(const HDModel& model, const PackedBitMatrix& encoded,
                                std::size_t threads = 1);

// Model container: "HVMD" magic, JSON header (C, D, gamma, metric, seed),
// packed class vectors, then accumulators / weights / counts little-endian.
void save_model(const HDModel& model, std::ostream& out);
HDModel load_model(std::istream& in);
void save_model(const HDModel& model, const std::string& path);
HDModel load_model(const std::string& path);

}  // namespace hypervec
