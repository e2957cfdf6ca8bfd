#pragma once

// Naive byte-per-bit oracle: scalar-loop implementations of every kernel,
// encoding, training, and prediction path. No packing, no word tricks, no
// threads, so a bug cannot be shared with the packed module. This is the
// differential-testing ground truth and the benchmark baseline.

#include <cstdint>
#include <span>
#include <vector>

#include "hypervec/bitmat.hpp"
#include "hypervec/encoding.hpp"
#include "hypervec/model.hpp"

namespace hypervec::ref {

DenseBitMatrix xor_bind(const DenseBitMatrix& a, const DenseBitMatrix& b);
DenseBitMatrix rotate(const DenseBitMatrix& m, std::size_t shift);
CountVector horizontal_sum(const DenseBitMatrix& m);
DenseBitMatrix transpose(const DenseBitMatrix& m);
CountVector vertical_sum(const DenseBitMatrix& m);
DenseBitMatrix majority_binarize(const CountVector& counts, std::uint64_t n,
                                 const DenseBitMatrix& tiebreak);
double hamming_distance(const DenseBitMatrix& a, std::size_t row_a, const DenseBitMatrix& b,
                        std::size_t row_b);
double cosine_similarity(std::span<const double> acc, std::span<const std::uint8_t> row);

/// Unpacked copy of a Codebook for the scalar encoding path.
struct DenseCodebook {
  DenseBitMatrix id_vectors;
  DenseBitMatrix value_vectors;
  BindingStrategy binding = BindingStrategy::kIdLevel;
};

DenseCodebook to_dense(const Codebook& c);

DenseBitMatrix encode(std::span<const std::uint32_t> bins, const DenseCodebook& codebook,
                      const DenseBitMatrix& tiebreak);
DenseBitMatrix encode_batch(std::span<const std::uint32_t> bin_rows, std::size_t rows,
                            const DenseCodebook& codebook, const DenseBitMatrix& tiebreak);

/// Byte-per-bit mirror of HDModel with identical update rules.
struct NaiveModel {
  ModelConfig config;
  std::vector<double> accumulators;  // class_count x dim
  std::vector<double> class_weight;
  std::vector<std::uint64_t> sample_counts;
  DenseBitMatrix class_vectors;
  DenseBitMatrix tiebreak;

  void refresh_binarization(std::size_t c);
  void refresh_binarization();
};

struct NaiveSnapshot {
  DenseBitMatrix class_vectors;
  std::vector<double> accumulators;
};

NaiveSnapshot freeze(const NaiveModel& model);

NaiveModel train_classical(const DenseBitMatrix& encoded, std::span<const int> labels,
                           const ModelConfig& config, const DenseBitMatrix& tiebreak);
void online_update(NaiveModel& model, const DenseBitMatrix& batch, std::span<const int> labels,
                   const NaiveSnapshot& frozen);
NaiveModel train_online(const DenseBitMatrix& encoded, std::span<const int> labels,
                        std::size_t batch_size, const ModelConfig& config,
                        const DenseBitMatrix& tiebreak);
std::vector<Prediction> predict(const NaiveModel& model, const DenseBitMatrix& encoded);

}  // namespace hypervec::ref
