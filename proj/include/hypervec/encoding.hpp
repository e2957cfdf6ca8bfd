#pragma once

// Feature discretization, ID/Value codebook generation (Random, ScaleRandom,
// Sandwich) and datapoint encoding via ID-Level binding, feature permutation,
// or feature appending.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hypervec/bitmat.hpp"

namespace hypervec {

enum class GenerationStrategy { kRandom, kScaleRandom, kSandwich };
enum class BindingStrategy { kIdLevel, kPermutation, kAppending };

GenerationStrategy generation_from_name(const std::string& name);
BindingStrategy binding_from_name(const std::string& name);
std::string to_name(GenerationStrategy s);
std::string to_name(BindingStrategy s);

/// Maps raw feature values to bin indices using per-feature min/max learned
/// from training data. Features with min == max are degenerate and always
/// map to bin 0; out-of-range values clamp to the edge bins.
struct Discretizer {
  std::vector<double> min;
  std::vector<double> max;
  std::size_t bins = 2;

  [[nodiscard]] std::size_t feature_count() const { return min.size(); }
  [[nodiscard]] bool degenerate(std::size_t f) const { return min[f] == max[f]; }
};

// Per-feature min/max scan over a row-major n x F training matrix.
// Throws std::invalid_argument for an empty matrix or bins < 2.
Discretizer fit_discretizer(std::span<const double> data, std::size_t rows,
                            std::size_t features, std::size_t bins);

// Bin indices for one feature vector of length F.
std::vector<std::uint32_t> discretize(std::span<const double> x, const Discretizer& d);

// Row-wise discretization of an n x F matrix into an n x F bin-index matrix.
std::vector<std::uint32_t> discretize_matrix(std::span<const double> data, std::size_t rows,
                                             const Discretizer& d);

// n x D matrix with every bit drawn iid Bernoulli(1/2) from the seed.
PackedBitMatrix generate_random(std::size_t count, std::size_t dim, std::uint64_t seed);

// Level vectors with linearly growing distance: V_{k+1} flips exactly
// floor(D / (2(B-1))) previously-unflipped positions of V_k, so
// hamming(V_0, V_k) == k * floor(D / (2(B-1))). Throws when 2(B-1) > D.
PackedBitMatrix generate_scale_random(std::size_t bins, std::size_t dim, std::uint64_t seed);

// Level vectors where each odd-indexed vector shares its first D/2 bits with
// the previous vector and its second half with the next even vector (random
// for the last odd one). Requires even D.
PackedBitMatrix generate_sandwich(std::size_t bins, std::size_t dim, std::uint64_t seed);

/// Immutable per-feature ID vectors and per-bin Value vectors plus the
/// strategies and seed they were generated from. Regeneration from
/// (seed, strategy, F, B, D) is bit-identical.
struct Codebook {
  PackedBitMatrix id_vectors;     // F x D
  PackedBitMatrix value_vectors;  // B x D
  GenerationStrategy generation = GenerationStrategy::kRandom;
  BindingStrategy binding = BindingStrategy::kIdLevel;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t feature_count() const { return id_vectors.rows(); }
  [[nodiscard]] std::size_t bin_count() const { return value_vectors.rows(); }
  [[nodiscard]] std::size_t dim() const { return id_vectors.dim(); }
};

Codebook make_codebook(GenerationStrategy generation, BindingStrategy binding,
                       std::size_t features, std::size_t bins, std::size_t dim,
                       std::uint64_t seed);

// Encodes one bin-index vector (length F) into a 1 x D hypervector.
// IdLevel bundles {ID_f xor V_{x_f}} with majority voting, Permutation
// bundles {rotate(V_{x_f}, f)}, Appending concatenates the first floor(D/F)
// bits of each V_{x_f}. Throws on bin indices >= B.
PackedBitMatrix encode(std::span<const std::uint32_t> bins, const Codebook& codebook,
                       const PackedBitMatrix& tiebreak);

// Row-wise encode of an n x F bin-index matrix; row i equals
// encode(row i). Rows may be processed by up to `threads` workers; the
// result is identical for any thread count.
PackedBitMatrix encode_batch(std::span<const std::uint32_t> bin_rows, std::size_t rows,
                             const Codebook& codebook, const PackedBitMatrix& tiebreak,
                             std::size_t threads = 1);

// Codebook container: "HVCB" magic, JSON header, then the two packed
// matrices. Discretizer serializes as plain JSON.
void save_codebook(const Codebook& c, std::ostream& out);
Codebook load_codebook(std::istream& in);
void save_codebook(const Codebook& c, const std::string& path);
Codebook load_codebook(const std::string& path);

std::string discretizer_to_json(const Discretizer& d);
Discretizer discretizer_from_json(const std::string& text);

}  // namespace hypervec
