#include "hypervec/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "json.hpp"

#include "hypervec/io.hpp"
#include "hypervec/kernels.hpp"
#include "hypervec/parallel.hpp"
#include "hypervec/rng.hpp"

namespace hypervec {

namespace {

using nlohmann::json;

// Fills every word of the matrix from the generator, then clears padding.
// One engine draw per word keeps the stream layout trivial to reproduce.
void fill_random(PackedBitMatrix& m, Rng& rng) {
  for (std::uint32_t& w : m.words()) w = rng.next_u32();
  m.mask_padding();
}

// Writes one row of `src` (1 x D) rotated by `shift` into `dst_row`.
// Output bit (j + shift) mod D is input bit j.
void rotate_row_into(std::span<const std::uint32_t> src, std::size_t dim, std::size_t shift,
                     std::span<std::uint32_t> dst) {
  const std::size_t s = dim == 0 ? 0 : shift % dim;
  if (s == 0) {
    std::copy(src.begin(), src.end(), dst.begin());
    return;
  }
  copy_bit_range(src, 0, dst, s, dim - s);
  copy_bit_range(src, dim - s, dst, 0, s);
}

void check_bins(std::span<const std::uint32_t> bins, const Codebook& codebook) {
  if (bins.size() != codebook.feature_count()) {
    throw std::invalid_argument("encode: expected " + std::to_string(codebook.feature_count()) +
                                " bin indices, got " + std::to_string(bins.size()));
  }
  for (std::size_t f = 0; f < bins.size(); ++f) {
    if (bins[f] >= codebook.bin_count()) {
      throw std::invalid_argument("encode: feature " + std::to_string(f) + " bin index " +
                                  std::to_string(bins[f]) + " out of range (bins = " +
                                  std::to_string(codebook.bin_count()) + ")");
    }
  }
}

}  // namespace

GenerationStrategy generation_from_name(const std::string& name) {
  if (name == "random") return GenerationStrategy::kRandom;
  if (name == "scale_random") return GenerationStrategy::kScaleRandom;
  if (name == "sandwich") return GenerationStrategy::kSandwich;
  throw std::invalid_argument("unknown generation strategy '" + name +
                              "' (expected random, scale_random, or sandwich)");
}

BindingStrategy binding_from_name(const std::string& name) {
  if (name == "id_level") return BindingStrategy::kIdLevel;
  if (name == "permutation") return BindingStrategy::kPermutation;
  if (name == "appending") return BindingStrategy::kAppending;
  throw std::invalid_argument("unknown binding strategy '" + name +
                              "' (expected id_level, permutation, or appending)");
}

std::string to_name(GenerationStrategy s) {
  switch (s) {
    case GenerationStrategy::kRandom: return "random";
    case GenerationStrategy::kScaleRandom: return "scale_random";
    case GenerationStrategy::kSandwich: return "sandwich";
  }
  throw std::logic_error("bad GenerationStrategy");
}

std::string to_name(BindingStrategy s) {
  switch (s) {
    case BindingStrategy::kIdLevel: return "id_level";
    case BindingStrategy::kPermutation: return "permutation";
    case BindingStrategy::kAppending: return "appending";
  }
  throw std::logic_error("bad BindingStrategy");
}

Discretizer fit_discretizer(std::span<const double> data, std::size_t rows,
                            std::size_t features, std::size_t bins) {
  if (rows == 0 || features == 0) {
    throw std::invalid_argument("fit_discretizer: empty training matrix");
  }
  if (bins < 2) {
    throw std::invalid_argument("fit_discretizer: need at least 2 bins");
  }
  if (data.size() != rows * features) {
    throw std::invalid_argument("fit_discretizer: data length does not match rows x features");
  }
  Discretizer d;
  d.bins = bins;
  d.min.assign(features, 0.0);
  d.max.assign(features, 0.0);
  for (std::size_t f = 0; f < features; ++f) {
    d.min[f] = d.max[f] = data[f];
  }
  for (std::size_t r = 1; r < rows; ++r) {
    for (std::size_t f = 0; f < features; ++f) {
      const double v = data[r * features + f];
      if (v < d.min[f]) d.min[f] = v;
      if (v > d.max[f]) d.max[f] = v;
    }
  }
  return d;
}

std::vector<std::uint32_t> discretize(std::span<const double> x, const Discretizer& d) {
  if (x.size() != d.feature_count()) {
    throw std::invalid_argument("discretize: expected " + std::to_string(d.feature_count()) +
                                " features, got " + std::to_string(x.size()));
  }
  std::vector<std::uint32_t> out(x.size(), 0);
  for (std::size_t f = 0; f < x.size(); ++f) {
    if (d.degenerate(f)) continue;  // constant feature: everything is bin 0
    const double t =
        std::floor((x[f] - d.min[f]) / (d.max[f] - d.min[f]) * static_cast<double>(d.bins));
    const double top = static_cast<double>(d.bins - 1);
    if (t >= top) {
      out[f] = static_cast<std::uint32_t>(d.bins - 1);
    } else if (t > 0.0) {
      out[f] = static_cast<std::uint32_t>(t);
    }  // below-range values (and anything non-finite) clamp to bin 0
  }
  return out;
}

std::vector<std::uint32_t> discretize_matrix(std::span<const double> data, std::size_t rows,
                                             const Discretizer& d) {
  const std::size_t features = d.feature_count();
  if (data.size() != rows * features) {
    throw std::invalid_argument("discretize_matrix: data length does not match rows x features");
  }
  std::vector<std::uint32_t> out;
  out.reserve(data.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const std::vector<std::uint32_t> row = discretize(data.subspan(r * features, features), d);
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

PackedBitMatrix generate_random(std::size_t count, std::size_t dim, std::uint64_t seed) {
  PackedBitMatrix m(count, dim);
  Rng rng(seed);
  fill_random(m, rng);
  return m;
}

PackedBitMatrix generate_scale_random(std::size_t bins, std::size_t dim, std::uint64_t seed) {
  if (bins < 2) {
    throw std::invalid_argument("generate_scale_random: need at least 2 bins");
  }
  const std::size_t quota = dim / (2 * (bins - 1));
  if (quota == 0) {
    throw std::invalid_argument("generate_scale_random: dim " + std::to_string(dim) +
                                " too small for " + std::to_string(bins) +
                                " bins (needs dim >= 2*(bins-1))");
  }
  PackedBitMatrix m(bins, dim);
  Rng rng(seed);
  {
    PackedBitMatrix first(1, dim);
    fill_random(first, rng);
    std::copy(first.row(0).begin(), first.row(0).end(), m.row(0).begin());
  }
  // Partial Fisher-Yates over positions never flipped before: each level
  // flips `quota` fresh positions of its predecessor, so the distance from
  // V_0 grows by exactly `quota` per level.
  std::vector<std::size_t> pool(dim);
  std::iota(pool.begin(), pool.end(), 0);
  std::size_t remaining = dim;
  for (std::size_t k = 1; k < bins; ++k) {
    std::copy(m.row(k - 1).begin(), m.row(k - 1).end(), m.row(k).begin());
    for (std::size_t i = 0; i < quota; ++i) {
      const std::size_t idx = static_cast<std::size_t>(rng.uniform_below(remaining));
      const std::size_t pos = pool[idx];
      pool[idx] = pool[remaining - 1];
      --remaining;
      m.set_bit(k, pos, !m.bit(k, pos));
    }
  }
  return m;
}

PackedBitMatrix generate_sandwich(std::size_t bins, std::size_t dim, std::uint64_t seed) {
  if (bins < 2) {
    throw std::invalid_argument("generate_sandwich: need at least 2 bins");
  }
  if (dim % 2 != 0) {
    throw std::invalid_argument("generate_sandwich: dim must be even, got " +
                                std::to_string(dim));
  }
  PackedBitMatrix m(bins, dim);
  Rng rng(seed);
  PackedBitMatrix row(1, dim);
  for (std::size_t k = 0; k < bins; k += 2) {
    fill_random(row, rng);
    std::copy(row.row(0).begin(), row.row(0).end(), m.row(k).begin());
  }
  const std::size_t half = dim / 2;
  for (std::size_t k = 1; k < bins; k += 2) {
    copy_bit_range(m.row(k - 1), 0, m.row(k), 0, half);
    if (k + 1 < bins) {
      copy_bit_range(m.row(k + 1), half, m.row(k), half, half);
    } else {
      PackedBitMatrix tail(1, half);
      fill_random(tail, rng);
      copy_bit_range(tail.row(0), 0, m.row(k), half, half);
    }
  }
  return m;
}

Codebook make_codebook(GenerationStrategy generation, BindingStrategy binding,
                       std::size_t features, std::size_t bins, std::size_t dim,
                       std::uint64_t seed) {
  if (features == 0 || dim == 0) {
    throw std::invalid_argument("make_codebook: features and dim must be >= 1");
  }
  if (bins < 2) {
    throw std::invalid_argument("make_codebook: need at least 2 bins");
  }
  Codebook c;
  c.generation = generation;
  c.binding = binding;
  c.seed = seed;
  c.id_vectors = generate_random(features, dim, derive_seed(seed, 1));
  const std::uint64_t value_seed = derive_seed(seed, 2);
  switch (generation) {
    case GenerationStrategy::kRandom:
      c.value_vectors = generate_random(bins, dim, value_seed);
      break;
    case GenerationStrategy::kScaleRandom:
      c.value_vectors = generate_scale_random(bins, dim, value_seed);
      break;
    case GenerationStrategy::kSandwich:
      c.value_vectors = generate_sandwich(bins, dim, value_seed);
      break;
  }
  return c;
}

PackedBitMatrix encode(std::span<const std::uint32_t> bins, const Codebook& codebook,
                       const PackedBitMatrix& tiebreak) {
  check_bins(bins, codebook);
  const std::size_t features = codebook.feature_count();
  const std::size_t d = codebook.dim();
  if (tiebreak.rows() != 1 || tiebreak.dim() != d) {
    throw std::invalid_argument("encode: tiebreak must be 1 x dim");
  }
  switch (codebook.binding) {
    case BindingStrategy::kIdLevel: {
      PackedBitMatrix bound(features, d);
      for (std::size_t f = 0; f < features; ++f) {
        xor_words(codebook.id_vectors.row(f), codebook.value_vectors.row(bins[f]), bound.row(f));
      }
      return majority_binarize(vertical_sum(bound), features, tiebreak);
    }
    case BindingStrategy::kPermutation: {
      PackedBitMatrix bound(features, d);
      for (std::size_t f = 0; f < features; ++f) {
        rotate_row_into(codebook.value_vectors.row(bins[f]), d, f, bound.row(f));
      }
      return majority_binarize(vertical_sum(bound), features, tiebreak);
    }
    case BindingStrategy::kAppending: {
      const std::size_t segment = d / features;
      if (segment == 0) {
        throw std::invalid_argument("encode: appending needs dim >= feature count");
      }
      PackedBitMatrix out(1, d);
      for (std::size_t f = 0; f < features; ++f) {
        copy_bit_range(codebook.value_vectors.row(bins[f]), 0, out.row(0), f * segment, segment);
      }
      return out;
    }
  }
  throw std::logic_error("bad BindingStrategy");
}

PackedBitMatrix encode_batch(std::span<const std::uint32_t> bin_rows, std::size_t rows,
                             const Codebook& codebook, const PackedBitMatrix& tiebreak,
                             std::size_t threads) {
  const std::size_t features = codebook.feature_count();
  if (bin_rows.size() != rows * features) {
    throw std::invalid_argument("encode_batch: bin matrix length does not match rows x features");
  }
  PackedBitMatrix out(rows, codebook.dim());
  parallel_rows(rows, threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      const PackedBitMatrix one = encode(bin_rows.subspan(r * features, features),
                                         codebook, tiebreak);
      std::copy(one.row(0).begin(), one.row(0).end(), out.row(r).begin());
    }
  });
  return out;
}

void save_codebook(const Codebook& c, std::ostream& out) {
  const json header = {
      {"generation", to_name(c.generation)}, {"binding", to_name(c.binding)},
      {"seed", c.seed},                      {"features", c.feature_count()},
      {"bins", c.bin_count()},               {"dim", c.dim()},
  };
  const std::string text = header.dump();
  io::write_magic(out, "HVCB");
  io::write_u16(out, io::kContainerVersion);
  io::write_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  io::write_packed(out, c.id_vectors);
  io::write_packed(out, c.value_vectors);
}

Codebook load_codebook(std::istream& in) {
  io::expect_magic(in, "HVCB");
  const std::uint16_t version = io::read_u16(in);
  if (version != io::kContainerVersion) {
    throw std::runtime_error("unsupported codebook version " + std::to_string(version));
  }
  const std::uint64_t json_len = io::read_u64(in);
  std::string text(json_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(json_len));
  if (in.gcount() != static_cast<std::streamsize>(json_len)) {
    throw std::runtime_error("truncated codebook header");
  }
  json header;
  try {
    header = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("codebook header is not valid JSON: ") + e.what());
  }
  Codebook c;
  try {
    c.generation = generation_from_name(header.at("generation").get<std::string>());
    c.binding = binding_from_name(header.at("binding").get<std::string>());
    c.seed = header.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("codebook header missing field: ") + e.what());
  }
  c.id_vectors = io::read_packed(in);
  c.value_vectors = io::read_packed(in);
  if (c.id_vectors.rows() != header.at("features").get<std::uint64_t>() ||
      c.value_vectors.rows() != header.at("bins").get<std::uint64_t>() ||
      c.id_vectors.dim() != header.at("dim").get<std::uint64_t>() ||
      c.id_vectors.dim() != c.value_vectors.dim()) {
    throw std::runtime_error("codebook header disagrees with stored matrices");
  }
  return c;
}

void save_codebook(const Codebook& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  save_codebook(c, out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

Codebook load_codebook(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_codebook(in);
}

std::string discretizer_to_json(const Discretizer& d) {
  const json j = {{"min", d.min}, {"max", d.max}, {"bins", d.bins}};
  return j.dump();
}

Discretizer discretizer_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("discretizer is not valid JSON: ") + e.what());
  }
  Discretizer d;
  try {
    d.min = j.at("min").get<std::vector<double>>();
    d.max = j.at("max").get<std::vector<double>>();
    d.bins = j.at("bins").get<std::size_t>();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("discretizer JSON missing field: ") + e.what());
  }
  if (d.min.size() != d.max.size()) {
    throw std::runtime_error("discretizer JSON: min/max length mismatch");
  }
  if (d.bins < 2) {
    throw std::runtime_error("discretizer JSON: bins must be >= 2");
  }
  for (std::size_t f = 0; f < d.min.size(); ++f) {
    if (d.min[f] > d.max[f]) {
      throw std::runtime_error("discretizer JSON: min > max at feature " + std::to_string(f));
    }
  }
  return d;
}

}  // namespace hypervec
