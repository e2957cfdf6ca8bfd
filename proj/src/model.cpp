#include "hypervec/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

#include "hypervec/encoding.hpp"
#include "hypervec/io.hpp"
#include "hypervec/kernels.hpp"
#include "hypervec/parallel.hpp"
#include "hypervec/rng.hpp"

namespace hypervec {

namespace {

using nlohmann::json;

void check_labels(std::span<const int> labels, std::size_t rows, std::size_t class_count,
                  const char* who) {
  if (labels.size() != rows) {
    throw std::invalid_argument(std::string(who) + ": " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(rows) + " rows");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= class_count) {
      throw std::invalid_argument(std::string(who) + ": label " + std::to_string(labels[i]) +
                                  " at row " + std::to_string(i) + " out of range (classes = " +
                                  std::to_string(class_count) + ")");
    }
  }
}

// Sum of acc[j] over the set bits of a packed row, in increasing j order.
double dot_with_row(std::span<const double> acc, std::span<const std::uint32_t> row) {
  double dot = 0.0;
  for (std::size_t w = 0; w < row.size(); ++w) {
    std::uint32_t bits = row[w];
    while (bits != 0) {
      const unsigned j = static_cast<unsigned>(std::countr_zero(bits));
      dot += acc[w * PackedBitMatrix::kWordBits + j];
      bits &= bits - 1;
    }
  }
  return dot;
}

// acc[j] += delta over the set bits of a packed row.
void add_to_row(std::span<double> acc, std::span<const std::uint32_t> row, double delta) {
  for (std::size_t w = 0; w < row.size(); ++w) {
    std::uint32_t bits = row[w];
    while (bits != 0) {
      const unsigned j = static_cast<unsigned>(std::countr_zero(bits));
      acc[w * PackedBitMatrix::kWordBits + j] += delta;
      bits &= bits - 1;
    }
  }
}

// Per-class score of one packed query row: normalized Hamming distances
// (argmin) against binarized class vectors, or cosine similarities (argmax)
// against the raw accumulators. An all-zero accumulator scores -inf so empty
// classes never win; an all-zero cosine query is a domain error.
std::vector<double> class_scores(Metric metric, std::size_t class_count, std::size_t dim,
                                 const PackedBitMatrix& class_vectors,
                                 const std::vector<double>& accumulators,
                                 std::span<const std::uint32_t> row) {
  std::vector<double> scores(class_count, 0.0);
  if (metric == Metric::kHamming) {
    for (std::size_t c = 0; c < class_count; ++c) {
      scores[c] = hamming_distance_words(class_vectors.row(c), row, dim);
    }
    return scores;
  }
  const std::uint64_t row_ones = popcount_words(row);
  if (row_ones == 0) {
    throw std::domain_error("cosine_similarity: zero query vector");
  }
  const double row_norm = std::sqrt(static_cast<double>(row_ones));
  for (std::size_t c = 0; c < class_count; ++c) {
    const std::span<const double> acc{accumulators.data() + c * dim, dim};
    double norm_sq = 0.0;
    for (double a : acc) norm_sq += a * a;
    scores[c] = norm_sq == 0.0
                    ? -std::numeric_limits<double>::infinity()
                    : dot_with_row(acc, row) / (std::sqrt(norm_sq) * row_norm);
  }
  return scores;
}

int pick_label(Metric metric, const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    const bool better =
        metric == Metric::kHamming ? scores[c] < scores[best] : scores[c] > scores[best];
    if (better) best = c;
  }
  return static_cast<int>(best);
}

// Update weight from a score: a normalized distance in [0, 1]. Hamming
// distances already are; cosine similarities map through (1 - s) / 2 (an
// empty class at -inf maps to the maximal weight 1).
double score_to_delta(Metric metric, double score) {
  if (metric == Metric::kHamming) return score;
  if (std::isinf(score)) return 1.0;
  return (1.0 - score) / 2.0;
}

PackedBitMatrix copy_rows(const PackedBitMatrix& m, std::size_t lo, std::size_t hi) {
  PackedBitMatrix out(hi - lo, m.dim());
  for (std::size_t r = lo; r < hi; ++r) {
    std::copy(m.row(r).begin(), m.row(r).end(), out.row(r - lo).begin());
  }
  return out;
}

}  // namespace

Metric metric_from_name(const std::string& name) {
  if (name == "hamming") return Metric::kHamming;
  if (name == "cosine") return Metric::kCosine;
  throw std::invalid_argument("unknown metric '" + name + "' (expected hamming or cosine)");
}

std::string to_name(Metric m) {
  switch (m) {
    case Metric::kHamming: return "hamming";
    case Metric::kCosine: return "cosine";
  }
  throw std::logic_error("bad Metric");
}

void HDModel::refresh_binarization(std::size_t c) {
  const std::size_t d = config.dim;
  const double total = class_weight[c];
  const std::span<const double> acc = accumulator_row(c);
  const std::span<const std::uint32_t> tie = tiebreak.row(0);
  const std::span<std::uint32_t> out = class_vectors.row(c);
  constexpr std::size_t kW = PackedBitMatrix::kWordBits;
  for (std::size_t w = 0; w < out.size(); ++w) {
    std::uint32_t word = 0;
    const std::size_t j_end = std::min(d, (w + 1) * kW);
    for (std::size_t j = w * kW; j < j_end; ++j) {
      const double twice = 2.0 * acc[j];
      bool bit;
      if (twice > total) {
        bit = true;
      } else if (twice < total) {
        bit = false;
      } else {
        bit = (tie[w] >> (j - w * kW)) & 1u;
      }
      if (bit) word |= 1u << (j - w * kW);
    }
    out[w] = word;
  }
}

void HDModel::refresh_binarization() {
  for (std::size_t c = 0; c < config.class_count; ++c) refresh_binarization(c);
}

double hamming_distance(const PackedBitMatrix& a, std::size_t row_a,
                        const PackedBitMatrix& b, std::size_t row_b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("hamming_distance: dimensions " + std::to_string(a.dim()) +
                                " vs " + std::to_string(b.dim()));
  }
  return hamming_distance_words(a.row(row_a), b.row(row_b), a.dim());
}

double hamming_distance_words(std::span<const std::uint32_t> a,
                              std::span<const std::uint32_t> b, std::size_t dim) {
  return static_cast<double>(hamming_words(a, b)) / static_cast<double>(dim);
}

double cosine_similarity(std::span<const double> acc,
                         std::span<const std::uint32_t> packed_row, std::size_t dim) {
  if (acc.size() != dim) {
    throw std::invalid_argument("cosine_similarity: accumulator length != dim");
  }
  double norm_sq = 0.0;
  for (double a : acc) norm_sq += a * a;
  const std::uint64_t ones = popcount_words(packed_row);
  if (norm_sq == 0.0 || ones == 0) {
    throw std::domain_error("cosine_similarity: zero vector");
  }
  return dot_with_row(acc, packed_row) /
         (std::sqrt(norm_sq) * std::sqrt(static_cast<double>(ones)));
}

HDModel make_empty_model(const ModelConfig& config) {
  if (config.class_count == 0) {
    throw std::invalid_argument("make_empty_model: need at least one class");
  }
  if (config.dim == 0) {
    throw std::invalid_argument("make_empty_model: dim must be >= 1");
  }
  if (config.gamma < 0.0) {
    throw std::invalid_argument("make_empty_model: gamma must be >= 0");
  }
  HDModel model;
  model.config = config;
  model.accumulators.assign(config.class_count * config.dim, 0.0);
  model.class_weight.assign(config.class_count, 0.0);
  model.sample_counts.assign(config.class_count, 0);
  model.class_vectors = PackedBitMatrix(config.class_count, config.dim);
  model.tiebreak = generate_random(1, config.dim, derive_seed(config.seed, 3));
  model.refresh_binarization();  // empty classes binarize to the tiebreak
  return model;
}

HDModel train_classical(const PackedBitMatrix& encoded, std::span<const int> labels,
                        const ModelConfig& config) {
  check_labels(labels, encoded.rows(), config.class_count, "train_classical");
  ModelConfig cfg = config;
  cfg.dim = encoded.dim();
  HDModel model = make_empty_model(cfg);
  std::vector<std::vector<std::size_t>> rows_of(cfg.class_count);
  for (std::size_t i = 0; i < encoded.rows(); ++i) {
    rows_of[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  for (std::size_t c = 0; c < cfg.class_count; ++c) {
    const std::vector<std::size_t>& rows = rows_of[c];
    model.class_weight[c] = static_cast<double>(rows.size());
    model.sample_counts[c] = rows.size();
    if (rows.empty()) continue;  // stays flagged empty; binarizes to tiebreak
    PackedBitMatrix sub(rows.size(), cfg.dim);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      std::copy(encoded.row(rows[k]).begin(), encoded.row(rows[k]).end(), sub.row(k).begin());
    }
    const CountVector sums = vertical_sum(sub);
    const std::span<double> acc = model.accumulator_row(c);
    for (std::size_t j = 0; j < cfg.dim; ++j) acc[j] = static_cast<double>(sums[j]);
  }
  model.refresh_binarization();
  return model;
}

ModelSnapshot freeze(const HDModel& model) {
  return ModelSnapshot{model.class_vectors, model.accumulators};
}

void online_update(HDModel& model, const PackedBitMatrix& batch, std::span<const int> labels,
                   const ModelSnapshot& frozen) {
  const std::size_t d = model.config.dim;
  if (batch.dim() != d) {
    throw std::invalid_argument("online_update: batch dim != model dim");
  }
  check_labels(labels, batch.rows(), model.config.class_count, "online_update");
  const Metric metric = model.config.metric;
  std::vector<bool> touched(model.config.class_count, false);
  for (std::size_t i = 0; i < batch.rows(); ++i) {
    const auto truth = static_cast<std::size_t>(labels[i]);
    const std::vector<double> scores =
        class_scores(metric, model.config.class_count, d, frozen.class_vectors,
                     frozen.accumulators, batch.row(i));
    const auto predicted = static_cast<std::size_t>(pick_label(metric, scores));
    const double delta_true = score_to_delta(metric, scores[truth]);
    add_to_row(model.accumulator_row(truth), batch.row(i), delta_true);
    model.class_weight[truth] += delta_true;
    model.sample_counts[truth] += 1;
    touched[truth] = true;
    if (predicted != truth) {
      const double delta_wrong = score_to_delta(metric, scores[predicted]);
      add_to_row(model.accumulator_row(predicted), batch.row(i),
                 -model.config.gamma * (1.0 - delta_wrong));
      touched[predicted] = true;
    }
  }
  for (std::size_t c = 0; c < model.config.class_count; ++c) {
    if (touched[c]) model.refresh_binarization(c);
  }
}

HDModel train_online(const PackedBitMatrix& encoded, std::span<const int> labels,
                     std::size_t batch_size, const ModelConfig& config) {
  if (batch_size == 0) {
    throw std::invalid_argument("train_online: batch_size must be >= 1");
  }
  const std::size_t n = encoded.rows();
  // Bootstrap: the first batch is accumulated classically (delta against an
  // empty model is undefined), then every batch, including the first, gets
  // an online pass against a snapshot frozen at its start.
  const std::size_t first = std::min(batch_size, n);
  HDModel model = train_classical(copy_rows(encoded, 0, first),
                                  labels.subspan(0, first), config);
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(start + batch_size, n);
    const PackedBitMatrix batch = copy_rows(encoded, start, end);
    const ModelSnapshot snapshot = freeze(model);
    online_update(model, batch, labels.subspan(start, end - start), snapshot);
  }
  return model;
}

std::vector<Prediction> predict(const HDModel& model, const PackedBitMatrix& encoded,
                                std::size_t threads) {
  if (encoded.dim() != model.config.dim) {
    throw std::invalid_argument("predict: query dim != model dim");
  }
  std::vector<Prediction> out(encoded.rows());
  parallel_rows(encoded.rows(), threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      Prediction p;
      p.distances = class_scores(model.config.metric, model.config.class_count,
                                 model.config.dim, model.class_vectors, model.accumulators,
                                 encoded.row(i));
      p.label = pick_label(model.config.metric, p.distances);
      out[i] = std::move(p);
    }
  });
  return out;
}

void save_model(const HDModel& model, std::ostream& out) {
  const json header = {
      {"class_count", model.config.class_count}, {"dim", model.config.dim},
      {"gamma", model.config.gamma},             {"metric", to_name(model.config.metric)},
      {"seed", model.config.seed},
  };
  const std::string text = header.dump();
  io::write_magic(out, "HVMD");
  io::write_u16(out, io::kContainerVersion);
  io::write_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  io::write_packed(out, model.class_vectors);
  for (double a : model.accumulators) io::write_f64(out, a);
  for (double w : model.class_weight) io::write_f64(out, w);
  for (std::uint64_t n : model.sample_counts) io::write_u64(out, n);
}

HDModel load_model(std::istream& in) {
  io::expect_magic(in, "HVMD");
  const std::uint16_t version = io::read_u16(in);
  if (version != io::kContainerVersion) {
    throw std::runtime_error("unsupported model version " + std::to_string(version));
  }
  const std::uint64_t json_len = io::read_u64(in);
  std::string text(json_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(json_len));
  if (in.gcount() != static_cast<std::streamsize>(json_len)) {
    throw std::runtime_error("truncated model header");
  }
  ModelConfig config;
  try {
    const json header = json::parse(text);
    config.class_count = header.at("class_count").get<std::size_t>();
    config.dim = header.at("dim").get<std::size_t>();
    config.gamma = header.at("gamma").get<double>();
    config.metric = metric_from_name(header.at("metric").get<std::string>());
    config.seed = header.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("bad model header: ") + e.what());
  }
  HDModel model = make_empty_model(config);
  model.class_vectors = io::read_packed(in);
  if (model.class_vectors.rows() != config.class_count ||
      model.class_vectors.dim() != config.dim) {
    throw std::runtime_error("model header disagrees with stored class vectors");
  }
  for (double& a : model.accumulators) a = io::read_f64(in);
  for (double& w : model.class_weight) w = io::read_f64(in);
  for (std::uint64_t& n : model.sample_counts) n = io::read_u64(in);
  return model;
}

void save_model(const HDModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  save_model(model, out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

HDModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_model(in);
}

}  // namespace hypervec
