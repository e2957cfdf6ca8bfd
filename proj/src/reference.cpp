#include "hypervec/reference.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hypervec::ref {

namespace {

void check_binary(const DenseBitMatrix& m, const char* who) {
  if (!m.is_binary()) {
    throw std::invalid_argument(std::string(who) + ": non-binary entry");
  }
}

// Distance/similarity of one dense row against every class of the snapshot
// state, scalar loops only. For Hamming the entries are normalized
// distances (argmin wins); for cosine they are similarities (argmax wins).
std::vector<double> class_scores(const ModelConfig& config, const DenseBitMatrix& class_vectors,
                                 const std::vector<double>& accumulators,
                                 std::span<const std::uint8_t> row) {
  const std::size_t c_count = config.class_count;
  const std::size_t d = config.dim;
  std::vector<double> scores(c_count, 0.0);
  if (config.metric == Metric::kHamming) {
    for (std::size_t c = 0; c < c_count; ++c) {
      std::uint64_t diff = 0;
      for (std::size_t j = 0; j < d; ++j) {
        if (class_vectors.at(c, j) != row[j]) ++diff;
      }
      scores[c] = static_cast<double>(diff) / static_cast<double>(d);
    }
  } else {
    for (std::size_t c = 0; c < c_count; ++c) {
      double dot = 0.0;
      double acc_norm = 0.0;
      double row_norm = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double a = accumulators[c * d + j];
        const double b = static_cast<double>(row[j]);
        dot += a * b;
        acc_norm += a * a;
        row_norm += b * b;
      }
      if (row_norm == 0.0) {
        throw std::domain_error("cosine_similarity: zero query vector");
      }
      scores[c] = acc_norm == 0.0 ? -std::numeric_limits<double>::infinity()
                                  : dot / (std::sqrt(acc_norm) * std::sqrt(row_norm));
    }
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

// Update weight: a normalized distance in [0, 1]. Hamming scores already
// are; cosine similarities map through (1 - s) / 2.
double score_to_delta(Metric metric, double score) {
  if (metric == Metric::kHamming) return score;
  if (std::isinf(score)) return 1.0;
  return (1.0 - score) / 2.0;
}

}  // namespace

DenseBitMatrix xor_bind(const DenseBitMatrix& a, const DenseBitMatrix& b) {
  if (a.dim() != b.dim() || (b.rows() != a.rows() && b.rows() != 1)) {
    throw std::invalid_argument("xor_bind: shape mismatch");
  }
  check_binary(a, "xor_bind");
  check_binary(b, "xor_bind");
  DenseBitMatrix out(a.rows(), a.dim());
  const bool broadcast = b.rows() == 1;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t j = 0; j < a.dim(); ++j) {
      out.at(r, j) = a.at(r, j) ^ b.at(broadcast ? 0 : r, j);
    }
  }
  return out;
}

DenseBitMatrix rotate(const DenseBitMatrix& m, std::size_t shift) {
  const std::size_t d = m.dim();
  if (d == 0) return m;
  const std::size_t s = shift % d;
  DenseBitMatrix out(m.rows(), d);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t j = 0; j < d; ++j) {
      out.at(r, (j + s) % d) = m.at(r, j);
    }
  }
  return out;
}

CountVector horizontal_sum(const DenseBitMatrix& m) {
  CountVector sums(m.rows(), 0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t j = 0; j < m.dim(); ++j) {
      sums[r] += m.at(r, j);
    }
  }
  return sums;
}

DenseBitMatrix transpose(const DenseBitMatrix& m) {
  DenseBitMatrix out(m.dim(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t j = 0; j < m.dim(); ++j) {
      out.at(j, r) = m.at(r, j);
    }
  }
  return out;
}

CountVector vertical_sum(const DenseBitMatrix& m) {
  CountVector sums(m.dim(), 0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t j = 0; j < m.dim(); ++j) {
      sums[j] += m.at(r, j);
    }
  }
  return sums;
}

DenseBitMatrix majority_binarize(const CountVector& counts, std::uint64_t n,
                                 const DenseBitMatrix& tiebreak) {
  if (tiebreak.rows() != 1 || tiebreak.dim() != counts.size()) {
    throw std::invalid_argument("majority_binarize: tiebreak shape mismatch");
  }
  DenseBitMatrix out(1, counts.size());
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] > n) {
      throw std::invalid_argument("majority_binarize: count exceeds total");
    }
    if (2 * counts[j] > n) {
      out.at(0, j) = 1;
    } else if (2 * counts[j] < n) {
      out.at(0, j) = 0;
    } else {
      out.at(0, j) = tiebreak.at(0, j);
    }
  }
  return out;
}

double hamming_distance(const DenseBitMatrix& a, std::size_t row_a, const DenseBitMatrix& b,
                        std::size_t row_b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("hamming_distance: dimension mismatch");
  }
  std::uint64_t diff = 0;
  for (std::size_t j = 0; j < a.dim(); ++j) {
    if (a.at(row_a, j) != b.at(row_b, j)) ++diff;
  }
  return static_cast<double>(diff) / static_cast<double>(a.dim());
}

double cosine_similarity(std::span<const double> acc, std::span<const std::uint8_t> row) {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t j = 0; j < acc.size(); ++j) {
    dot += acc[j] * static_cast<double>(row[j]);
    na += acc[j] * acc[j];
    nb += static_cast<double>(row[j]) * static_cast<double>(row[j]);
  }
  if (na == 0.0 || nb == 0.0) {
    throw std::domain_error("cosine_similarity: zero vector");
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

DenseCodebook to_dense(const Codebook& c) {
  DenseCodebook out;
  out.binding = c.binding;
  out.id_vectors = DenseBitMatrix(c.id_vectors.rows(), c.id_vectors.dim());
  for (std::size_t r = 0; r < c.id_vectors.rows(); ++r) {
    for (std::size_t j = 0; j < c.id_vectors.dim(); ++j) {
      out.id_vectors.at(r, j) = c.id_vectors.bit(r, j) ? 1 : 0;
    }
  }
  out.value_vectors = DenseBitMatrix(c.value_vectors.rows(), c.value_vectors.dim());
  for (std::size_t r = 0; r < c.value_vectors.rows(); ++r) {
    for (std::size_t j = 0; j < c.value_vectors.dim(); ++j) {
      out.value_vectors.at(r, j) = c.value_vectors.bit(r, j) ? 1 : 0;
    }
  }
  return out;
}

DenseBitMatrix encode(std::span<const std::uint32_t> bins, const DenseCodebook& codebook,
                      const DenseBitMatrix& tiebreak) {
  const std::size_t features = codebook.id_vectors.rows();
  const std::size_t bin_count = codebook.value_vectors.rows();
  const std::size_t d = codebook.value_vectors.dim();
  if (bins.size() != features) {
    throw std::invalid_argument("encode: expected " + std::to_string(features) + " bin indices");
  }
  for (std::uint32_t b : bins) {
    if (b >= bin_count) {
      throw std::invalid_argument("encode: bin index " + std::to_string(b) + " out of range");
    }
  }
  DenseBitMatrix out(1, d);
  switch (codebook.binding) {
    case BindingStrategy::kIdLevel: {
      CountVector counts(d, 0);
      for (std::size_t f = 0; f < features; ++f) {
        for (std::size_t j = 0; j < d; ++j) {
          counts[j] += codebook.id_vectors.at(f, j) ^ codebook.value_vectors.at(bins[f], j);
        }
      }
      out = majority_binarize(counts, features, tiebreak);
      break;
    }
    case BindingStrategy::kPermutation: {
      CountVector counts(d, 0);
      for (std::size_t f = 0; f < features; ++f) {
        for (std::size_t j = 0; j < d; ++j) {
          // bit j of rotate(V, f) is bit (j - f) mod d of V
          counts[j] += codebook.value_vectors.at(bins[f], (j + d - (f % d)) % d);
        }
      }
      out = majority_binarize(counts, features, tiebreak);
      break;
    }
    case BindingStrategy::kAppending: {
      const std::size_t segment = d / features;
      if (segment == 0) {
        throw std::invalid_argument("encode: appending needs dim >= feature count");
      }
      for (std::size_t f = 0; f < features; ++f) {
        for (std::size_t j = 0; j < segment; ++j) {
          out.at(0, f * segment + j) = codebook.value_vectors.at(bins[f], j);
        }
      }
      break;
    }
  }
  return out;
}

DenseBitMatrix encode_batch(std::span<const std::uint32_t> bin_rows, std::size_t rows,
                            const DenseCodebook& codebook, const DenseBitMatrix& tiebreak) {
  const std::size_t features = codebook.id_vectors.rows();
  const std::size_t d = codebook.value_vectors.dim();
  DenseBitMatrix out(rows, d);
  for (std::size_t r = 0; r < rows; ++r) {
    const DenseBitMatrix one =
        encode(bin_rows.subspan(r * features, features), codebook, tiebreak);
    for (std::size_t j = 0; j < d; ++j) {
      out.at(r, j) = one.at(0, j);
    }
  }
  return out;
}

void NaiveModel::refresh_binarization(std::size_t c) {
  const std::size_t d = config.dim;
  const double total = class_weight[c];
  for (std::size_t j = 0; j < d; ++j) {
    const double twice = 2.0 * accumulators[c * d + j];
    if (twice > total) {
      class_vectors.at(c, j) = 1;
    } else if (twice < total) {
      class_vectors.at(c, j) = 0;
    } else {
      class_vectors.at(c, j) = tiebreak.at(0, j);
    }
  }
}

void NaiveModel::refresh_binarization() {
  for (std::size_t c = 0; c < config.class_count; ++c) refresh_binarization(c);
}

NaiveSnapshot freeze(const NaiveModel& model) {
  return NaiveSnapshot{model.class_vectors, model.accumulators};
}

NaiveModel train_classical(const DenseBitMatrix& encoded, std::span<const int> labels,
                           const ModelConfig& config, const DenseBitMatrix& tiebreak) {
  NaiveModel model;
  model.config = config;
  model.config.dim = encoded.dim();
  const std::size_t d = model.config.dim;
  model.accumulators.assign(config.class_count * d, 0.0);
  model.class_weight.assign(config.class_count, 0.0);
  model.sample_counts.assign(config.class_count, 0);
  model.class_vectors = DenseBitMatrix(config.class_count, d);
  model.tiebreak = tiebreak;
  for (std::size_t i = 0; i < encoded.rows(); ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= config.class_count) {
      throw std::invalid_argument("train_classical: label out of range");
    }
    for (std::size_t j = 0; j < d; ++j) {
      model.accumulators[static_cast<std::size_t>(label) * d + j] +=
          static_cast<double>(encoded.at(i, j));
    }
    model.class_weight[static_cast<std::size_t>(label)] += 1.0;
    model.sample_counts[static_cast<std::size_t>(label)] += 1;
  }
  model.refresh_binarization();
  return model;
}

void online_update(NaiveModel& model, const DenseBitMatrix& batch, std::span<const int> labels,
                   const NaiveSnapshot& frozen) {
  const std::size_t d = model.config.dim;
  const Metric metric = model.config.metric;
  std::vector<bool> touched(model.config.class_count, false);
  for (std::size_t i = 0; i < batch.rows(); ++i) {
    const auto truth = static_cast<std::size_t>(labels[i]);
    if (truth >= model.config.class_count) {
      throw std::invalid_argument("online_update: label out of range");
    }
    const std::vector<double> scores =
        class_scores(model.config, frozen.class_vectors, frozen.accumulators, batch.row(i));
    const auto predicted = static_cast<std::size_t>(pick_label(metric, scores));
    const double delta_true = score_to_delta(metric, scores[truth]);
    for (std::size_t j = 0; j < d; ++j) {
      model.accumulators[truth * d + j] += delta_true * static_cast<double>(batch.at(i, j));
    }
    model.class_weight[truth] += delta_true;
    model.sample_counts[truth] += 1;
    touched[truth] = true;
    if (predicted != truth) {
      const double delta_wrong = score_to_delta(metric, scores[predicted]);
      const double penalty = model.config.gamma * (1.0 - delta_wrong);
      for (std::size_t j = 0; j < d; ++j) {
        model.accumulators[predicted * d + j] -= penalty * static_cast<double>(batch.at(i, j));
      }
      touched[predicted] = true;
    }
  }
  for (std::size_t c = 0; c < model.config.class_count; ++c) {
    if (touched[c]) model.refresh_binarization(c);
  }
}

NaiveModel train_online(const DenseBitMatrix& encoded, std::span<const int> labels,
                        std::size_t batch_size, const ModelConfig& config,
                        const DenseBitMatrix& tiebreak) {
  if (batch_size == 0) {
    throw std::invalid_argument("train_online: batch_size must be >= 1");
  }
  const std::size_t n = encoded.rows();
  const std::size_t first = batch_size < n ? batch_size : n;
  DenseBitMatrix head(first, encoded.dim());
  for (std::size_t r = 0; r < first; ++r) {
    for (std::size_t j = 0; j < encoded.dim(); ++j) head.at(r, j) = encoded.at(r, j);
  }
  NaiveModel model = train_classical(head, labels.subspan(0, first), config, tiebreak);
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = start + batch_size < n ? start + batch_size : n;
    DenseBitMatrix batch(end - start, encoded.dim());
    for (std::size_t r = start; r < end; ++r) {
      for (std::size_t j = 0; j < encoded.dim(); ++j) batch.at(r - start, j) = encoded.at(r, j);
    }
    const NaiveSnapshot snapshot = freeze(model);
    online_update(model, batch, labels.subspan(start, end - start), snapshot);
  }
  return model;
}

std::vector<Prediction> predict(const NaiveModel& model, const DenseBitMatrix& encoded) {
  std::vector<Prediction> out(encoded.rows());
  for (std::size_t i = 0; i < encoded.rows(); ++i) {
    Prediction p;
    p.distances =
        class_scores(model.config, model.class_vectors, model.accumulators, encoded.row(i));
    p.label = pick_label(model.config.metric, p.distances);
    out[i] = std::move(p);
  }
  return out;
}

}  // namespace hypervec::ref
