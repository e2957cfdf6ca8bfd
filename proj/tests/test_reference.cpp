#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "hypervec/reference.hpp"
#include "hypervec/rng.hpp"
#include "support/testutil.hpp"

// The scalar oracle is the ground truth for differential tests, so it gets
// its own hand-computed checks; nothing here may consult the packed path.

using namespace hypervec;
using testutil::random_dense;

namespace {

DenseBitMatrix dense_from(const std::vector<std::vector<std::uint8_t>>& rows) {
  DenseBitMatrix d(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) d.at(i, j) = rows[i][j];
  }
  return d;
}

}  // namespace

TEST_CASE("oracle kernels reproduce hand-worked examples") {
  DenseBitMatrix a = dense_from({{1, 0, 1, 1, 0}});
  DenseBitMatrix b = dense_from({{1, 1, 0, 1, 0}});
  CHECK(ref::xor_bind(a, b) == dense_from({{0, 1, 1, 0, 0}}));
  // Rotation moves bit j to (j + shift) mod D.
  CHECK(ref::rotate(a, 2) == dense_from({{1, 0, 1, 0, 1}}));
  CHECK(ref::horizontal_sum(a) == CountVector{3});

  DenseBitMatrix m = dense_from({{1, 0}, {1, 1}, {0, 1}});
  CHECK(ref::vertical_sum(m) == CountVector{2, 2});
  DenseBitMatrix t = ref::transpose(m);
  CHECK(t.rows() == 2);
  CHECK(t.dim() == 3);
  CHECK(t == dense_from({{1, 1, 0}, {0, 1, 1}}));

  DenseBitMatrix tiebreak = dense_from({{1, 0, 1}});
  CHECK(ref::majority_binarize(CountVector{3, 0, 2}, 4, tiebreak) == dense_from({{1, 0, 1}}));
  CHECK(ref::hamming_distance(a, 0, b, 0) == doctest::Approx(2.0 / 5.0));
}

TEST_CASE("oracle cosine handles zero vectors explicitly") {
  const std::vector<double> acc = {3.0, 0.0, 4.0};
  const std::vector<std::uint8_t> row = {1, 0, 1};
  // dot = 7, |acc| = 5, |row| = sqrt(2).
  CHECK(ref::cosine_similarity(acc, row) == doctest::Approx(7.0 / (5.0 * std::sqrt(2.0))));
  CHECK_THROWS_AS(ref::cosine_similarity(acc, std::vector<std::uint8_t>{0, 0, 0}),
                  std::domain_error);
}

TEST_CASE("oracle classical training and prediction work a tiny example end to end") {
  DenseBitMatrix x = dense_from({{1, 1, 0, 0}, {1, 1, 1, 0}, {0, 0, 1, 1}});
  const std::vector<int> y = {0, 0, 1};
  ModelConfig cfg;
  cfg.class_count = 2;
  cfg.seed = 21;
  DenseBitMatrix tiebreak = dense_from({{0, 1, 0, 1}});
  ref::NaiveModel m = ref::train_classical(x, y, cfg, tiebreak);
  // Class 0: counts {2,2,1,0} of 2 samples -> bits {1,1,tb,0} = {1,1,0,0}.
  CHECK(m.class_vectors == dense_from({{1, 1, 0, 0}, {0, 0, 1, 1}}));
  CHECK(m.class_weight == std::vector<double>{2.0, 1.0});

  std::vector<Prediction> p = ref::predict(m, dense_from({{1, 1, 0, 0}, {0, 1, 1, 1}}));
  CHECK(p[0].label == 0);
  CHECK(p[0].distances[0] == 0.0);
  CHECK(p[1].label == 1);
}

TEST_CASE("oracle online update applies the two-sided rule literally") {
  // One class vector at distance 0.5, the other at 1.0; gamma = 2 makes the
  // wrong-class penalty visible.
  DenseBitMatrix x = dense_from({{1, 1, 0, 0}, {0, 0, 1, 1}});
  const std::vector<int> y = {0, 1};
  ModelConfig cfg;
  cfg.class_count = 2;
  cfg.gamma = 2.0;
  cfg.seed = 22;
  DenseBitMatrix tiebreak = dense_from({{0, 0, 0, 0}});
  ref::NaiveModel m = ref::train_classical(x, y, cfg, tiebreak);

  // Query {1,1,1,1} labeled 1: distances are 0.5 to both classes, so the
  // predicted label is 0 (lowest index) and the sample is misclassified.
  DenseBitMatrix q = dense_from({{1, 1, 1, 1}});
  ref::online_update(m, q, std::vector<int>{1}, ref::freeze(m));
  // True class 1 gains delta = 0.5 on every set bit.
  CHECK(m.accumulators[4] == doctest::Approx(0.5));
  CHECK(m.accumulators[5] == doctest::Approx(0.5));
  CHECK(m.accumulators[6] == doctest::Approx(1.5));
  CHECK(m.accumulators[7] == doctest::Approx(1.5));
  // Wrong class 0 loses gamma * (1 - delta) = 2 * 0.5 = 1 on every set bit.
  CHECK(m.accumulators[0] == doctest::Approx(0.0));
  CHECK(m.accumulators[1] == doctest::Approx(0.0));
  CHECK(m.accumulators[2] == doctest::Approx(-1.0));
  CHECK(m.accumulators[3] == doctest::Approx(-1.0));
  // Class weights: only the true class accrues its positive delta.
  CHECK(m.class_weight[0] == 1.0);
  CHECK(m.class_weight[1] == doctest::Approx(1.5));
}

TEST_CASE("oracle encoding matches a from-scratch majority for id_level") {
  Rng rng(61);
  const std::size_t features = 5;
  const std::size_t dim = 48;
  ref::DenseCodebook c;
  c.id_vectors = random_dense(features, dim, rng);
  c.value_vectors = random_dense(3, dim, rng);
  c.binding = BindingStrategy::kIdLevel;
  DenseBitMatrix tiebreak = random_dense(1, dim, rng);

  const std::vector<std::uint32_t> bins = {0, 2, 1, 2, 0};
  DenseBitMatrix got = ref::encode(bins, c, tiebreak);
  for (std::size_t j = 0; j < dim; ++j) {
    std::size_t ones = 0;
    for (std::size_t f = 0; f < features; ++f) {
      ones += c.id_vectors.at(f, j) ^ c.value_vectors.at(bins[f], j);
    }
    const std::uint8_t expected =
        2 * ones > features ? 1 : (2 * ones < features ? 0 : tiebreak.at(0, j));
    CHECK(got.at(0, j) == expected);
  }
}
