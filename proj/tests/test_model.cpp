#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "hypervec/encoding.hpp"
#include "hypervec/kernels.hpp"
#include "hypervec/model.hpp"
#include "hypervec/reference.hpp"
#include "hypervec/rng.hpp"
#include "support/testutil.hpp"

using namespace hypervec;
using testutil::random_dense;

namespace {

PackedBitMatrix from_rows(const std::vector<std::vector<std::uint8_t>>& rows) {
  DenseBitMatrix d(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) d.at(i, j) = rows[i][j];
  }
  return pack(d);
}

// Mirrors a packed model into the scalar one so both sides share state.
ref::NaiveModel mirror(const HDModel& m) {
  ref::NaiveModel n;
  n.config = m.config;
  n.accumulators = m.accumulators;
  n.class_weight = m.class_weight;
  n.sample_counts = m.sample_counts;
  n.class_vectors = unpack(m.class_vectors);
  n.tiebreak = unpack(m.tiebreak);
  return n;
}

void check_same(const HDModel& packed, const ref::NaiveModel& naive, double tol) {
  REQUIRE(packed.accumulators.size() == naive.accumulators.size());
  for (std::size_t i = 0; i < packed.accumulators.size(); ++i) {
    CHECK(std::abs(packed.accumulators[i] - naive.accumulators[i]) <= tol);
  }
  for (std::size_t c = 0; c < packed.config.class_count; ++c) {
    CHECK(std::abs(packed.class_weight[c] - naive.class_weight[c]) <= tol);
    CHECK(packed.sample_counts[c] == naive.sample_counts[c]);
  }
  CHECK(unpack(packed.class_vectors) == naive.class_vectors);
}

std::vector<int> random_labels(std::size_t n, std::size_t classes, Rng& rng) {
  std::vector<int> y(n);
  for (int& v : y) v = static_cast<int>(rng.uniform_below(classes));
  return y;
}

}  // namespace

TEST_CASE("metric names roundtrip") {
  CHECK(metric_from_name("hamming") == Metric::kHamming);
  CHECK(metric_from_name("cosine") == Metric::kCosine);
  CHECK(to_name(Metric::kCosine) == "cosine");
  CHECK_THROWS_AS(metric_from_name("euclid"), std::invalid_argument);
}

TEST_CASE("empty model binarizes every class to the seeded tiebreak vector") {
  ModelConfig cfg;
  cfg.class_count = 3;
  cfg.dim = 100;
  cfg.seed = 5;
  HDModel m = make_empty_model(cfg);
  CHECK(m.tiebreak.rows() == 1);
  CHECK(m.tiebreak.dim() == 100);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(m.class_empty(c));
    CHECK(std::equal(m.class_vectors.row(c).begin(), m.class_vectors.row(c).end(),
                     m.tiebreak.row(0).begin()));
  }
  CHECK(make_empty_model(cfg).tiebreak == m.tiebreak);  // seed-deterministic

  ModelConfig bad = cfg;
  bad.class_count = 0;
  CHECK_THROWS_AS(make_empty_model(bad), std::invalid_argument);
  bad = cfg;
  bad.dim = 0;
  CHECK_THROWS_AS(make_empty_model(bad), std::invalid_argument);
  bad = cfg;
  bad.gamma = -0.5;
  CHECK_THROWS_AS(make_empty_model(bad), std::invalid_argument);
}

TEST_CASE("hamming distance is the normalized XOR popcount") {
  PackedBitMatrix m = from_rows({{1, 1, 0, 0, 1}, {1, 0, 0, 1, 1}, {0, 0, 1, 1, 0}});
  CHECK(hamming_distance(m, 0, m, 0) == 0.0);
  CHECK(hamming_distance(m, 0, m, 1) == doctest::Approx(2.0 / 5.0));
  CHECK(hamming_distance(m, 0, m, 2) == 1.0);  // exact complement
  CHECK_THROWS_AS(hamming_distance(m, 0, PackedBitMatrix(1, 6), 0), std::invalid_argument);
}

TEST_CASE("cosine similarity against a packed row matches hand values") {
  PackedBitMatrix q = from_rows({{1, 0, 1, 0}});
  const std::vector<double> acc = {1.0, 1.0, 0.0, 0.0};
  // dot = 1, |acc| = sqrt(2), |q| = sqrt(2).
  CHECK(cosine_similarity(acc, q.row(0), 4) == doctest::Approx(0.5));
  PackedBitMatrix zero(1, 4);
  CHECK_THROWS_AS(cosine_similarity(acc, zero.row(0), 4), std::domain_error);
  CHECK_THROWS_AS(cosine_similarity(std::vector<double>{1.0}, q.row(0), 4),
                  std::invalid_argument);
}

TEST_CASE("classical training accumulates per-class bit counts") {
  PackedBitMatrix x = from_rows({{1, 1, 0}, {1, 0, 0}, {0, 1, 1}});
  const std::vector<int> y = {0, 0, 1};
  ModelConfig cfg;
  cfg.class_count = 2;
  cfg.seed = 6;
  HDModel m = train_classical(x, y, cfg);
  CHECK(m.config.dim == 3);
  CHECK(m.accumulator_row(0)[0] == 2.0);
  CHECK(m.accumulator_row(0)[1] == 1.0);
  CHECK(m.accumulator_row(0)[2] == 0.0);
  CHECK(m.class_weight[0] == 2.0);
  CHECK(m.sample_counts[0] == 2);
  CHECK(m.sample_counts[1] == 1);
  // Binarization: 2*2 > 2 -> 1; 2*1 == 2 -> tiebreak; 2*0 < 2 -> 0.
  CHECK(m.class_vectors.bit(0, 0));
  CHECK(m.class_vectors.bit(0, 1) == m.tiebreak.bit(0, 1));
  CHECK_FALSE(m.class_vectors.bit(0, 2));
  // Single-sample class reproduces its sample exactly (no ties possible).
  CHECK_FALSE(m.class_vectors.bit(1, 0));
  CHECK(m.class_vectors.bit(1, 1));
  CHECK(m.class_vectors.bit(1, 2));

  CHECK_THROWS_AS(train_classical(x, std::vector<int>{0, 0, 2}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(train_classical(x, std::vector<int>{0, 0}, cfg), std::invalid_argument);
}

TEST_CASE("classical training is order-invariant") {
  Rng rng(51);
  PackedBitMatrix x = pack(random_dense(40, 200, rng));
  std::vector<int> y = random_labels(40, 3, rng);
  ModelConfig cfg;
  cfg.class_count = 3;
  cfg.seed = 7;
  HDModel a = train_classical(x, y, cfg);

  std::vector<std::size_t> order(40);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 39; i > 0; --i) std::swap(order[i], order[rng.uniform_below(i + 1)]);
  DenseBitMatrix shuffled(40, 200);
  std::vector<int> y2(40);
  DenseBitMatrix dense = unpack(x);
  for (std::size_t i = 0; i < 40; ++i) {
    y2[i] = y[order[i]];
    for (std::size_t j = 0; j < 200; ++j) shuffled.at(i, j) = dense.at(order[i], j);
  }
  HDModel b = train_classical(pack(shuffled), y2, cfg);
  CHECK(a.accumulators == b.accumulators);  // integer-valued sums, exact
  CHECK(a.class_vectors == b.class_vectors);
}

TEST_CASE("classical training matches the scalar oracle exactly") {
  Rng rng(52);
  for (std::size_t dim : {std::size_t{31}, std::size_t{64}, std::size_t{1000}}) {
    DenseBitMatrix x = random_dense(30, dim, rng);
    std::vector<int> y = random_labels(30, 4, rng);
    ModelConfig cfg;
    cfg.class_count = 4;
    cfg.seed = rng.next_u64();
    HDModel packed = train_classical(pack(x), y, cfg);
    ref::NaiveModel naive = ref::train_classical(x, y, cfg, unpack(packed.tiebreak));
    check_same(packed, naive, 0.0);  // counts are exact in both paths
  }
}

TEST_CASE("online updates match the scalar oracle within 1e-9") {
  Rng rng(53);
  for (Metric metric : {Metric::kHamming, Metric::kCosine}) {
    for (int round = 0; round < 10; ++round) {
      const std::size_t dim = 1 + rng.uniform_below(300);
      const std::size_t classes = 2 + rng.uniform_below(4);
      DenseBitMatrix base = random_dense(20, dim, rng);
      std::vector<int> base_y = random_labels(20, classes, rng);
      // Seed both sides with identical classical state.
      ModelConfig cfg;
      cfg.class_count = classes;
      cfg.metric = metric;
      cfg.gamma = 0.25 + rng.next_unit();
      cfg.seed = rng.next_u64();
      HDModel packed = train_classical(pack(base), base_y, cfg);
      ref::NaiveModel naive = mirror(packed);

      const std::size_t k = 1 + rng.uniform_below(16);
      DenseBitMatrix batch = random_dense(k, dim, rng);
      std::vector<int> y = random_labels(k, classes, rng);
      online_update(packed, pack(batch), y, freeze(packed));
      ref::online_update(naive, batch, y, ref::freeze(naive));
      check_same(packed, naive, 1e-9);
    }
  }
}

TEST_CASE("a perfectly matched sample is an exact no-op update") {
  // Class 0's vector equals the query, so delta_true = 0 and nothing moves.
  PackedBitMatrix x = from_rows({{1, 0, 1, 1}, {0, 1, 0, 0}});
  ModelConfig cfg;
  cfg.class_count = 2;
  cfg.seed = 8;
  HDModel m = train_classical(x, std::vector<int>{0, 1}, cfg);
  const std::vector<double> acc_before = m.accumulators;
  const PackedBitMatrix vectors_before = m.class_vectors;

  PackedBitMatrix query = from_rows({{1, 0, 1, 1}});
  online_update(m, query, std::vector<int>{0}, freeze(m));
  CHECK(m.accumulators == acc_before);  // bitwise identical, no tolerance
  CHECK(m.class_vectors == vectors_before);
  CHECK(m.sample_counts[0] == 2);  // the sample still counts as seen
}

TEST_CASE("gamma zero disables the wrong-class penalty exactly") {
  PackedBitMatrix x = from_rows({{1, 0, 1, 1}, {0, 1, 0, 0}});
  ModelConfig cfg;
  cfg.class_count = 2;
  cfg.gamma = 0.0;
  cfg.seed = 9;
  HDModel m = train_classical(x, std::vector<int>{0, 1}, cfg);
  const std::vector<double> acc_before = m.accumulators;

  // Query equals class 0's vector but is labeled 1: predicted wrong class is
  // 0, whose accumulator must not move; class 1 gains its delta.
  PackedBitMatrix query = from_rows({{1, 0, 1, 1}});
  online_update(m, query, std::vector<int>{1}, freeze(m));
  CHECK(m.accumulator_row(0)[0] == acc_before[0]);
  CHECK(m.accumulator_row(0)[1] == acc_before[1]);
  CHECK(m.accumulator_row(0)[2] == acc_before[2]);
  CHECK(m.accumulator_row(0)[3] == acc_before[3]);
  CHECK(m.accumulator_row(1)[0] > acc_before[4]);  // true class did move
}

TEST_CASE("updates within one batch all use the batch-start snapshot") {
  Rng rng(54);
  DenseBitMatrix base = random_dense(10, 64, rng);
  std::vector<int> base_y = random_labels(10, 2, rng);
  ModelConfig cfg;
  cfg.class_count = 2;
  cfg.seed = 10;

  DenseBitMatrix batch = random_dense(6, 64, rng);
  std::vector<int> y = random_labels(6, 2, rng);

  // One six-sample batch vs. six single-sample batches.
  HDModel whole = train_classical(pack(base), base_y, cfg);
  online_update(whole, pack(batch), y, freeze(whole));

  HDModel stepped = train_classical(pack(base), base_y, cfg);
  DenseBitMatrix dense = batch;
  for (std::size_t i = 0; i < 6; ++i) {
    DenseBitMatrix one(1, 64);
    for (std::size_t j = 0; j < 64; ++j) one.at(0, j) = dense.at(i, j);
    online_update(stepped, pack(one), std::vector<int>{y[i]}, freeze(stepped));
  }
  // The oracle agrees with each mode separately...
  ref::NaiveModel naive_whole = ref::train_classical(base, base_y, cfg, unpack(whole.tiebreak));
  ref::online_update(naive_whole, batch, y, ref::freeze(naive_whole));
  check_same(whole, naive_whole, 1e-9);
  // ...and the two modes genuinely differ (snapshot semantics are visible).
  bool differs = false;
  for (std::size_t i = 0; i < whole.accumulators.size(); ++i) {
    if (whole.accumulators[i] != stepped.accumulators[i]) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("online training matches the scalar oracle for any batch size") {
  Rng rng(55);
  DenseBitMatrix x = random_dense(50, 128, rng);
  std::vector<int> y = random_labels(50, 3, rng);
  ModelConfig cfg;
  cfg.class_count = 3;
  cfg.gamma = 1.0;
  cfg.seed = 11;
  for (std::size_t batch : {std::size_t{1}, std::size_t{7}, std::size_t{50}, std::size_t{64}}) {
    HDModel packed = train_online(pack(x), y, batch, cfg);
    ref::NaiveModel naive = ref::train_online(x, y, batch, cfg, unpack(packed.tiebreak));
    check_same(packed, naive, 1e-9);
    // Re-running is deterministic.
    HDModel again = train_online(pack(x), y, batch, cfg);
    CHECK(again.accumulators == packed.accumulators);
    CHECK(again.class_vectors == packed.class_vectors);
  }
  CHECK_THROWS_AS(train_online(pack(x), y, 0, cfg), std::invalid_argument);
}

TEST_CASE("predict returns the nearest class with per-class distances") {
  PackedBitMatrix x = from_rows({{1, 1, 1, 1}, {0, 0, 0, 0}, {1, 1, 0, 0}});
  ModelConfig cfg;
  cfg.class_count = 3;
  cfg.seed = 12;
  HDModel m = train_classical(x, std::vector<int>{0, 1, 2}, cfg);

  PackedBitMatrix queries = from_rows({{1, 1, 1, 1}, {0, 0, 0, 1}, {1, 1, 0, 0}});
  std::vector<Prediction> p = predict(m, queries);
  REQUIRE(p.size() == 3);
  CHECK(p[0].label == 0);
  CHECK(p[0].distances[0] == 0.0);
  CHECK(p[0].distances[1] == 1.0);
  CHECK(p[1].label == 1);
  CHECK(p[1].distances[1] == doctest::Approx(0.25));
  CHECK(p[2].label == 2);
  // Ties resolve to the lowest class index: query equidistant from 0 and 2.
  std::vector<Prediction> tie = predict(m, from_rows({{1, 1, 0, 1}}));
  CHECK(tie[0].distances[0] == tie[0].distances[2]);
  CHECK(tie[0].label == 0);

  CHECK_THROWS_AS(predict(m, PackedBitMatrix(1, 5)), std::invalid_argument);
}

TEST_CASE("predict is identical for any thread count") {
  Rng rng(56);
  DenseBitMatrix x = random_dense(60, 333, rng);
  std::vector<int> y = random_labels(60, 4, rng);
  ModelConfig cfg;
  cfg.class_count = 4;
  cfg.seed = 13;
  HDModel m = train_classical(pack(x), y, cfg);
  DenseBitMatrix q = random_dense(25, 333, rng);
  std::vector<Prediction> one = predict(m, pack(q), 1);
  for (std::size_t threads : {std::size_t{2}, std::size_t{8}, std::size_t{100}}) {
    std::vector<Prediction> many = predict(m, pack(q), threads);
    REQUIRE(many.size() == one.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
      CHECK(many[i].label == one[i].label);
      CHECK(many[i].distances == one[i].distances);
    }
  }
}

TEST_CASE("predicted label is the best-scoring class with lowest-index ties") {
  Rng rng(57);
  for (Metric metric : {Metric::kHamming, Metric::kCosine}) {
    ModelConfig cfg;
    cfg.class_count = 5;
    cfg.metric = metric;
    cfg.seed = 15;
    DenseBitMatrix x = random_dense(80, 257, rng);
    HDModel m = train_classical(pack(x), random_labels(80, 5, rng), cfg);
    for (const Prediction& p : predict(m, pack(random_dense(40, 257, rng)), 3)) {
      int best = 0;
      for (int c = 1; c < 5; ++c) {
        const bool better = metric == Metric::kHamming ? p.distances[c] < p.distances[best]
                                                       : p.distances[c] > p.distances[best];
        if (better) best = c;
      }
      CHECK(p.label == best);
    }
  }
}

TEST_CASE("re-binarizing an untouched model changes nothing") {
  Rng rng(58);
  DenseBitMatrix x = random_dense(50, 401, rng);
  std::vector<int> y = random_labels(50, 3, rng);
  ModelConfig cfg;
  cfg.class_count = 3;
  cfg.seed = 16;
  HDModel classical = train_classical(pack(x), y, cfg);
  PackedBitMatrix before = classical.class_vectors;
  classical.refresh_binarization();
  CHECK(classical.class_vectors == before);

  HDModel online = train_online(pack(x), y, 8, cfg);
  before = online.class_vectors;
  online.refresh_binarization();
  CHECK(online.class_vectors == before);
}

TEST_CASE("cosine predict never selects an empty class and rejects zero queries") {
  ModelConfig cfg;
  cfg.class_count = 3;
  cfg.metric = Metric::kCosine;
  cfg.seed = 14;
  // Class 2 never receives a sample.
  PackedBitMatrix x = from_rows({{1, 1, 0, 0}, {0, 0, 1, 1}});
  HDModel m = train_classical(x, std::vector<int>{0, 1}, cfg);
  std::vector<Prediction> p = predict(m, from_rows({{1, 0, 0, 0}, {0, 0, 0, 1}}));
  CHECK(p[0].label == 0);
  CHECK(p[1].label == 1);
  CHECK(p[0].distances[2] == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(predict(m, PackedBitMatrix(1, 4)), std::domain_error);
}

TEST_CASE("cosine predictions agree with the scalar oracle") {
  Rng rng(57);
  DenseBitMatrix x = random_dense(40, 500, rng);
  std::vector<int> y = random_labels(40, 3, rng);
  ModelConfig cfg;
  cfg.class_count = 3;
  cfg.metric = Metric::kCosine;
  cfg.seed = 15;
  HDModel packed = train_classical(pack(x), y, cfg);
  ref::NaiveModel naive = mirror(packed);
  DenseBitMatrix q = random_dense(30, 500, rng);
  std::vector<Prediction> got = predict(packed, pack(q));
  std::vector<Prediction> want = ref::predict(naive, q);
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].label == want[i].label);
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(got[i].distances[c] == doctest::Approx(want[i].distances[c]).epsilon(1e-9));
    }
  }
}

TEST_CASE("model container roundtrips training state exactly") {
  Rng rng(58);
  DenseBitMatrix x = random_dense(30, 200, rng);
  std::vector<int> y = random_labels(30, 3, rng);
  ModelConfig cfg;
  cfg.class_count = 3;
  cfg.metric = Metric::kCosine;
  cfg.gamma = 0.75;
  cfg.seed = 16;
  HDModel m = train_online(pack(x), y, 8, cfg);

  std::ostringstream out;
  save_model(m, out);
  std::istringstream in(out.str());
  HDModel back = load_model(in);
  CHECK(back.config.class_count == 3);
  CHECK(back.config.dim == 200);
  CHECK(back.config.metric == Metric::kCosine);
  CHECK(back.config.gamma == 0.75);
  CHECK(back.config.seed == 16);
  CHECK(back.accumulators == m.accumulators);
  CHECK(back.class_weight == m.class_weight);
  CHECK(back.sample_counts == m.sample_counts);
  CHECK(back.class_vectors == m.class_vectors);
  CHECK(back.tiebreak == m.tiebreak);  // regenerated from the stored seed

  std::string broken = out.str();
  broken[2] = '?';
  std::istringstream bad(broken);
  CHECK_THROWS_AS(load_model(bad), std::runtime_error);
}
