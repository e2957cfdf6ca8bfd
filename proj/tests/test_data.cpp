#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "hypervec/data.hpp"
#include "hypervec/rng.hpp"
#include "support/synth.hpp"

using namespace hypervec;

namespace {

Dataset tiny_segmented(std::size_t segments, std::size_t rows_per_segment) {
  Dataset d;
  d.rows = segments * rows_per_segment;
  d.features = 2;
  d.X.resize(d.rows * 2);
  d.y.resize(d.rows);
  d.segments.resize(d.rows);
  for (std::size_t i = 0; i < d.rows; ++i) {
    d.X[i * 2] = static_cast<double>(i);
    d.X[i * 2 + 1] = static_cast<double>(i) * 0.5;
    d.y[i] = static_cast<int>(i % 2);
    d.segments[i] = static_cast<std::int64_t>(i / rows_per_segment);
  }
  return d;
}

}  // namespace

TEST_CASE("CSV loading maps named columns and keeps feature order") {
  std::istringstream in(
      "f0,label,f1,segment\n"
      "0.5,1,-2.25,0\n"
      "1.5,0,3.75,0\n"
      "2.5,1,0.125,1\n");
  Dataset d = load_csv(in);
  CHECK(d.rows == 3);
  CHECK(d.features == 2);
  CHECK(d.y == std::vector<int>{1, 0, 1});
  CHECK(d.segments == std::vector<std::int64_t>{0, 0, 1});
  CHECK(d.X == std::vector<double>{0.5, -2.25, 1.5, 3.75, 2.5, 0.125});
}

TEST_CASE("CSV loading honours custom schema names") {
  std::istringstream in("x,target\n1,0\n2,1\n");
  CsvSchema schema;
  schema.label_column = "target";
  Dataset d = load_csv(in, schema);
  CHECK(d.rows == 2);
  CHECK(d.features == 1);
  CHECK_FALSE(d.has_segments());
}

TEST_CASE("CSV loading reports malformed content precisely") {
  {
    std::istringstream in("f0,f1\n1,2\n");
    CHECK_THROWS_WITH_AS(load_csv(in), "label column 'label' not found in header",
                         std::runtime_error);
  }
  {
    std::istringstream in("f0,label\n1.5,zero\n");
    CHECK_THROWS_AS(load_csv(in), std::runtime_error);
  }
  {
    std::istringstream in("f0,label\nnan,0\n");  // non-finite features rejected
    CHECK_THROWS_AS(load_csv(in), std::runtime_error);
  }
  {
    std::istringstream in("f0,label\n1,0,7\n");  // ragged row
    CHECK_THROWS_AS(load_csv(in), std::runtime_error);
  }
  {
    std::istringstream in("f0,label,segment\n1,0,5\n2,0,4\n");  // unsorted segments
    CHECK_THROWS_AS(load_csv(in), std::runtime_error);
  }
  {
    std::istringstream in("f0,label,f0\n1,0,2\n");  // duplicate column
    CHECK_THROWS_AS(load_csv(in), std::runtime_error);
  }
  {
    std::istringstream in("");
    CHECK_THROWS_AS(load_csv(in), std::runtime_error);
  }
}

TEST_CASE("CSV save/load roundtrips values, labels, and segments") {
  synth::SynthSpec spec;
  spec.rows = 64;
  spec.features = 5;
  spec.classes = 3;
  spec.segments = 4;
  Dataset d = synth::make_synth(spec);
  std::ostringstream out;
  save_csv(d, out);
  std::istringstream in(out.str());
  Dataset back = load_csv(in);
  CHECK(back.rows == d.rows);
  CHECK(back.features == d.features);
  CHECK(back.y == d.y);
  CHECK(back.segments == d.segments);
  for (std::size_t i = 0; i < d.X.size(); ++i) {
    CHECK(back.X[i] == doctest::Approx(d.X[i]).epsilon(1e-14));
  }
}

TEST_CASE("time-series folds train strictly on the past") {
  Dataset d = tiny_segmented(5, 3);
  SplitPlan plan = tscv_folds(d);
  REQUIRE(plan.folds.size() == 4);  // segments 1..4 each get a fold
  for (std::size_t k = 0; k < plan.folds.size(); ++k) {
    const Fold& fold = plan.folds[k];
    CHECK(fold.train.size() == (k + 1) * 3);
    CHECK(fold.test.size() == 3);
    const std::int64_t test_segment = d.segments[fold.test.front()];
    CHECK(test_segment == static_cast<std::int64_t>(k + 1));
    for (std::size_t idx : fold.train) {
      CHECK(d.segments[idx] < test_segment);  // no future leakage
    }
    for (std::size_t idx : fold.test) {
      CHECK(d.segments[idx] == test_segment);
    }
  }
  Dataset flat = tiny_segmented(1, 6);
  CHECK_THROWS_AS(tscv_folds(flat), std::invalid_argument);
  flat.segments.clear();
  CHECK_THROWS_AS(tscv_folds(flat), std::invalid_argument);
}

TEST_CASE("leave-one-segment-out covers every row exactly once as test") {
  Dataset d = tiny_segmented(4, 2);
  SplitPlan plan = leave_one_segment_out(d);
  REQUIRE(plan.folds.size() == 4);
  std::set<std::size_t> tested;
  for (const Fold& fold : plan.folds) {
    CHECK(fold.train.size() + fold.test.size() == d.rows);
    for (std::size_t idx : fold.test) {
      CHECK(tested.insert(idx).second);  // disjoint across folds
    }
    std::set<std::size_t> train(fold.train.begin(), fold.train.end());
    for (std::size_t idx : fold.test) CHECK(train.count(idx) == 0);
  }
  CHECK(tested.size() == d.rows);
}

TEST_CASE("single split is a chronological 80/20 cut") {
  Dataset d = tiny_segmented(1, 10);
  d.segments.clear();
  SplitPlan plan = single_split(d);
  REQUIRE(plan.folds.size() == 1);
  CHECK(plan.folds[0].train == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7});
  CHECK(plan.folds[0].test == std::vector<std::size_t>{8, 9});

  Dataset two = tiny_segmented(1, 2);
  SplitPlan tiny = single_split(two);
  CHECK(tiny.folds[0].train.size() == 1);
  CHECK(tiny.folds[0].test.size() == 1);
  Dataset one = tiny_segmented(1, 1);
  CHECK_THROWS_AS(single_split(one), std::invalid_argument);
}

TEST_CASE("subsampling keeps the minority class and caps the rest") {
  // 10 positive rows, 500 negative rows; factor 10 keeps 10 + 100 = 110.
  Dataset d;
  d.rows = 510;
  d.features = 1;
  d.X.resize(510);
  d.y.assign(510, 0);
  for (std::size_t i = 0; i < 510; ++i) d.X[i] = static_cast<double>(i);
  for (std::size_t i = 0; i < 10; ++i) d.y[i * 50] = 1;

  Dataset sub = subsample_factor(d, 1, 10, 99);
  CHECK(sub.rows == 110);
  std::size_t positives = 0;
  for (int label : sub.y) positives += label == 1;
  CHECK(positives == 10);
  // Row order (by original X value) is preserved.
  CHECK(std::is_sorted(sub.X.begin(), sub.X.end()));
  // Deterministic in the seed, different across seeds.
  Dataset again = subsample_factor(d, 1, 10, 99);
  CHECK(again.X == sub.X);
  Dataset other = subsample_factor(d, 1, 10, 100);
  CHECK(other.X != sub.X);

  // A huge factor keeps everything.
  CHECK(subsample_factor(d, 1, 1000, 1).rows == 510);
  CHECK_THROWS_AS(subsample_factor(d, 1, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(subsample_factor(d, 7, 10, 1), std::invalid_argument);
}

TEST_CASE("select_rows extracts rows in the requested order") {
  Dataset d = tiny_segmented(2, 3);
  const std::vector<std::size_t> idx = {4, 0, 2};
  Dataset sub = select_rows(d, idx);
  CHECK(sub.rows == 3);
  CHECK(sub.features == 2);
  CHECK(sub.X == std::vector<double>{4.0, 2.0, 0.0, 0.0, 2.0, 1.0});
  CHECK(sub.y == std::vector<int>{d.y[4], d.y[0], d.y[2]});
  CHECK(sub.segments == std::vector<std::int64_t>{1, 0, 0});
}

TEST_CASE("class_count_of is max label plus one") {
  Dataset d = tiny_segmented(1, 4);
  CHECK(class_count_of(d) == 2);
  d.y[2] = 6;
  CHECK(class_count_of(d) == 7);
  d.y[2] = -1;
  CHECK_THROWS_AS(class_count_of(d), std::invalid_argument);
  Dataset empty;
  CHECK_THROWS_AS(class_count_of(empty), std::invalid_argument);
}

TEST_CASE("split plans serialize to a JSON audit trail") {
  Dataset d = tiny_segmented(2, 2);
  const std::string json = split_plan_to_json(tscv_folds(d));
  CHECK(json.find("\"folds\"") != std::string::npos);
  CHECK(json.find("\"train\"") != std::string::npos);
  CHECK(json.find("\"test\"") != std::string::npos);
}
