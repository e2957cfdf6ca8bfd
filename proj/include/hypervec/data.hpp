#pragma once

// Dataset ingestion and protocol bookkeeping: CSV loading with a named label
// (and optional segment) column, time-series-split and leave-one-segment-out
// fold generation, and seeded minority/majority subsampling.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace hypervec {

/// In-memory feature matrix with labels and optional segment ids.
struct Dataset {
  std::vector<double> X;  // rows x features, row-major
  std::vector<int> y;     // one label per row
  std::vector<std::int64_t> segments;  // empty when the CSV has no segment column
  double sample_period = 0.0;          // seconds per sample; 0 = unknown
  std::size_t rows = 0;
  std::size_t features = 0;

  [[nodiscard]] bool has_segments() const { return !segments.empty(); }
  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return {X.data() + i * features, features};
  }
};

/// Column names used when reading/writing CSV files. The label column is
/// required; the segment column is picked up only if present in the header.
struct CsvSchema {
  std::string label_column = "label";
  std::string segment_column = "segment";
};

// Loads a header-ful CSV: every column that is not the label or segment
// column is a feature, in header order. Throws std::runtime_error naming the
// offending row/column on non-numeric cells, ragged rows, non-integer labels
// or segments, unsorted segment ids, or a missing label column.
Dataset load_csv(std::istream& in, const CsvSchema& schema = {});
Dataset load_csv(const std::string& path, const CsvSchema& schema = {});

// Writes features (15 significant digits), label, and segment (when present)
// with a header row; load_csv(save_csv(d)) reproduces d.
void save_csv(const Dataset& d, std::ostream& out, const CsvSchema& schema = {});
void save_csv(const Dataset& d, const std::string& path, const CsvSchema& schema = {});

/// One train/test index pair. Indices refer to dataset row order.
struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct SplitPlan {
  std::vector<Fold> folds;
};

// One fold per segment id s beyond the first: test on s, train on every
// earlier segment — training never sees the future. Requires a segment
// column with >= 2 distinct ids.
SplitPlan tscv_folds(const Dataset& d);

// One fold per distinct segment id: test on it, train on all others.
// Requires a segment column with >= 2 distinct ids.
SplitPlan leave_one_segment_out(const Dataset& d);

// Single chronological 80/20 split: first 80% of rows train, rest test.
// Requires >= 2 rows; needs no segments.
SplitPlan single_split(const Dataset& d);

// Keeps every row of `minority_class` plus min(factor x minority_count,
// majority_count) other rows chosen by the seeded generator without
// replacement; relative row order is preserved. factor must be >= 1 and the
// minority class must be present.
Dataset subsample_factor(const Dataset& d, int minority_class, std::size_t factor,
                         std::uint64_t seed);

// Row subset in the given index order.
Dataset select_rows(const Dataset& d, std::span<const std::size_t> indices);

// max label + 1; throws on an empty dataset or a negative label.
std::size_t class_count_of(const Dataset& d);

// {"folds": [{"train": [...], "test": [...]}, ...]} for run audits.
std::string split_plan_to_json(const SplitPlan& plan);

}  // namespace hypervec
