#pragma once

// Prediction post-processing and scoring: centered-majority label smoothing,
// sample-level confusion metrics (accuracy, TPR, PPV, F1), episode-level
// detection counts, and monotonic-clock stage timing.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hypervec {

/// Episode = maximal run of positive truth labels. An episode counts as
/// detected when at least one of its samples is predicted positive; a
/// false-positive episode is a maximal positive-prediction run that overlaps
/// no truth episode.
struct EpisodeCounts {
  std::uint64_t detected = 0;
  std::uint64_t total = 0;
  std::uint64_t false_positive = 0;
};

/// Stage name -> accumulated wall-clock seconds.
using StageTimings = std::map<std::string, double>;

/// Confusion counts against one positive class, derived ratios, and optional
/// episode counts/timings. Undefined ratios (zero denominator) are absent,
/// never silently 0.
struct EvalReport {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;
  double accuracy = 0.0;  // exact-match fraction over all classes
  std::optional<double> tpr;
  std::optional<double> ppv;
  std::optional<double> f1;
  std::optional<EpisodeCounts> episodes;
  StageTimings timings;
};

// Majority vote over a length-`window` window centered on each position;
// near the edges the window shifts inward so it always covers `window`
// in-bounds samples (the whole sequence when window > length). Ties go to 1
// (favor detection). Window must be odd and >= 1; labels must be 0/1.
std::vector<int> smooth_labels(std::span<const int> labels, std::size_t window);

// Confusion counts of pred vs truth against `positive_class`, plus accuracy
// over exact label matches. Lengths must agree and be nonzero.
EvalReport sample_metrics(std::span<const int> pred, std::span<const int> truth,
                          int positive_class);

// Run-level detection counts; see EpisodeCounts.
EpisodeCounts episode_metrics(std::span<const int> pred, std::span<const int> truth,
                              int positive_class);

// Runs the thunk, adds its wall-clock duration to timings[name] (repeat
// stages accumulate), and returns the seconds measured.
double time_stage(const std::string& name, StageTimings& timings,
                  const std::function<void()>& thunk);

// JSON object with confusion counts, ratios (absent ones omitted), episode
// counts, and (optionally) timings.
std::string report_to_json(const EvalReport& report, bool include_timings);

// Flat CSV for sweep aggregation; absent ratios serialize as empty cells.
std::string report_csv_header();
std::string report_csv_row(const EvalReport& report);

}  // namespace hypervec
