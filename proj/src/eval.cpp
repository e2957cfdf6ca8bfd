#include "hypervec/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace hypervec {

std::vector<int> smooth_labels(std::span<const int> labels, std::size_t window) {
  if (window == 0 || window % 2 == 0) {
    throw std::invalid_argument("smooth_labels: window must be odd and >= 1, got " +
                                std::to_string(window));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw std::invalid_argument("smooth_labels: non-binary label " +
                                  std::to_string(labels[i]) + " at index " + std::to_string(i));
    }
  }
  const std::size_t n = labels.size();
  if (n == 0 || window == 1) return {labels.begin(), labels.end()};
  const std::size_t len = std::min(window, n);  // effective in-bounds window
  const std::size_t half = (window - 1) / 2;
  // prefix[i] = number of ones before index i
  std::vector<std::size_t> prefix(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + static_cast<std::size_t>(labels[i]);
  std::vector<int> out(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t start = i > half ? i - half : 0;
    start = std::min(start, n - len);
    const std::size_t ones = prefix[start + len] - prefix[start];
    out[i] = 2 * ones >= len ? 1 : 0;  // ties favor detection
  }
  return out;
}

EvalReport sample_metrics(std::span<const int> pred, std::span<const int> truth,
                          int positive_class) {
  if (pred.size() != truth.size()) {
    throw std::invalid_argument("sample_metrics: " + std::to_string(pred.size()) +
                                " predictions vs " + std::to_string(truth.size()) + " labels");
  }
  if (pred.empty()) {
    throw std::invalid_argument("sample_metrics: empty sequences");
  }
  EvalReport report;
  std::uint64_t exact = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == truth[i]) ++exact;
    const bool p = pred[i] == positive_class;
    const bool t = truth[i] == positive_class;
    if (p && t) {
      ++report.tp;
    } else if (p) {
      ++report.fp;
    } else if (t) {
      ++report.fn;
    } else {
      ++report.tn;
    }
  }
  report.accuracy = static_cast<double>(exact) / static_cast<double>(pred.size());
  if (report.tp + report.fn > 0) {
    report.tpr = static_cast<double>(report.tp) / static_cast<double>(report.tp + report.fn);
  }
  if (report.tp + report.fp > 0) {
    report.ppv = static_cast<double>(report.tp) / static_cast<double>(report.tp + report.fp);
  }
  if (report.tpr && report.ppv && (*report.tpr + *report.ppv) > 0.0) {
    report.f1 = 2.0 * *report.ppv * *report.tpr / (*report.ppv + *report.tpr);
  }
  return report;
}

EpisodeCounts episode_metrics(std::span<const int> pred, std::span<const int> truth,
                              int positive_class) {
  if (pred.size() != truth.size()) {
    throw std::invalid_argument("episode_metrics: " + std::to_string(pred.size()) +
                                " predictions vs " + std::to_string(truth.size()) + " labels");
  }
  EpisodeCounts counts;
  const std::size_t n = pred.size();
  // Truth episodes: maximal positive-truth runs, detected iff any sample in
  // the run carries a positive prediction.
  for (std::size_t i = 0; i < n;) {
    if (truth[i] != positive_class) {
      ++i;
      continue;
    }
    bool hit = false;
    while (i < n && truth[i] == positive_class) {
      hit = hit || pred[i] == positive_class;
      ++i;
    }
    ++counts.total;
    if (hit) ++counts.detected;
  }
  // False-positive episodes: maximal positive-prediction runs with no
  // positive truth sample anywhere inside.
  for (std::size_t i = 0; i < n;) {
    if (pred[i] != positive_class) {
      ++i;
      continue;
    }
    bool overlaps = false;
    while (i < n && pred[i] == positive_class) {
      overlaps = overlaps || truth[i] == positive_class;
      ++i;
    }
    if (!overlaps) ++counts.false_positive;
  }
  return counts;
}

double time_stage(const std::string& name, StageTimings& timings,
                  const std::function<void()>& thunk) {
  const auto begin = std::chrono::steady_clock::now();
  thunk();
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - begin;
  timings[name] += elapsed.count();
  return elapsed.count();
}

std::string report_to_json(const EvalReport& report, bool include_timings) {
  nlohmann::json j = {
      {"confusion",
       {{"tp", report.tp}, {"fp", report.fp}, {"tn", report.tn}, {"fn", report.fn}}},
      {"accuracy", report.accuracy},
  };
  if (report.tpr) j["tpr"] = *report.tpr;
  if (report.ppv) j["ppv"] = *report.ppv;
  if (report.f1) j["f1"] = *report.f1;
  if (report.episodes) {
    j["episodes"] = {{"detected", report.episodes->detected},
                     {"total", report.episodes->total},
                     {"false_positive", report.episodes->false_positive}};
  }
  if (include_timings) {
    j["timings"] = report.timings;
  }
  return j.dump(2) + "\n";
}

namespace {

std::string ratio_cell(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

}  // namespace

std::string report_csv_header() {
  return "accuracy,tpr,ppv,f1,tp,fp,tn,fn,episodes_detected,episodes_total,episodes_false_positive";
}

std::string report_csv_row(const EvalReport& report) {
  char acc[32];
  std::snprintf(acc, sizeof acc, "%.6f", report.accuracy);
  std::string row = std::string(acc) + "," + ratio_cell(report.tpr) + "," +
                    ratio_cell(report.ppv) + "," + ratio_cell(report.f1) + "," +
                    std::to_string(report.tp) + "," + std::to_string(report.fp) + "," +
                    std::to_string(report.tn) + "," + std::to_string(report.fn);
  if (report.episodes) {
    row += "," + std::to_string(report.episodes->detected) + "," +
           std::to_string(report.episodes->total) + "," +
           std::to_string(report.episodes->false_positive);
  } else {
    row += ",,,";
  }
  return row;
}

}  // namespace hypervec
