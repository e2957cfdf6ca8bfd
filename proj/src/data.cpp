#include "hypervec/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>
#include <utility>

#include "json.hpp"

#include "hypervec/rng.hpp"

namespace hypervec {

namespace {

std::string trimmed(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const std::size_t comma = line.find(',', pos);
    const std::size_t end = comma == std::string::npos ? line.size() : comma;
    cells.push_back(trimmed(line.substr(pos, end - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return cells;
}

[[noreturn]] void cell_error(std::size_t row, std::size_t col, const std::string& column_name,
                             const std::string& cell, const char* expected) {
  throw std::runtime_error("row " + std::to_string(row) + ", column " + std::to_string(col) +
                           " ('" + column_name + "'): expected " + expected + ", got '" + cell +
                           "'");
}

double parse_double(const std::string& cell, std::size_t row, std::size_t col,
                    const std::string& column_name) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || cell.empty()) {
    cell_error(row, col, column_name, cell, "a number");
  }
  if (!std::isfinite(value)) {
    cell_error(row, col, column_name, cell, "a finite number");
  }
  return value;
}

std::int64_t parse_int(const std::string& cell, std::size_t row, std::size_t col,
                       const std::string& column_name) {
  std::int64_t value = 0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || cell.empty()) {
    cell_error(row, col, column_name, cell, "an integer");
  }
  return value;
}

// Distinct segment ids in order of appearance (== ascending, since ids are
// validated non-decreasing) with the row indices carrying each id.
std::vector<std::pair<std::int64_t, std::vector<std::size_t>>> group_segments(const Dataset& d) {
  std::vector<std::pair<std::int64_t, std::vector<std::size_t>>> groups;
  for (std::size_t i = 0; i < d.rows; ++i) {
    if (groups.empty() || groups.back().first != d.segments[i]) {
      groups.push_back({d.segments[i], {}});
    }
    groups.back().second.push_back(i);
  }
  return groups;
}

void require_segments(const Dataset& d, const char* who) {
  if (!d.has_segments()) {
    throw std::invalid_argument(std::string(who) + ": dataset has no segment column");
  }
}

}  // namespace

Dataset load_csv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty file: no header row");
  }
  const std::vector<std::string> header = split_line(line);
  std::size_t label_col = header.size();
  std::size_t segment_col = header.size();
  std::vector<std::size_t> feature_cols;
  std::vector<std::string> feature_names;
  std::set<std::string> seen_names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!seen_names.insert(header[c]).second) {
      throw std::runtime_error("duplicate column '" + header[c] + "' in header");
    }
    if (header[c] == schema.label_column) {
      label_col = c;
    } else if (header[c] == schema.segment_column) {
      segment_col = c;
    } else {
      feature_cols.push_back(c);
      feature_names.push_back(header[c]);
    }
  }
  if (label_col == header.size()) {
    throw std::runtime_error("label column '" + schema.label_column + "' not found in header");
  }
  const bool has_segments = segment_col != header.size();

  Dataset d;
  d.features = feature_cols.size();
  std::size_t row = 1;  // 1-based, header is row 1
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    ++row;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("row " + std::to_string(row) + ": expected " +
                               std::to_string(header.size()) + " cells, got " +
                               std::to_string(cells.size()));
    }
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      const std::size_t c = feature_cols[k];
      d.X.push_back(parse_double(cells[c], row, c + 1, header[c]));
    }
    const std::int64_t label = parse_int(cells[label_col], row, label_col + 1,
                                         header[label_col]);
    if (label < std::numeric_limits<int>::min() || label > std::numeric_limits<int>::max()) {
      cell_error(row, label_col + 1, header[label_col], cells[label_col],
                 "a label within int range");
    }
    d.y.push_back(static_cast<int>(label));
    if (has_segments) {
      const std::int64_t seg = parse_int(cells[segment_col], row, segment_col + 1,
                                         header[segment_col]);
      if (!d.segments.empty() && seg < d.segments.back()) {
        throw std::runtime_error("row " + std::to_string(row) +
                                 ": segment ids must be non-decreasing (" +
                                 std::to_string(seg) + " after " +
                                 std::to_string(d.segments.back()) + ")");
      }
      d.segments.push_back(seg);
    }
    ++d.rows;
  }
  return d;
}

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return load_csv(in, schema);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void save_csv(const Dataset& d, std::ostream& out, const CsvSchema& schema) {
  for (std::size_t f = 0; f < d.features; ++f) {
    out << 'f' << f << ',';
  }
  out << schema.label_column;
  if (d.has_segments()) out << ',' << schema.segment_column;
  out << '\n';
  char buf[40];
  for (std::size_t i = 0; i < d.rows; ++i) {
    for (std::size_t f = 0; f < d.features; ++f) {
      std::snprintf(buf, sizeof buf, "%.15g", d.X[i * d.features + f]);
      out << buf << ',';
    }
    out << d.y[i];
    if (d.has_segments()) out << ',' << d.segments[i];
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed");
}

void save_csv(const Dataset& d, const std::string& path, const CsvSchema& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  save_csv(d, out, schema);
}

SplitPlan tscv_folds(const Dataset& d) {
  require_segments(d, "tscv_folds");
  const auto groups = group_segments(d);
  if (groups.size() < 2) {
    throw std::invalid_argument("tscv_folds: need >= 2 distinct segments, got " +
                                std::to_string(groups.size()));
  }
  SplitPlan plan;
  std::vector<std::size_t> seen;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (g > 0) {
      Fold fold;
      fold.train = seen;
      fold.test = groups[g].second;
      plan.folds.push_back(std::move(fold));
    }
    seen.insert(seen.end(), groups[g].second.begin(), groups[g].second.end());
  }
  return plan;
}

SplitPlan leave_one_segment_out(const Dataset& d) {
  require_segments(d, "leave_one_segment_out");
  const auto groups = group_segments(d);
  if (groups.size() < 2) {
    throw std::invalid_argument("leave_one_segment_out: need >= 2 distinct segments, got " +
                                std::to_string(groups.size()));
  }
  SplitPlan plan;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    Fold fold;
    fold.test = groups[g].second;
    for (std::size_t h = 0; h < groups.size(); ++h) {
      if (h == g) continue;
      fold.train.insert(fold.train.end(), groups[h].second.begin(), groups[h].second.end());
    }
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

SplitPlan single_split(const Dataset& d) {
  if (d.rows < 2) {
    throw std::invalid_argument("single_split: need >= 2 rows, got " + std::to_string(d.rows));
  }
  const std::size_t train_rows = std::min(d.rows - 1, std::max<std::size_t>(1, d.rows * 4 / 5));
  SplitPlan plan;
  Fold fold;
  for (std::size_t i = 0; i < d.rows; ++i) {
    (i < train_rows ? fold.train : fold.test).push_back(i);
  }
  plan.folds.push_back(std::move(fold));
  return plan;
}

Dataset subsample_factor(const Dataset& d, int minority_class, std::size_t factor,
                         std::uint64_t seed) {
  if (factor == 0) {
    throw std::invalid_argument("subsample_factor: factor must be >= 1");
  }
  std::vector<std::size_t> minority;
  std::vector<std::size_t> majority;
  for (std::size_t i = 0; i < d.rows; ++i) {
    (d.y[i] == minority_class ? minority : majority).push_back(i);
  }
  if (minority.empty()) {
    throw std::invalid_argument("subsample_factor: class " + std::to_string(minority_class) +
                                " has no samples");
  }
  const std::size_t keep = std::min(factor * minority.size(), majority.size());
  // Partial Fisher-Yates: the first `keep` slots end up holding a uniform
  // sample without replacement.
  Rng rng(seed);
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(majority.size() - i));
    std::swap(majority[i], majority[j]);
  }
  std::vector<std::size_t> chosen(minority);
  chosen.insert(chosen.end(), majority.begin(), majority.begin() + static_cast<long>(keep));
  std::sort(chosen.begin(), chosen.end());
  return select_rows(d, chosen);
}

Dataset select_rows(const Dataset& d, std::span<const std::size_t> indices) {
  Dataset out;
  out.features = d.features;
  out.rows = indices.size();
  out.sample_period = d.sample_period;
  out.X.reserve(indices.size() * d.features);
  out.y.reserve(indices.size());
  for (std::size_t i : indices) {
    const std::span<const double> r = d.row(i);
    out.X.insert(out.X.end(), r.begin(), r.end());
    out.y.push_back(d.y[i]);
    if (d.has_segments()) out.segments.push_back(d.segments[i]);
  }
  return out;
}

std::size_t class_count_of(const Dataset& d) {
  if (d.rows == 0) {
    throw std::invalid_argument("class_count_of: empty dataset");
  }
  int max_label = 0;
  for (int label : d.y) {
    if (label < 0) {
      throw std::invalid_argument("class_count_of: negative label " + std::to_string(label));
    }
    max_label = std::max(max_label, label);
  }
  return static_cast<std::size_t>(max_label) + 1;
}

std::string split_plan_to_json(const SplitPlan& plan) {
  nlohmann::json folds = nlohmann::json::array();
  for (const Fold& fold : plan.folds) {
    folds.push_back({{"train", fold.train}, {"test", fold.test}});
  }
  return nlohmann::json{{"folds", folds}}.dump();
}

}  // namespace hypervec
