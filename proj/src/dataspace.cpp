#include "teamrules/dataspace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

namespace teamrules {

namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Linear-interpolation quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, 0.5);
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

bool parse_double(const std::string& s, double& out) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  if (b == e) return false;
  const char* first = s.data() + b;
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + e, out);
  return ec == std::errc() && ptr == s.data() + e;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

void RawDataset::validate() const {
  if (values.size() != rows() * cols()) {
    throw DataError("dataset has " + std::to_string(values.size()) + " values, expected " +
                    std::to_string(rows()) + " x " + std::to_string(cols()));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 1) throw DataError("label at row " + std::to_string(i) + " is not 0/1");
  }
}

RawDataset RawDataset::subset(std::span<const std::size_t> indices) const {
  RawDataset out;
  out.feature_names = feature_names;
  out.values.reserve(indices.size() * cols());
  out.labels.reserve(indices.size());
  for (auto i : indices) {
    auto r = row(i);
    out.values.insert(out.values.end(), r.begin(), r.end());
    out.labels.push_back(labels[i]);
  }
  return out;
}

std::size_t RawDataset::feature_index(const std::string& name) const {
  auto it = std::find(feature_names.begin(), feature_names.end(), name);
  if (it == feature_names.end()) throw DataError("unknown feature '" + name + "'");
  return static_cast<std::size_t>(it - feature_names.begin());
}

std::string Predicate::describe(const std::vector<std::string>& names) const {
  const std::string& name = feature < names.size() ? names[feature] : "x" + std::to_string(feature);
  return name + (direction == Direction::GEQ ? " >= " : " < ") + format_short(threshold);
}

namespace {

void fill_columns(BinarizedDataset& out, const RawDataset& raw) {
  out.columns.assign(out.predicates.size(), Bitset(raw.rows()));
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    auto r = raw.row(i);
    for (std::size_t j = 0; j < out.predicates.size(); ++j) {
      if (out.predicates[j].evaluate(r)) out.columns[j].set(i);
    }
  }
}

}  // namespace

BinarizedDataset binarize(const RawDataset& raw, int bins_per_feature) {
  if (bins_per_feature < 1) throw ConfigError("bins_per_feature must be >= 1");
  if (raw.rows() == 0 || raw.cols() == 0) throw DataError("empty input");
  raw.validate();

  BinarizedDataset out;
  out.labels = raw.labels;
  out.source = std::make_shared<const RawDataset>(raw);

  std::vector<double> column(raw.rows());
  for (std::size_t f = 0; f < raw.cols(); ++f) {
    for (std::size_t i = 0; i < raw.rows(); ++i) column[i] = raw.at(i, f);
    std::sort(column.begin(), column.end());
    const double lo = column.front();
    const double hi = column.back();
    if (lo == hi) {
      out.warnings.push_back("feature '" + raw.feature_names[f] + "' is constant; no columns emitted");
      continue;
    }
    const bool boolean = std::all_of(column.begin(), column.end(),
                                     [](double v) { return v == 0.0 || v == 1.0; });
    std::vector<double> thresholds;
    if (boolean) {
      thresholds.push_back(0.5);
    } else {
      for (int k = 1; k <= bins_per_feature; ++k) {
        const double t = quantile_sorted(column, static_cast<double>(k) / (bins_per_feature + 1));
        // Only thresholds that actually split the sample are useful.
        if (t > lo && t <= hi && (thresholds.empty() || t != thresholds.back())) {
          thresholds.push_back(t);
        }
      }
    }
    for (double t : thresholds) {
      const std::size_t geq = out.predicates.size();
      out.predicates.push_back({f, Direction::GEQ, t});
      out.predicates.push_back({f, Direction::LT, t});
      out.complement.push_back(geq + 1);
      out.complement.push_back(geq);
    }
  }
  fill_columns(out, raw);
  return out;
}

BinarizedDataset apply_predicates(const BinarizedDataset& reference, const RawDataset& raw) {
  raw.validate();
  if (raw.cols() != reference.source->cols()) {
    throw DataError("feature count mismatch when applying predicates");
  }
  BinarizedDataset out;
  out.predicates = reference.predicates;
  out.complement = reference.complement;
  out.labels = raw.labels;
  out.source = std::make_shared<const RawDataset>(raw);
  fill_columns(out, raw);
  return out;
}

Label checkers_label(double x1, double x2) {
  const int y = (x1 <= 1.0 && x2 >= 1.0 ? 1 : 0) + (x1 >= 1.0 && x2 <= 1.0 ? 1 : 0);
  return static_cast<Label>(std::min(y, 1));
}

RawDataset gen_checkers(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("n must be >= 1");
  Rng rng(seed);
  RawDataset out;
  out.feature_names = {"x1", "x2"};
  out.values.reserve(2 * n);
  out.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = 2.0 * rng.uniform();
    const double x2 = 2.0 * rng.uniform();
    out.values.push_back(x1);
    out.values.push_back(x2);
    out.labels.push_back(checkers_label(x1, x2));
  }
  return out;
}

std::vector<Label> gaussian_labels(const RawDataset& raw) {
  if (raw.cols() != 20) throw DataError("Gaussian labels need exactly 20 features");
  const std::size_t n = raw.rows();
  std::vector<double> total(n), v1(n), v2(n);
  auto range_sum = [&](std::size_t i, std::size_t from, std::size_t to) {
    double s = 0.0;
    for (std::size_t j = from; j < to; ++j) s += raw.at(i, j);
    return s;
  };
  for (std::size_t i = 0; i < n; ++i) {
    total[i] = range_sum(i, 0, 20);
    v1[i] = normal_pdf(range_sum(i, 0, 2));
    v2[i] = normal_pdf(range_sum(i, 0, 4)) + normal_pdf(range_sum(i, 4, 8)) +
            normal_pdf(range_sum(i, 8, 16)) + normal_pdf(range_sum(i, 16, 20));
  }
  const double m1 = median(v1);
  const double m2 = median(v2);
  std::vector<Label> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool pos = (total[i] < 0.0 && v1[i] > m1) || (total[i] >= 0.0 && v2[i] < m2);
    y[i] = pos ? 1 : 0;
  }
  return y;
}

RawDataset gen_gaussian(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("n must be >= 1");
  Rng rng(seed);
  RawDataset out;
  for (int j = 1; j <= 20; ++j) out.feature_names.push_back("x" + std::to_string(j));
  out.values.resize(n * 20);
  for (auto& v : out.values) v = rng.normal();
  out.labels.assign(n, 0);
  out.labels = gaussian_labels(out);
  return out;
}

RawDataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "' is empty (no header row)");
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  std::vector<std::vector<std::string>> cells;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto row = split_csv_line(line);
    if (row.size() != header.size()) {
      throw DataError(path + ": row " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                      " cells, header has " + std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      row[c] = trim(row[c]);
      if (row[c].empty()) {
        throw DataError(path + ": empty cell at row " + std::to_string(line_no) + ", column '" +
                        header[c] + "'");
      }
    }
    cells.push_back(std::move(row));
  }
  if (cells.empty()) throw DataError("empty input");

  auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) throw DataError(path + ": missing label column '" + label_column + "'");
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());

  const std::size_t n = cells.size();
  // Per column: numeric parse, or categorical when any cell fails.
  std::vector<std::vector<double>> numeric(header.size(), std::vector<double>(n));
  std::vector<bool> categorical(header.size(), false);
  for (std::size_t c = 0; c < header.size(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!parse_double(cells[i][c], numeric[c][i])) {
        categorical[c] = true;
        break;
      }
    }
  }

  RawDataset out;
  out.labels.resize(n);
  {
    if (categorical[label_col]) {
      std::set<std::string> levels;
      for (std::size_t i = 0; i < n; ++i) levels.insert(cells[i][label_col]);
      if (levels.size() != 2) {
        throw DataError(path + ": label column '" + label_column + "' has " + std::to_string(levels.size()) +
                        " distinct values; expected 2");
      }
      const std::string& zero = *levels.begin();
      for (std::size_t i = 0; i < n; ++i) out.labels[i] = cells[i][label_col] == zero ? 0 : 1;
    } else {
      std::set<double> levels(numeric[label_col].begin(), numeric[label_col].end());
      if (levels.size() > 2) {
        throw DataError(path + ": label column '" + label_column + "' is not binary (" +
                        std::to_string(levels.size()) + " distinct values)");
      }
      const bool zero_one = std::all_of(levels.begin(), levels.end(), [](double v) { return v == 0.0 || v == 1.0; });
      const double zero = zero_one ? 0.0 : *levels.begin();
      for (std::size_t i = 0; i < n; ++i) out.labels[i] = numeric[label_col][i] == zero ? 0 : 1;
    }
  }

  // Feature layout: header order, categorical columns expanded in place.
  struct Source {
    std::size_t column;
    std::string level;  // empty for numeric pass-through
  };
  std::vector<Source> sources;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == label_col) continue;
    if (!categorical[c]) {
      sources.push_back({c, {}});
      out.feature_names.push_back(header[c]);
      continue;
    }
    std::set<std::string> levels;
    for (std::size_t i = 0; i < n; ++i) levels.insert(cells[i][c]);
    for (const auto& level : levels) {
      sources.push_back({c, level});
      out.feature_names.push_back(header[c] + "_" + level);
    }
  }
  out.values.resize(n * sources.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < sources.size(); ++k) {
      const auto& s = sources[k];
      out.values[i * sources.size() + k] =
          s.level.empty() ? numeric[s.column][i] : (cells[i][s.column] == s.level ? 1.0 : 0.0);
    }
  }
  return out;
}

void write_csv(const RawDataset& raw, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  for (const auto& name : raw.feature_names) out << name << ',';
  out << "label\n";
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    for (std::size_t j = 0; j < raw.cols(); ++j) out << format_number(raw.at(i, j)) << ',';
    out << static_cast<int>(raw.labels[i]) << '\n';
  }
  if (!out) throw Error("failed writing '" + path + "'");
}

SplitIndices split(std::size_t n, const SplitSpec& spec) {
  if (n < 2) throw DataError("split needs at least 2 rows");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ConfigError("train_fraction must be in (0, 1)");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(spec.seed);
  rng.shuffle(order);
  auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.train_fraction));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace teamrules
