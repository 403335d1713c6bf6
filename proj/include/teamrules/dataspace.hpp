#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "teamrules/common.hpp"

namespace teamrules {

/// Row-major table of real features with binary labels.
struct RawDataset {
  std::vector<std::string> feature_names;
  std::vector<double> values;  // rows() x cols(), row-major
  std::vector<Label> labels;

  std::size_t rows() const { return labels.size(); }
  std::size_t cols() const { return feature_names.size(); }

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols(), cols()};
  }
  double at(std::size_t i, std::size_t j) const { return values[i * cols() + j]; }

  /// Throws DataError if the shape or label invariants are broken.
  void validate() const;

  /// Rows at the given indices, in that order.
  RawDataset subset(std::span<const std::size_t> indices) const;

  /// Index of a named feature; throws DataError when absent.
  std::size_t feature_index(const std::string& name) const;
};

enum class Direction { GEQ, LT };

struct Predicate {
  std::size_t feature = 0;
  Direction direction = Direction::GEQ;
  double threshold = 0.0;

  bool evaluate(std::span<const double> row) const {
    return direction == Direction::GEQ ? row[feature] >= threshold
                                       : row[feature] < threshold;
  }
  /// e.g. "x1 >= 1.5"
  std::string describe(const std::vector<std::string>& names) const;

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

/// Boolean predicate columns over the rows of a source dataset.
///
/// columns[j].test(i) == predicates[j].evaluate(source->row(i)) for every
/// (i, j). Predicates come in GEQ/LT pairs at the same threshold, and
/// complement[j] is the index of the paired column.
struct BinarizedDataset {
  std::vector<Predicate> predicates;
  std::vector<std::size_t> complement;
  std::vector<Bitset> columns;
  std::vector<Label> labels;
  std::shared_ptr<const RawDataset> source;
  std::vector<std::string> warnings;

  std::size_t rows() const { return labels.size(); }
  std::size_t cols() const { return predicates.size(); }
  bool at(std::size_t row, std::size_t col) const { return columns[col].test(row); }
  const std::vector<std::string>& feature_names() const { return source->feature_names; }
};

/// Quantile-threshold binarization.
///
/// Continuous features get thresholds at the k/(bins_per_feature+1)
/// quantiles (linear interpolation), each emitting a GEQ and an LT column.
/// 0/1 features get an identity column (x >= 0.5) and its negation.
/// Constant features emit nothing and add a warning.
BinarizedDataset binarize(const RawDataset& raw, int bins_per_feature);

/// Evaluates an existing predicate list on another dataset with the same
/// feature layout (used to carry training thresholds to test rows).
BinarizedDataset apply_predicates(const BinarizedDataset& reference, const RawDataset& raw);

/// Two U(0,2) features; y = 1{x1<=1}1{x2>=1} + 1{x1>=1}1{x2<=1}, clamped to 1.
RawDataset gen_checkers(std::size_t n, std::uint64_t seed);

/// Label of a single Checkers point.
Label checkers_label(double x1, double x2);

/// Twenty N(0,1) features; labels from the pdf-of-sums construction with
/// medians taken over the generated sample.
RawDataset gen_gaussian(std::size_t n, std::uint64_t seed);

/// Labels for an arbitrary 20-feature sample using the Gaussian rule.
std::vector<Label> gaussian_labels(const RawDataset& raw);

/// Reads a headered CSV. Columns with any non-numeric cell are one-hot
/// encoded into `col_value` 0/1 features (levels sorted). The label column
/// must take exactly two values; numeric {0,1} is used as-is, otherwise
/// the smaller value (numeric or lexicographic) maps to 0.
RawDataset load_csv(const std::string& path, const std::string& label_column);

/// Writes features plus a trailing `label` column; values use %.17g.
void write_csv(const RawDataset& raw, const std::string& path);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle split with round(n * train_fraction) training rows
/// (clamped to [1, n-1]). Both index lists are returned sorted.
SplitIndices split(std::size_t n, const SplitSpec& spec);

}  // namespace teamrules
