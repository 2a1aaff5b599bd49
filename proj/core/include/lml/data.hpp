#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lml/tensor.hpp"

namespace lml {

// Feature matrix plus either regression targets or integer class labels.
// provenance[j] == 1 marks a genuine column, 0 an injected noise column.
struct Dataset {
  Matrix features;
  Vector targets;           // regression; empty for classification
  std::vector<int> labels;  // classification; empty for regression
  std::vector<std::uint8_t> provenance;
  std::string name;

  std::size_t size() const { return features.rows; }
  std::size_t dim() const { return features.cols; }
  bool is_classification() const { return !labels.empty(); }

  Vector row(std::size_t i) const {
    return Vector(features.row(i), features.row(i) + features.cols);
  }
};

/// Throws if row/target/provenance lengths disagree or entries are not finite.
void validate(const Dataset& d);

// Either train_fraction in (0,1) or an absolute train_count; exactly one set.
struct SplitSpec {
  double train_fraction = 0.0;
  std::size_t train_count = 0;
  std::uint64_t seed = 0;
};

/// y = sin(x1) exp(-x2) + (x3 - 0.2)^2 over the first three coordinates.
double synth_target(const Vector& x);

/// n rows of p standard-normal features; targets from synth_target;
/// provenance marks columns 0..2 genuine.
Dataset make_synthetic(std::size_t n, std::size_t p, std::uint64_t seed);

/// Big-endian IDX pair (images magic 2051, labels magic 2049). Pixels are
/// scaled by 1/16, giving values in [0, 15.9375] (see load_mnist_idx for why
/// not [0,1]).
Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path);

/// Appends `extra` i.i.d. standard-normal columns with provenance 0.
Dataset augment_gaussian(const Dataset& d, std::size_t extra, std::uint64_t seed);

/// Rows restricted to the given classes; with relabel, classes map to
/// 0..k-1 in ascending original order.
Dataset filter_classes(const Dataset& d, const std::vector<int>& classes, bool relabel);

/// Seeded-shuffle row partition. Fractions are taken over total rows,
/// rounded down, minimum 1. Both sides must end up nonempty.
std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& spec);

/// Keeps only the given feature columns, in the given order.
Dataset select_columns(const Dataset& d, const std::vector<std::size_t>& cols);

/// First min(count, size) rows; count 0 means all rows.
Dataset head_rows(const Dataset& d, std::size_t count);

/// Debug CSV: header f0..f{P-1},target then one row per sample.
void write_dataset_csv(const Dataset& d, const std::string& path);

}  // namespace lml
