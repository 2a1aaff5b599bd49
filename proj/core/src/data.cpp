#include "lml/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include "lml/errors.hpp"

namespace lml {

void validate(const Dataset& d) {
  const std::size_t n = d.features.rows;
  if (d.features.data.size() != d.features.rows * d.features.cols) {
    throw std::invalid_argument("dataset: matrix storage size mismatch");
  }
  if (d.is_classification()) {
    if (d.labels.size() != n) throw std::invalid_argument("dataset: label count != rows");
    if (!d.targets.empty()) {
      throw std::invalid_argument("dataset: both targets and labels present");
    }
  } else if (d.targets.size() != n) {
    throw std::invalid_argument("dataset: target count != rows");
  }
  if (d.provenance.size() != d.features.cols) {
    throw std::invalid_argument("dataset: provenance length != columns");
  }
  if (!all_finite(d.features.data) || !all_finite(d.targets)) {
    throw std::invalid_argument("dataset: non-finite entries");
  }
}

double synth_target(const Vector& x) {
  if (x.size() < 3) throw std::invalid_argument("synth_target: needs >= 3 coordinates");
  return std::sin(x[0]) * std::exp(-x[1]) + (x[2] - 0.2) * (x[2] - 0.2);
}

Dataset make_synthetic(std::size_t n, std::size_t p, std::uint64_t seed) {
  if (p < 3) throw std::invalid_argument("make_synthetic: p must be >= 3");
  if (n < 1) throw std::invalid_argument("make_synthetic: n must be >= 1");
  Rng rng(seed);
  Dataset d;
  d.name = "synthetic";
  d.features = Matrix(n, p);
  d.targets.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = d.features.row(i);
    for (std::size_t j = 0; j < p; ++j) row[j] = rng.normal();
    d.targets[i] = synth_target(Vector(row, row + p));
  }
  d.provenance.assign(p, 0);
  d.provenance[0] = d.provenance[1] = d.provenance[2] = 1;
  validate(d);
  return d;
}

namespace {

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>());
}

std::uint32_t read_be32(const std::vector<unsigned char>& buf, std::size_t offset,
                        const std::string& path) {
  if (offset + 4 > buf.size()) {
    throw DataError(path + ": truncated, need 4 bytes at offset " +
                    std::to_string(offset) + " but file ends at " +
                    std::to_string(buf.size()));
  }
  return (std::uint32_t(buf[offset]) << 24) | (std::uint32_t(buf[offset + 1]) << 16) |
         (std::uint32_t(buf[offset + 2]) << 8) | std::uint32_t(buf[offset + 3]);
}

}  // namespace

Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
  const auto img = read_file(images_path);
  const auto lab = read_file(labels_path);

  const std::uint32_t img_magic = read_be32(img, 0, images_path);
  if (img_magic != 2051) {
    throw DataError(images_path + ": expected image magic 2051 at offset 0, got " +
                    std::to_string(img_magic));
  }
  const std::uint32_t lab_magic = read_be32(lab, 0, labels_path);
  if (lab_magic != 2049) {
    throw DataError(labels_path + ": expected label magic 2049 at offset 0, got " +
                    std::to_string(lab_magic));
  }
  const std::uint32_t n_images = read_be32(img, 4, images_path);
  const std::uint32_t n_rows = read_be32(img, 8, images_path);
  const std::uint32_t n_cols = read_be32(img, 12, images_path);
  const std::uint32_t n_labels = read_be32(lab, 4, labels_path);
  if (n_images != n_labels) {
    throw DataError("image/label count mismatch: " + images_path + " declares " +
                    std::to_string(n_images) + " items, " + labels_path + " declares " +
                    std::to_string(n_labels));
  }
  const std::size_t pixels = std::size_t(n_rows) * n_cols;
  const std::size_t need_img = 16 + std::size_t(n_images) * pixels;
  if (img.size() < need_img) {
    throw DataError(images_path + ": truncated, need " + std::to_string(need_img) +
                    " bytes but file ends at " + std::to_string(img.size()));
  }
  const std::size_t need_lab = 8 + n_labels;
  if (lab.size() < need_lab) {
    throw DataError(labels_path + ": truncated, need " + std::to_string(need_lab) +
                    " bytes but file ends at " + std::to_string(lab.size()));
  }

  Dataset d;
  d.name = images_path;
  d.features = Matrix(n_images, pixels);
  d.labels.resize(n_images);
  for (std::size_t i = 0; i < n_images; ++i) {
    const unsigned char* src = img.data() + 16 + i * pixels;
    double* dst = d.features.row(i);
    // Bytes are scaled by 1/16 (range [0, ~16]) rather than to [0,1]: the
    // augmentation pipelines mix pixels with unit-variance Gaussian columns,
    // and L1-driven selection needs pixel gradients to outweigh the noise
    // columns' or the noise survives pruning instead of the digits. Raw bytes
    // overshoot the other way (saturated softmax).
    for (std::size_t j = 0; j < pixels; ++j) dst[j] = src[j] / 16.0;
    d.labels[i] = lab[8 + i];
  }
  d.provenance.assign(pixels, 1);
  validate(d);
  return d;
}

Dataset augment_gaussian(const Dataset& d, std::size_t extra, std::uint64_t seed) {
  validate(d);
  if (extra == 0) return d;
  Rng rng(seed);
  Dataset out;
  out.name = d.name;
  out.targets = d.targets;
  out.labels = d.labels;
  out.features = Matrix(d.features.rows, d.features.cols + extra);
  for (std::size_t i = 0; i < d.features.rows; ++i) {
    const double* src = d.features.row(i);
    double* dst = out.features.row(i);
    std::copy(src, src + d.features.cols, dst);
    for (std::size_t j = 0; j < extra; ++j) dst[d.features.cols + j] = rng.normal();
  }
  out.provenance = d.provenance;
  out.provenance.resize(d.features.cols + extra, 0);
  validate(out);
  return out;
}

Dataset filter_classes(const Dataset& d, const std::vector<int>& classes, bool relabel) {
  if (!d.is_classification()) {
    throw std::invalid_argument("filter_classes: dataset has no labels");
  }
  if (classes.empty()) throw std::invalid_argument("filter_classes: empty class set");
  const std::set<int> keep(classes.begin(), classes.end());

  std::vector<int> sorted_classes(keep.begin(), keep.end());
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (keep.count(d.labels[i])) rows.push_back(i);
  }
  if (rows.empty()) {
    throw std::invalid_argument("filter_classes: no rows match the class set");
  }

  Dataset out;
  out.name = d.name;
  out.features = Matrix(rows.size(), d.features.cols);
  out.labels.resize(rows.size());
  out.provenance = d.provenance;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double* src = d.features.row(rows[i]);
    std::copy(src, src + d.features.cols, out.features.row(i));
    int label = d.labels[rows[i]];
    if (relabel) {
      label = static_cast<int>(std::lower_bound(sorted_classes.begin(),
                                                sorted_classes.end(), label) -
                               sorted_classes.begin());
    }
    out.labels[i] = label;
  }
  validate(out);
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& spec) {
  validate(d);
  const std::size_t n = d.size();
  std::size_t train_count = spec.train_count;
  if (train_count != 0 && spec.train_fraction != 0.0) {
    throw std::invalid_argument("split: set train_count or train_fraction, not both");
  }
  if (train_count == 0) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
      throw std::invalid_argument("split: need train_count >= 1 or fraction in (0,1)");
    }
    train_count = std::max<std::size_t>(
        1, static_cast<std::size_t>(spec.train_fraction * static_cast<double>(n)));
  }
  if (train_count >= n) {
    throw std::invalid_argument("split: train side (" + std::to_string(train_count) +
                                ") leaves empty test side of " + std::to_string(n) +
                                " rows");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(spec.seed);
  shuffle(order, rng);

  auto take = [&](std::size_t begin, std::size_t end) {
    Dataset part;
    part.name = d.name;
    part.features = Matrix(end - begin, d.features.cols);
    part.provenance = d.provenance;
    if (d.is_classification()) {
      part.labels.resize(end - begin);
    } else {
      part.targets.resize(end - begin);
    }
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t r = order[i];
      const double* src = d.features.row(r);
      std::copy(src, src + d.features.cols, part.features.row(i - begin));
      if (d.is_classification()) {
        part.labels[i - begin] = d.labels[r];
      } else {
        part.targets[i - begin] = d.targets[r];
      }
    }
    return part;
  };

  return {take(0, train_count), take(train_count, n)};
}

Dataset select_columns(const Dataset& d, const std::vector<std::size_t>& cols) {
  if (cols.empty()) throw std::invalid_argument("select_columns: empty column set");
  for (std::size_t c : cols) {
    if (c >= d.dim()) {
      throw std::invalid_argument("select_columns: column " + std::to_string(c) +
                                  " out of range for " + std::to_string(d.dim()) +
                                  " features");
    }
  }
  Dataset out;
  out.name = d.name;
  out.targets = d.targets;
  out.labels = d.labels;
  out.features = Matrix(d.size(), cols.size());
  out.provenance.resize(cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) out.provenance[j] = d.provenance[cols[j]];
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double* src = d.features.row(i);
    double* dst = out.features.row(i);
    for (std::size_t j = 0; j < cols.size(); ++j) dst[j] = src[cols[j]];
  }
  return out;
}

Dataset head_rows(const Dataset& d, std::size_t count) {
  if (count == 0 || count >= d.size()) return d;
  Dataset out;
  out.name = d.name;
  out.provenance = d.provenance;
  out.features = Matrix(count, d.dim());
  std::copy(d.features.data.begin(),
            d.features.data.begin() + static_cast<std::ptrdiff_t>(count * d.dim()),
            out.features.data.begin());
  if (d.is_classification()) {
    out.labels.assign(d.labels.begin(), d.labels.begin() + static_cast<std::ptrdiff_t>(count));
  } else {
    out.targets.assign(d.targets.begin(),
                       d.targets.begin() + static_cast<std::ptrdiff_t>(count));
  }
  return out;
}

void write_dataset_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  for (std::size_t j = 0; j < d.dim(); ++j) out << "f" << j << ",";
  out << "target\n";
  char buf[32];
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double* row = d.features.row(i);
    for (std::size_t j = 0; j < d.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", row[j]);
      out << buf << ",";
    }
    if (d.is_classification()) {
      out << d.labels[i];
    } else {
      std::snprintf(buf, sizeof buf, "%.17g", d.targets[i]);
      out << buf;
    }
    out << "\n";
  }
}

}  // namespace lml
