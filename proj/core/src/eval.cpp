#include "lml/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lml {

double auc(const AucInput& input) {
  const Vector& scores = input.scores;
  const std::vector<std::uint8_t>& truth = input.truth;
  if (scores.size() != truth.size()) {
    throw std::invalid_argument("auc: scores/truth lengths differ (" +
                                std::to_string(scores.size()) + " vs " +
                                std::to_string(truth.size()) + ")");
  }
  std::size_t n1 = 0;
  for (std::uint8_t t : truth) n1 += (t != 0);
  const std::size_t n0 = truth.size() - n1;
  if (n1 == 0 || n0 == 0) {
    throw std::invalid_argument("auc: truth must contain both classes (got " +
                                std::to_string(n1) + " positives of " +
                                std::to_string(truth.size()) + ")");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Mann-Whitney with average ranks for ties; ranks are 1-based.
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = static_cast<double>(i + j) / 2.0 + 1.0;
    for (std::size_t p = i; p <= j; ++p) {
      if (truth[order[p]]) positive_rank_sum += avg_rank;
    }
    i = j + 1;
  }
  const double u = positive_rank_sum -
                   static_cast<double>(n1) * static_cast<double>(n1 + 1) / 2.0;
  return u / (static_cast<double>(n1) * static_cast<double>(n0));
}

double auc(const Vector& scores, const std::vector<std::uint8_t>& truth) {
  return auc(AucInput{scores, truth});
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& actual) {
  if (predicted.size() != actual.size() || predicted.empty()) {
    throw std::invalid_argument("accuracy: need equal nonempty label vectors (" +
                                std::to_string(predicted.size()) + " vs " +
                                std::to_string(actual.size()) + ")");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += (predicted[i] == actual[i]);
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

Vector fisher_score(const Matrix& features, const std::vector<int>& labels) {
  const std::size_t n = features.rows;
  const std::size_t d = features.cols;
  if (labels.size() != n || n == 0) {
    throw std::invalid_argument("fisher_score: labels/rows mismatch (" +
                                std::to_string(labels.size()) + " vs " +
                                std::to_string(n) + ")");
  }
  std::map<int, std::size_t> slot;
  for (int y : labels) slot.emplace(y, slot.size());
  if (slot.size() < 2) {
    throw std::invalid_argument("fisher_score: need at least 2 classes, got " +
                                std::to_string(slot.size()));
  }
  const std::size_t c_count = slot.size();

  std::vector<double> count(c_count, 0.0);
  Matrix sum(c_count, d);
  Matrix sum_sq(c_count, d);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = slot.at(labels[i]);
    count[c] += 1.0;
    const double* x = features.row(i);
    double* s = sum.row(c);
    double* q = sum_sq.row(c);
    for (std::size_t j = 0; j < d; ++j) {
      s[j] += x[j];
      q[j] += x[j] * x[j];
    }
  }

  constexpr double kEps = 1e-12;
  Vector score(d);
  for (std::size_t j = 0; j < d; ++j) {
    double overall_mean = 0.0;
    for (std::size_t c = 0; c < c_count; ++c) overall_mean += sum(c, j);
    overall_mean /= static_cast<double>(n);

    double between = 0.0;
    double within = 0.0;
    for (std::size_t c = 0; c < c_count; ++c) {
      const double mean_c = sum(c, j) / count[c];
      const double diff = mean_c - overall_mean;
      between += count[c] * diff * diff;
      // Population variance; clamp tiny negative rounding residue.
      const double var_c = std::max(0.0, sum_sq(c, j) / count[c] - mean_c * mean_c);
      within += count[c] * var_c;
    }
    score[j] = between / (within + kEps);
  }
  return score;
}

double gini_impurity(const std::vector<std::size_t>& class_counts) {
  std::size_t total = 0;
  for (std::size_t c : class_counts) total += c;
  if (total == 0) throw std::invalid_argument("gini_impurity: empty node");
  double sum_sq = 0.0;
  for (std::size_t c : class_counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

namespace {

struct TreeBuilder {
  const Matrix& x;
  const std::vector<int>& y;
  std::size_t n_classes;
  std::size_t m_try;
  Rng& rng;
  Tree& tree;
  std::vector<std::size_t> feature_scratch;

  TreeBuilder(const Matrix& x_, const std::vector<int>& y_, std::size_t n_classes_,
              std::size_t m_try_, Rng& rng_, Tree& tree_)
      : x(x_), y(y_), n_classes(n_classes_), m_try(m_try_), rng(rng_), tree(tree_) {
    feature_scratch.resize(x.cols);
    std::iota(feature_scratch.begin(), feature_scratch.end(), 0);
  }

  std::vector<std::size_t> counts_of(const std::vector<std::size_t>& samples) const {
    std::vector<std::size_t> counts(n_classes, 0);
    for (std::size_t i : samples) ++counts[static_cast<std::size_t>(y[i])];
    return counts;
  }

  static bool pure(const std::vector<std::size_t>& counts) {
    std::size_t seen = 0;
    for (std::size_t c : counts) seen += (c > 0);
    return seen <= 1;
  }

  // Weighted Gini sum n_l*g_l + n_r*g_r from class counts (common n divisor
  // dropped; it does not change the argmin).
  static double weighted_gini(const std::vector<std::size_t>& left,
                              const std::vector<std::size_t>& right) {
    double total = 0.0;
    for (const auto* side : {&left, &right}) {
      std::size_t n = 0;
      for (std::size_t c : *side) n += c;
      if (n == 0) continue;
      double sum_sq = 0.0;
      for (std::size_t c : *side) {
        const double p = static_cast<double>(c) / static_cast<double>(n);
        sum_sq += p * p;
      }
      total += static_cast<double>(n) * (1.0 - sum_sq);
    }
    return total;
  }

  int build(std::vector<std::size_t>& samples) {
    std::vector<std::size_t> counts = counts_of(samples);
    if (samples.size() < 2 || pure(counts)) return make_leaf(std::move(counts));

    // Draw m_try candidate features without replacement (partial Fisher-Yates).
    for (std::size_t i = 0; i < m_try; ++i) {
      const std::size_t j = i + rng.below(feature_scratch.size() - i);
      std::swap(feature_scratch[i], feature_scratch[j]);
    }

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = 0.0;
    std::vector<std::size_t> sorted = samples;
    std::vector<std::size_t> left_counts(n_classes), right_counts(n_classes);
    for (std::size_t ci = 0; ci < m_try; ++ci) {
      const std::size_t f = feature_scratch[ci];
      std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        return x(a, f) < x(b, f);
      });
      std::fill(left_counts.begin(), left_counts.end(), 0);
      right_counts = counts;
      for (std::size_t p = 0; p + 1 < sorted.size(); ++p) {
        const std::size_t cls = static_cast<std::size_t>(y[sorted[p]]);
        ++left_counts[cls];
        --right_counts[cls];
        const double v0 = x(sorted[p], f);
        const double v1 = x(sorted[p + 1], f);
        if (v0 == v1) continue;  // threshold only between distinct values
        const double score = weighted_gini(left_counts, right_counts);
        if (best_feature < 0 || score < best_score) {
          best_feature = static_cast<int>(f);
          best_threshold = v0 + (v1 - v0) / 2.0;
          best_score = score;
        }
      }
    }
    // Every candidate was constant across the node: nothing to split on.
    if (best_feature < 0) return make_leaf(std::move(counts));

    std::vector<std::size_t> left, right;
    for (std::size_t i : samples) {
      (x(i, static_cast<std::size_t>(best_feature)) <= best_threshold ? left : right)
          .push_back(i);
    }
    samples.clear();
    samples.shrink_to_fit();

    const int node = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[node].feature = best_feature;
    tree.nodes[node].threshold = best_threshold;
    const int l = build(left);
    const int r = build(right);
    tree.nodes[node].left = l;
    tree.nodes[node].right = r;
    return node;
  }

  int make_leaf(std::vector<std::size_t>&& counts) {
    const int node = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[node].class_counts = std::move(counts);
    return node;
  }
};

int leaf_majority(const TreeNode& leaf) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < leaf.class_counts.size(); ++c) {
    if (leaf.class_counts[c] > leaf.class_counts[best]) best = c;
  }
  return static_cast<int>(best);
}

}  // namespace

RandomForest rf_train(const Matrix& features, const std::vector<int>& labels,
                      const ForestConfig& cfg) {
  const std::size_t n = features.rows;
  const std::size_t d = features.cols;
  if (n == 0 || d == 0) throw std::invalid_argument("rf_train: empty training data");
  if (labels.size() != n) {
    throw std::invalid_argument("rf_train: labels/rows mismatch (" +
                                std::to_string(labels.size()) + " vs " +
                                std::to_string(n) + ")");
  }
  if (cfg.n_trees == 0) throw std::invalid_argument("rf_train: n_trees must be >= 1");
  int max_label = 0;
  for (int label : labels) {
    if (label < 0) throw std::invalid_argument("rf_train: negative class label");
    max_label = std::max(max_label, label);
  }

  RandomForest forest;
  forest.n_features = d;
  forest.n_classes = static_cast<std::size_t>(max_label) + 1;
  forest.trees.resize(cfg.n_trees);

  const std::size_t m_try =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))));

  std::vector<std::uint64_t> tree_seeds(cfg.n_trees);
  Rng forest_rng(cfg.seed);
  for (auto& s : tree_seeds) s = forest_rng.next_u64();

  for (std::size_t t = 0; t < cfg.n_trees; ++t) {
    Rng tree_rng(tree_seeds[t]);
    std::vector<std::size_t> samples(n);
    if (cfg.bootstrap) {
      for (auto& s : samples) s = tree_rng.below(n);
    } else {
      std::iota(samples.begin(), samples.end(), 0);
    }
    TreeBuilder builder(features, labels, forest.n_classes, m_try, tree_rng,
                        forest.trees[t]);
    builder.build(samples);
  }
  return forest;
}

int rf_predict(const RandomForest& forest, const Vector& x) {
  if (x.size() != forest.n_features) {
    throw std::invalid_argument("rf_predict: feature count " + std::to_string(x.size()) +
                                " does not match training dimension " +
                                std::to_string(forest.n_features));
  }
  std::vector<std::size_t> votes(forest.n_classes, 0);
  for (const Tree& tree : forest.trees) {
    int node = 0;
    while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
      const TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
      node = (x[static_cast<std::size_t>(nd.feature)] <= nd.threshold) ? nd.left : nd.right;
    }
    ++votes[static_cast<std::size_t>(
        leaf_majority(tree.nodes[static_cast<std::size_t>(node)]))];
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < votes.size(); ++c) {
    if (votes[c] > votes[best]) best = c;
  }
  return static_cast<int>(best);
}

std::vector<int> rf_predict_all(const RandomForest& forest, const Matrix& features) {
  std::vector<int> out(features.rows);
  Vector x(features.cols);
  for (std::size_t i = 0; i < features.rows; ++i) {
    x.assign(features.row(i), features.row(i) + features.cols);
    out[i] = rf_predict(forest, x);
  }
  return out;
}

double select_retrain_evaluate(const Dataset& train, const Dataset& test,
                               const std::vector<std::size_t>& selected,
                               const ForestConfig& cfg) {
  if (!train.is_classification() || !test.is_classification()) {
    throw std::invalid_argument("select_retrain_evaluate: classification datasets required");
  }
  if (train.dim() != test.dim()) {
    throw std::invalid_argument("select_retrain_evaluate: train/test dims differ (" +
                                std::to_string(train.dim()) + " vs " +
                                std::to_string(test.dim()) + ")");
  }
  if (selected.empty()) {
    throw std::invalid_argument("select_retrain_evaluate: empty feature selection");
  }
  const Dataset masked_train = select_columns(train, selected);
  const Dataset masked_test = select_columns(test, selected);
  const RandomForest forest = rf_train(masked_train.features, masked_train.labels, cfg);
  return accuracy(rf_predict_all(forest, masked_test.features), masked_test.labels);
}

}  // namespace lml
