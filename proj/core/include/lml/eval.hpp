#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lml/data.hpp"
#include "lml/tensor.hpp"

namespace lml {

// Per-feature selection scores plus ground truth (1 = truly relevant).
struct AucInput {
  Vector scores;
  std::vector<std::uint8_t> truth;
};

/// Probability that a uniformly random (relevant, irrelevant) pair is ordered
/// correctly by score; ties earn 0.5. Computed with Mann-Whitney average
/// ranks. Throws if the truth vector is single-class.
double auc(const AucInput& input);
double auc(const Vector& scores, const std::vector<std::uint8_t>& truth);

/// Fraction of exact label matches.
double accuracy(const std::vector<int>& predicted, const std::vector<int>& actual);

/// Fisher score per feature: sum_c n_c (mu_cj - mu_j)^2 over
/// (sum_c n_c var_cj + 1e-12), population variance. Throws on a single class.
Vector fisher_score(const Matrix& features, const std::vector<int>& labels);

struct ForestConfig {
  std::size_t n_trees = 100;
  bool bootstrap = true;
  std::uint64_t seed = 0;
  // Candidate features per node follow the fixed rule floor(sqrt(d)), min 1.
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<std::size_t> class_counts;  // leaves only; never all-zero
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct RandomForest {
  std::vector<Tree> trees;
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
};

/// 1 - sum_c p_c^2 over the counts; 0 for a pure node, 0.5 for balanced binary.
double gini_impurity(const std::vector<std::size_t>& class_counts);

/// CART trees on bootstrap samples (when enabled), Gini splits at midpoints
/// between consecutive distinct values, floor(sqrt(d)) candidate features per
/// node, grown until pure or fewer than 2 samples. Per-tree seeds are drawn
/// up front from cfg.seed, so tree construction order cannot leak randomness
/// across trees.
RandomForest rf_train(const Matrix& features, const std::vector<int>& labels,
                      const ForestConfig& cfg);

/// Majority vote over trees; vote ties resolve to the lowest class index.
int rf_predict(const RandomForest& forest, const Vector& x);

std::vector<int> rf_predict_all(const RandomForest& forest, const Matrix& features);

/// The select-then-retrain protocol: mask both sets to the selected columns,
/// train a forest on the masked training set, return masked-test accuracy.
double select_retrain_evaluate(const Dataset& train, const Dataset& test,
                               const std::vector<std::size_t>& selected,
                               const ForestConfig& cfg);

}  // namespace lml
