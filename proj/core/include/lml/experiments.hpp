#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lml/result_csv.hpp"
#include "lml/train.hpp"

namespace lml {

// Flat experiment configuration. Defaults come from default_config(); a
// key = value config file and command-line overrides refine them.
struct ExperimentConfig {
  std::string experiment;  // synthetic-auc | mnist-fs | mnist-gen | gradcheck
  bool paper_scale = false;
  bool no_timing = false;

  std::vector<std::uint64_t> seeds;
  std::vector<std::size_t> train_sizes;
  std::vector<std::size_t> feature_counts;  // selected-feature counts k
  std::vector<std::string> tasks;           // digit pairs like "1v7"
  std::vector<std::string> methods;

  // LassoMLP hyperparameters.
  double lambda = 0.0;
  double learning_rate = 0.1;
  std::size_t batch_size = 80;
  std::size_t epochs = 0;      // 0 = auto (targets a fixed number of prox steps)
  long long kick_epochs = -1;  // -1 = auto (epochs / 10)
  double kick_probability = 0.1;
  double kick_delta = 0.1;
  std::size_t hidden_units = 100;

  double linear_lambda = 0.1;  // plain-Lasso baseline

  std::size_t total_features = 256;  // synthetic feature count P
  std::size_t noise_features = 5000; // Gaussian columns appended to MNIST
  std::size_t test_size = 0;         // cap on test rows; 0 = all remaining
  std::size_t n_trees = 100;

  std::string data_dir;   // IDX directory; empty = $LASSOMLP_DATA_DIR or data/mnist
  std::string out_path;   // CSV destination; empty = stdout

  // gradcheck settings.
  std::size_t gradcheck_instances = 20;
  std::size_t gradcheck_max_dim = 16;
  double gradcheck_step = 1e-5;
  double gradcheck_tolerance = 1e-4;
  bool corrupt_gradient = false;  // negative-control hook
};

/// Experiment names also accepted in long form: mnist-feature-selection,
/// mnist-generalization.
std::string canonical_experiment_name(const std::string& name);

ExperimentConfig default_config(const std::string& experiment, bool paper_scale);

/// Applies key = value lines (with # comments); unknown keys are fatal.
void apply_config_file(ExperimentConfig& cfg, const std::string& path);
void apply_config_line(ExperimentConfig& cfg, const std::string& key,
                       const std::string& value);

/// Throws ConfigError with a usage hint when a field is out of range or a
/// method does not belong to the experiment.
void validate_config(const ExperimentConfig& cfg);

/// Resolved directory holding the four MNIST IDX files.
std::string resolve_data_dir(const ExperimentConfig& cfg);

/// Training configuration an experiment uses for a training set of n rows.
/// epochs == 0 resolves to enough epochs for ~3000 prox steps at the
/// effective batch size; kick_epochs == -1 resolves to epochs / 10 (min 1).
TrainConfig make_train_config(const ExperimentConfig& cfg, std::size_t n,
                              std::uint64_t seed);

std::vector<ResultRow> run_synthetic_auc(const ExperimentConfig& cfg);
std::vector<ResultRow> run_mnist_feature_selection(const ExperimentConfig& cfg);
std::vector<ResultRow> run_mnist_generalization(const ExperimentConfig& cfg);

struct GradcheckReport {
  double max_rel_error = 0.0;
  bool ok = false;
  std::vector<std::string> failures;  // offending parameter coordinates
  std::vector<ResultRow> rows;
};

GradcheckReport run_gradcheck(const ExperimentConfig& cfg);

/// Dispatches on cfg.experiment (gradcheck included; its rows are returned
/// and a failed check throws std::runtime_error).
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

}  // namespace lml
