#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "lml/data.hpp"
#include "lml/lasso_layer.hpp"
#include "lml/nn.hpp"

namespace lml {

// LassoLayer followed by a three-layered MLP (one hidden layer, one output
// layer). The LassoLayer gates the raw inputs; the MLP does the nonlinear fit.
struct LassoMLPModel {
  LassoLayer lasso;
  DenseLayer layer1;
  DenseLayer layer2;
  Loss loss = Loss::mean_squared_error;

  std::size_t in_dim() const { return lasso.dim(); }
  std::size_t out_dim() const { return layer2.out_dim(); }
};

struct TrainConfig {
  double lambda = 0.0;          // L1 strength on the LassoLayer weights
  double learning_rate = 0.1;
  std::size_t batch_size = 80;  // clamped to the dataset size
  std::size_t epochs = 100;
  std::size_t hidden_units = 100;
  KickConfig kick;
  std::uint64_t seed = 0;
};

struct EpochStats {
  double objective = 0.0;       // mean data loss + lambda * ||w||_1
  std::size_t nonzero_weights = 0;
};
using TrainHistory = std::vector<EpochStats>;

/// Draw order: layer1 weights, then layer2 weights (LassoLayer weights are
/// deterministic ones).
LassoMLPModel make_lassomlp(std::size_t n_in, std::size_t hidden, std::size_t n_out,
                            Loss loss, Activation out_activation, Rng& rng);

Vector lassomlp_forward(const LassoMLPModel& model, const Vector& x);

struct ModelGrads {
  Vector dlasso_w;
  Matrix dweights1;
  Vector dbias1;
  Matrix dweights2;
  Vector dbias2;
};

/// Data-loss value for one sample plus gradient accumulation into `acc`.
double lassomlp_backprop_accumulate(const LassoMLPModel& model, const Vector& x,
                                    const Vector& target, ModelGrads& acc);

ModelGrads zero_grads(const LassoMLPModel& model);

/// Minibatch SGD on all parameters using the data-loss gradient, followed by
/// an L1 prox step (threshold learning_rate * lambda) on the LassoLayer
/// weights; zero weights are kicked at the start of each epoch below
/// kick_epochs. Aborts with a diagnostic if the loss goes non-finite.
std::pair<LassoMLPModel, TrainHistory> train_lassomlp(const Dataset& data,
                                                      const TrainConfig& cfg);

/// Same loop, but on a caller-constructed model (the model's loss determines
/// the objective; `rng` drives shuffling and kicks). Lets callers customize
/// initialization or resume training.
TrainHistory train_lassomlp_inplace(LassoMLPModel& model, const Dataset& data,
                                    const TrainConfig& cfg, Rng& rng);

struct PredictMode {
  enum class Kind { raw, topk };
  Kind kind = Kind::raw;
  std::size_t k = 0;

  static PredictMode raw() { return {}; }
  static PredictMode topk(std::size_t k) { return {Kind::topk, k}; }
};

/// Raw mode runs the trained weights; topk mode replaces them by the
/// indicator over the k largest-|w| entries.
Vector predict(const LassoMLPModel& model, const Vector& x, const PredictMode& mode);

/// Lowest index wins ties.
std::size_t argmax(const Vector& v);

// Plain L1-penalized linear regression trained with the same SGD+prox engine.
struct LinearLassoModel {
  Vector w;
  double b = 0.0;
};

LinearLassoModel train_linear_lasso(const Dataset& data, double lambda, double lr,
                                    std::size_t epochs, std::size_t batch_size,
                                    std::uint64_t seed);

double linear_predict(const LinearLassoModel& model, const Vector& x);

// Per-feature selection scores |w_i| and the chosen top-k index set.
struct FeatureReport {
  Vector scores;
  std::vector<std::size_t> selected;  // ascending indices
  bool degenerate = false;            // all scores exactly zero
  long long genuine_selected = -1;    // filled when provenance is supplied
  long long noise_selected = -1;
};

FeatureReport select_features(const Vector& weights, std::size_t k,
                              const std::vector<std::uint8_t>* provenance = nullptr);
FeatureReport select_features(const LassoMLPModel& model, std::size_t k,
                              const std::vector<std::uint8_t>* provenance = nullptr);
FeatureReport select_features(const LinearLassoModel& model, std::size_t k,
                              const std::vector<std::uint8_t>* provenance = nullptr);

// Parameter arrays of a model, for gradient checking and serialization.
struct ParamBlock {
  const char* name;
  double* data;
  std::size_t size;
};
std::vector<ParamBlock> parameter_blocks(LassoMLPModel& model);

}  // namespace lml
