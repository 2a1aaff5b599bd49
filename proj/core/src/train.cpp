#include "lml/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lml {
namespace {

std::size_t class_count(const Dataset& data) {
  int max_label = 0;
  for (int label : data.labels) max_label = std::max(max_label, label);
  return static_cast<std::size_t>(max_label) + 1;
}

void fill_target(const Dataset& data, std::size_t i, Vector& target) {
  if (data.is_classification()) {
    std::fill(target.begin(), target.end(), 0.0);
    target[static_cast<std::size_t>(data.labels[i])] = 1.0;
  } else {
    target[0] = data.targets[i];
  }
}

void check_finite_params(const LassoMLPModel& model, std::size_t epoch) {
  const Vector* arrays[] = {&model.lasso.w, &model.layer1.weights.data,
                            &model.layer1.bias, &model.layer2.weights.data,
                            &model.layer2.bias};
  for (const Vector* a : arrays) {
    if (!all_finite(*a)) {
      throw std::runtime_error("training diverged: non-finite parameter after epoch " +
                               std::to_string(epoch));
    }
  }
}

}  // namespace

LassoMLPModel make_lassomlp(std::size_t n_in, std::size_t hidden, std::size_t n_out,
                            Loss loss, Activation out_activation, Rng& rng) {
  if (n_in == 0 || hidden == 0 || n_out == 0) {
    throw std::invalid_argument("make_lassomlp: zero-sized layer (n_in=" +
                                std::to_string(n_in) + ", hidden=" + std::to_string(hidden) +
                                ", n_out=" + std::to_string(n_out) + ")");
  }
  LassoMLPModel model;
  model.lasso = make_lasso_layer(n_in, Activation::identity, Activation::identity);
  model.layer1 = make_dense(n_in, hidden, Activation::relu, rng);
  model.layer2 = make_dense(hidden, n_out, out_activation, rng);
  model.loss = loss;
  return model;
}

Vector lassomlp_forward(const LassoMLPModel& model, const Vector& x) {
  Vector h = lasso_forward(model.lasso, x);
  h = dense_forward(model.layer1, h);
  return dense_forward(model.layer2, h);
}

ModelGrads zero_grads(const LassoMLPModel& model) {
  ModelGrads g;
  g.dlasso_w.assign(model.lasso.dim(), 0.0);
  g.dweights1 = Matrix(model.layer1.out_dim(), model.layer1.in_dim());
  g.dbias1.assign(model.layer1.out_dim(), 0.0);
  g.dweights2 = Matrix(model.layer2.out_dim(), model.layer2.in_dim());
  g.dbias2.assign(model.layer2.out_dim(), 0.0);
  return g;
}

double lassomlp_backprop_accumulate(const LassoMLPModel& model, const Vector& x,
                                    const Vector& target, ModelGrads& acc) {
  LassoCache lcache = lasso_forward_cached(model.lasso, x);
  DenseCache c1 = dense_forward_cached(model.layer1, lcache.output);
  DenseCache c2 = dense_forward_cached(model.layer2, c1.output);
  LossResult lr = loss_value_and_grad(model.loss, c2.output, target);

  Vector dh1(model.layer1.out_dim());
  dense_backward_accumulate(model.layer2, c2, lr.grad, acc.dweights2, acc.dbias2, dh1);
  Vector dh0(model.layer1.in_dim());
  dense_backward_accumulate(model.layer1, c1, dh1, acc.dweights1, acc.dbias1, dh0);
  Vector dx(model.lasso.dim());
  lasso_backward_accumulate(model.lasso, lcache, dh0, acc.dlasso_w, dx);
  return lr.value;
}

namespace {

void zero_out(ModelGrads& g) {
  std::fill(g.dlasso_w.begin(), g.dlasso_w.end(), 0.0);
  std::fill(g.dweights1.data.begin(), g.dweights1.data.end(), 0.0);
  std::fill(g.dbias1.begin(), g.dbias1.end(), 0.0);
  std::fill(g.dweights2.data.begin(), g.dweights2.data.end(), 0.0);
  std::fill(g.dbias2.begin(), g.dbias2.end(), 0.0);
}

void axpy(double a, const Vector& x, Vector& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

}  // namespace

TrainHistory train_lassomlp_inplace(LassoMLPModel& model, const Dataset& data,
                                    const TrainConfig& cfg, Rng& rng) {
  validate(data);
  const std::size_t n = data.size();
  if (cfg.epochs == 0) throw std::invalid_argument("train_lassomlp: epochs must be >= 1");
  if (cfg.learning_rate <= 0.0) {
    throw std::invalid_argument("train_lassomlp: learning_rate must be positive");
  }
  if (cfg.lambda < 0.0) throw std::invalid_argument("train_lassomlp: lambda must be >= 0");
  if (cfg.batch_size == 0) throw std::invalid_argument("train_lassomlp: batch_size must be >= 1");
  if (model.in_dim() != data.dim()) {
    throw std::invalid_argument("train_lassomlp: model input dim does not match data");
  }
  if (cfg.kick.kick_epochs > cfg.epochs) {
    std::cerr << "warning: kick_epochs (" << cfg.kick.kick_epochs
              << ") exceeds epochs (" << cfg.epochs
              << "); the kick stays active for the whole run\n";
  }
  const std::size_t batch = std::min(cfg.batch_size, n);
  const std::size_t n_out = model.out_dim();

  ModelGrads grads = zero_grads(model);
  Vector target(n_out, 0.0);
  Vector x;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainHistory history;
  history.reserve(cfg.epochs);
  const double threshold = cfg.learning_rate * cfg.lambda;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    model.lasso.w = kick(model.lasso.w, cfg.kick, epoch, rng);
    shuffle(order, rng);

    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += batch, ++batch_index) {
      const std::size_t stop = std::min(start + batch, n);
      zero_out(grads);
      double batch_loss = 0.0;
      for (std::size_t pos = start; pos < stop; ++pos) {
        const std::size_t i = order[pos];
        fill_target(data, i, target);
        x.assign(data.features.row(i), data.features.row(i) + data.dim());
        batch_loss += lassomlp_backprop_accumulate(model, x, target, grads);
      }
      if (!std::isfinite(batch_loss)) {
        throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                 std::to_string(epoch) + ", batch " +
                                 std::to_string(batch_index));
      }
      epoch_loss += batch_loss;

      const double step = -cfg.learning_rate / static_cast<double>(stop - start);
      axpy(step, grads.dlasso_w, model.lasso.w);
      axpy(step, grads.dweights1.data, model.layer1.weights.data);
      axpy(step, grads.dbias1, model.layer1.bias);
      axpy(step, grads.dweights2.data, model.layer2.weights.data);
      axpy(step, grads.dbias2, model.layer2.bias);

      model.lasso.w = prox_l1(model.lasso.w, threshold);
    }
    check_finite_params(model, epoch);

    double l1 = 0.0;
    for (double w : model.lasso.w) l1 += std::abs(w);
    history.push_back({epoch_loss / static_cast<double>(n) + cfg.lambda * l1,
                       count_nonzero(model.lasso.w)});
  }
  return history;
}

std::pair<LassoMLPModel, TrainHistory> train_lassomlp(const Dataset& data,
                                                      const TrainConfig& cfg) {
  validate(data);
  Rng rng(cfg.seed);
  const bool classify = data.is_classification();
  const std::size_t n_out = classify ? class_count(data) : 1;
  const Loss loss = classify ? Loss::cross_entropy : Loss::mean_squared_error;
  const Activation out_act = classify ? Activation::softmax : Activation::identity;
  LassoMLPModel model = make_lassomlp(data.dim(), cfg.hidden_units, n_out, loss, out_act, rng);
  TrainHistory history = train_lassomlp_inplace(model, data, cfg, rng);
  return {std::move(model), std::move(history)};
}

Vector predict(const LassoMLPModel& model, const Vector& x, const PredictMode& mode) {
  if (mode.kind == PredictMode::Kind::raw) return lassomlp_forward(model, x);
  FeatureMask mask = topk_mask(model.lasso.w, mode.k);
  Vector h = masked_forward(model.lasso, mask, x);
  h = dense_forward(model.layer1, h);
  return dense_forward(model.layer2, h);
}

std::size_t argmax(const Vector& v) {
  if (v.empty()) throw std::invalid_argument("argmax: empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

LinearLassoModel train_linear_lasso(const Dataset& data, double lambda, double lr,
                                    std::size_t epochs, std::size_t batch_size,
                                    std::uint64_t seed) {
  validate(data);
  if (data.is_classification()) {
    throw std::invalid_argument("train_linear_lasso: regression targets required");
  }
  if (epochs == 0) throw std::invalid_argument("train_linear_lasso: epochs must be >= 1");
  if (lr <= 0.0) throw std::invalid_argument("train_linear_lasso: learning_rate must be positive");
  if (lambda < 0.0) throw std::invalid_argument("train_linear_lasso: lambda must be >= 0");
  if (batch_size == 0) throw std::invalid_argument("train_linear_lasso: batch_size must be >= 1");

  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  const std::size_t batch = std::min(batch_size, n);
  const double threshold = lr * lambda;

  Rng rng(seed);
  LinearLassoModel model;
  model.w.assign(d, 0.0);
  model.b = 0.0;

  Vector dw(d, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    shuffle(order, rng);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(start + batch, n);
      std::fill(dw.begin(), dw.end(), 0.0);
      double db = 0.0;
      double batch_loss = 0.0;
      for (std::size_t pos = start; pos < stop; ++pos) {
        const std::size_t i = order[pos];
        const double* x = data.features.row(i);
        double pred = model.b;
        for (std::size_t j = 0; j < d; ++j) pred += model.w[j] * x[j];
        const double resid = pred - data.targets[i];
        batch_loss += resid * resid;
        // MSE over a single output entry: d/dpred = 2 * resid.
        const double g = 2.0 * resid;
        for (std::size_t j = 0; j < d; ++j) dw[j] += g * x[j];
        db += g;
      }
      if (!std::isfinite(batch_loss)) {
        throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                 std::to_string(epoch));
      }
      const double step = -lr / static_cast<double>(stop - start);
      axpy(step, dw, model.w);
      model.b += step * db;
      model.w = prox_l1(model.w, threshold);
    }
  }
  return model;
}

double linear_predict(const LinearLassoModel& model, const Vector& x) {
  if (x.size() != model.w.size()) {
    throw std::invalid_argument("linear_predict: dimension mismatch (" +
                                std::to_string(x.size()) + " vs " +
                                std::to_string(model.w.size()) + ")");
  }
  return model.b + dot(model.w, x);
}

FeatureReport select_features(const Vector& weights, std::size_t k,
                              const std::vector<std::uint8_t>* provenance) {
  if (provenance != nullptr && provenance->size() != weights.size()) {
    throw std::invalid_argument("select_features: provenance size mismatch");
  }
  FeatureReport report;
  report.scores.resize(weights.size());
  bool any_nonzero = false;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    report.scores[i] = std::abs(weights[i]);
    if (report.scores[i] != 0.0) any_nonzero = true;
  }
  report.degenerate = !any_nonzero;

  FeatureMask mask = topk_mask(weights, k);
  report.selected.reserve(mask.k);
  for (std::size_t i = 0; i < mask.indicator.size(); ++i) {
    if (mask.indicator[i]) report.selected.push_back(i);
  }
  if (provenance != nullptr) {
    long long genuine = 0;
    long long noise = 0;
    for (std::size_t i : report.selected) {
      if ((*provenance)[i]) {
        ++genuine;
      } else {
        ++noise;
      }
    }
    report.genuine_selected = genuine;
    report.noise_selected = noise;
  }
  return report;
}

FeatureReport select_features(const LassoMLPModel& model, std::size_t k,
                              const std::vector<std::uint8_t>* provenance) {
  return select_features(model.lasso.w, k, provenance);
}

FeatureReport select_features(const LinearLassoModel& model, std::size_t k,
                              const std::vector<std::uint8_t>* provenance) {
  return select_features(model.w, k, provenance);
}

std::vector<ParamBlock> parameter_blocks(LassoMLPModel& model) {
  return {
      {"lasso.w", model.lasso.w.data(), model.lasso.w.size()},
      {"layer1.weights", model.layer1.weights.data.data(), model.layer1.weights.data.size()},
      {"layer1.bias", model.layer1.bias.data(), model.layer1.bias.size()},
      {"layer2.weights", model.layer2.weights.data.data(), model.layer2.weights.data.size()},
      {"layer2.bias", model.layer2.bias.data(), model.layer2.bias.size()},
  };
}

}  // namespace lml
