// Microbenchmarks for the training hot path and the metric kernels.
// The dense layer shapes mirror the experiments: 256->100 for the synthetic
// task, 5784->100 for MNIST plus 5000 noise columns.

#include <benchmark/benchmark.h>

#include "lml/data.hpp"
#include "lml/eval.hpp"
#include "lml/lasso_layer.hpp"
#include "lml/nn.hpp"
#include "lml/tensor.hpp"
#include "lml/train.hpp"

namespace {

void BM_DenseForward(benchmark::State& state) {
  const auto in_dim = static_cast<std::size_t>(state.range(0));
  lml::Rng rng(7);
  const lml::DenseLayer layer = lml::make_dense(in_dim, 100, lml::Activation::relu, rng);
  const lml::Vector x = lml::rng_normal(rng, in_dim);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lml::dense_forward(layer, x));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(in_dim) * 100);
}

void BM_ModelBackprop(benchmark::State& state) {
  const auto in_dim = static_cast<std::size_t>(state.range(0));
  lml::Rng rng(7);
  lml::LassoMLPModel model = lml::make_lassomlp(in_dim, 100, 2, lml::Loss::cross_entropy,
                                                lml::Activation::softmax, rng);
  const lml::Vector x = lml::rng_normal(rng, in_dim);
  const lml::Vector target = {1.0, 0.0};
  lml::ModelGrads grads = lml::zero_grads(model);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lml::lassomlp_backprop_accumulate(model, x, target, grads));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(in_dim) * 100 * 3);
}

void BM_ProxL1(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  lml::Rng rng(11);
  const lml::Vector w = lml::rng_normal(rng, dim);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lml::prox_l1(w, 5e-4));
  }
}

void BM_Auc(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  lml::Rng rng(13);
  lml::Vector scores = lml::rng_normal(rng, dim);
  std::vector<std::uint8_t> truth(dim, 0);
  truth[0] = truth[1] = truth[2] = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lml::auc(scores, truth));
  }
}

void BM_FisherScore(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  lml::Rng rng(17);
  lml::Matrix features(200, dim);
  for (double& v : features.data) v = rng.normal();
  std::vector<int> labels(200);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lml::fisher_score(features, labels));
  }
}

void BM_RfTrain(benchmark::State& state) {
  lml::Rng rng(19);
  lml::Matrix features(200, 20);
  std::vector<int> labels(200);
  for (std::size_t i = 0; i < 200; ++i) {
    for (std::size_t j = 0; j < 20; ++j) features(i, j) = rng.normal();
    labels[i] = features(i, 0) > 0.0 ? 1 : 0;
  }
  lml::ForestConfig cfg;
  cfg.n_trees = 25;
  cfg.seed = 3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lml::rf_train(features, labels, cfg));
  }
}

void BM_TrainEpochsSynthetic(benchmark::State& state) {
  const lml::Dataset data = lml::make_synthetic(300, 256, 5);
  lml::TrainConfig cfg;
  cfg.lambda = 1e-4;
  cfg.batch_size = 80;
  cfg.epochs = static_cast<std::size_t>(state.range(0));
  cfg.hidden_units = 100;
  cfg.kick.kick_epochs = 0;
  cfg.seed = 5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lml::train_lassomlp(data, cfg));
  }
}

BENCHMARK(BM_DenseForward)->Arg(256)->Arg(5784);
BENCHMARK(BM_ModelBackprop)->Arg(256)->Arg(5784);
BENCHMARK(BM_ProxL1)->Arg(5784);
BENCHMARK(BM_Auc)->Arg(256)->Arg(5784);
BENCHMARK(BM_FisherScore)->Arg(256);
BENCHMARK(BM_RfTrain);
BENCHMARK(BM_TrainEpochsSynthetic)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
