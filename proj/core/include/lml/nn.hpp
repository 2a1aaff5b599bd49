#pragma once

#include <cstddef>
#include <string>

#include "lml/tensor.hpp"

namespace lml {

enum class Activation { identity, relu, sigmoid, softmax };
enum class Loss { mean_squared_error, cross_entropy };

std::string to_string(Activation a);
std::string to_string(Loss l);
Activation activation_from_string(const std::string& name);
Loss loss_from_string(const std::string& name);

Vector activate(Activation a, const Vector& pre);

/// Pulls an upstream gradient back through the activation:
/// returns d(loss)/d(pre) given pre-activation, output and d(loss)/d(output).
/// Pointwise kinds use the pointwise derivative (relu'(0) = 0); softmax
/// applies the full Jacobian-vector product.
Vector activate_backward(Activation a, const Vector& pre, const Vector& output,
                         const Vector& upstream);

// Fully connected layer, weights stored out_dim x in_dim row-major.
struct DenseLayer {
  Matrix weights;
  Vector bias;
  Activation activation = Activation::identity;

  std::size_t in_dim() const { return weights.cols; }
  std::size_t out_dim() const { return weights.rows; }
};

/// Uniform weights in [-limit, +limit] with limit = 0.25*sqrt(6/(in+out))
/// (quarter-scale Glorot; see make_dense for why), zero bias.
DenseLayer make_dense(std::size_t in, std::size_t out, Activation act, Rng& rng);

struct DenseCache {
  Vector input;
  Vector pre;
  Vector output;
};

Vector dense_forward(const DenseLayer& layer, const Vector& x);
DenseCache dense_forward_cached(const DenseLayer& layer, const Vector& x);

struct DenseGrads {
  Matrix dweights;
  Vector dbias;
  Vector dinput;
};

DenseGrads dense_backward(const DenseLayer& layer, const DenseCache& cache,
                          const Vector& upstream);

/// Same chain rule as dense_backward, but adds the parameter gradients into
/// caller-owned accumulators and overwrites dinput. dense_backward is a thin
/// wrapper over this; the training loop calls it directly to avoid
/// reallocating a gradient matrix per sample.
void dense_backward_accumulate(const DenseLayer& layer, const DenseCache& cache,
                               const Vector& upstream, Matrix& dweights_acc,
                               Vector& dbias_acc, Vector& dinput);

struct LossResult {
  double value = 0.0;
  Vector grad;
};

/// MSE: mean over entries of squared error. Cross-entropy: -sum t_i log p_i
/// with probabilities clamped at 1e-12 so the value is never NaN.
LossResult loss_value_and_grad(Loss kind, const Vector& prediction, const Vector& target);

}  // namespace lml
