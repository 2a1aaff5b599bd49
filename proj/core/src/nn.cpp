#include "lml/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lml {

namespace {
constexpr double kProbFloor = 1e-12;
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::softmax: return "softmax";
  }
  return "identity";
}

std::string to_string(Loss l) {
  return l == Loss::mean_squared_error ? "mean-squared-error" : "cross-entropy";
}

Activation activation_from_string(const std::string& name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "softmax") return Activation::softmax;
  throw std::invalid_argument("unknown activation: " + name);
}

Loss loss_from_string(const std::string& name) {
  if (name == "mean-squared-error") return Loss::mean_squared_error;
  if (name == "cross-entropy") return Loss::cross_entropy;
  throw std::invalid_argument("unknown loss: " + name);
}

Vector activate(Activation a, const Vector& pre) {
  Vector out(pre.size());
  switch (a) {
    case Activation::identity:
      out = pre;
      break;
    case Activation::relu:
      for (std::size_t i = 0; i < pre.size(); ++i) out[i] = pre[i] > 0.0 ? pre[i] : 0.0;
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < pre.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-pre[i]));
      break;
    case Activation::softmax: {
      const double shift = *std::max_element(pre.begin(), pre.end());
      double sum = 0.0;
      for (std::size_t i = 0; i < pre.size(); ++i) {
        out[i] = std::exp(pre[i] - shift);
        sum += out[i];
      }
      for (auto& v : out) v /= sum;
      break;
    }
  }
  return out;
}

Vector activate_backward(Activation a, const Vector& pre, const Vector& output,
                         const Vector& upstream) {
  if (pre.size() != upstream.size()) {
    throw std::invalid_argument("activate_backward: upstream length mismatch");
  }
  Vector dpre(pre.size());
  switch (a) {
    case Activation::identity:
      dpre = upstream;
      break;
    case Activation::relu:
      for (std::size_t i = 0; i < pre.size(); ++i)
        dpre[i] = pre[i] > 0.0 ? upstream[i] : 0.0;
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < pre.size(); ++i)
        dpre[i] = upstream[i] * output[i] * (1.0 - output[i]);
      break;
    case Activation::softmax: {
      const double weighted = dot(output, upstream);
      for (std::size_t i = 0; i < pre.size(); ++i)
        dpre[i] = output[i] * (upstream[i] - weighted);
      break;
    }
  }
  return dpre;
}

DenseLayer make_dense(std::size_t in, std::size_t out, Activation act, Rng& rng) {
  if (in == 0 || out == 0) throw std::invalid_argument("make_dense: zero dimension");
  DenseLayer layer;
  layer.weights = Matrix(out, in);
  layer.bias = Vector(out, 0.0);
  layer.activation = act;
  // Quarter-scale Glorot. Full-scale Glorot starts the dense trunk expressive
  // enough that it absorbs feature contrasts the one-to-one layer should carry,
  // which blurs the |w| ranking; a 4x smaller range keeps early training
  // gradient-driven through w and measurably sharpens selection.
  const double limit = 0.25 * std::sqrt(6.0 / static_cast<double>(in + out));
  for (auto& w : layer.weights.data) w = (rng.uniform() * 2.0 - 1.0) * limit;
  return layer;
}

Vector dense_forward(const DenseLayer& layer, const Vector& x) {
  if (x.size() != layer.in_dim()) {
    throw std::invalid_argument("dense_forward: input length " + std::to_string(x.size()) +
                                " != layer in-dim " + std::to_string(layer.in_dim()));
  }
  Vector pre = matvec(layer.weights, x);
  for (std::size_t i = 0; i < pre.size(); ++i) pre[i] += layer.bias[i];
  return activate(layer.activation, pre);
}

DenseCache dense_forward_cached(const DenseLayer& layer, const Vector& x) {
  if (x.size() != layer.in_dim()) {
    throw std::invalid_argument("dense_forward_cached: input length mismatch");
  }
  DenseCache cache;
  cache.input = x;
  cache.pre = matvec(layer.weights, x);
  for (std::size_t i = 0; i < cache.pre.size(); ++i) cache.pre[i] += layer.bias[i];
  cache.output = activate(layer.activation, cache.pre);
  return cache;
}

void dense_backward_accumulate(const DenseLayer& layer, const DenseCache& cache,
                               const Vector& upstream, Matrix& dweights_acc,
                               Vector& dbias_acc, Vector& dinput) {
  if (upstream.size() != layer.out_dim()) {
    throw std::invalid_argument("dense_backward: upstream length " +
                                std::to_string(upstream.size()) + " != layer out-dim " +
                                std::to_string(layer.out_dim()));
  }
  if (dweights_acc.rows != layer.out_dim() || dweights_acc.cols != layer.in_dim() ||
      dbias_acc.size() != layer.out_dim()) {
    throw std::invalid_argument("dense_backward: accumulator shape mismatch");
  }
  const Vector dpre = activate_backward(layer.activation, cache.pre, cache.output, upstream);

  const std::size_t in = layer.in_dim();
  const std::size_t out = layer.out_dim();
  dinput.assign(in, 0.0);
  const double* x = cache.input.data();
  for (std::size_t i = 0; i < out; ++i) {
    const double g = dpre[i];
    dbias_acc[i] += g;
    if (g == 0.0) continue;
    double* dw_row = dweights_acc.row(i);
    const double* w_row = layer.weights.row(i);
    double* dx = dinput.data();
    for (std::size_t j = 0; j < in; ++j) {
      dw_row[j] += g * x[j];
      dx[j] += g * w_row[j];
    }
  }
}

DenseGrads dense_backward(const DenseLayer& layer, const DenseCache& cache,
                          const Vector& upstream) {
  DenseGrads grads;
  grads.dweights = Matrix(layer.out_dim(), layer.in_dim());
  grads.dbias = Vector(layer.out_dim(), 0.0);
  dense_backward_accumulate(layer, cache, upstream, grads.dweights, grads.dbias,
                            grads.dinput);
  return grads;
}

LossResult loss_value_and_grad(Loss kind, const Vector& prediction, const Vector& target) {
  if (prediction.size() != target.size()) {
    throw std::invalid_argument("loss: prediction/target length mismatch");
  }
  if (prediction.empty()) throw std::invalid_argument("loss: empty vectors");
  LossResult res;
  res.grad.assign(prediction.size(), 0.0);
  const double n = static_cast<double>(prediction.size());
  switch (kind) {
    case Loss::mean_squared_error: {
      double acc = 0.0;
      for (std::size_t i = 0; i < prediction.size(); ++i) {
        const double d = prediction[i] - target[i];
        acc += d * d;
        res.grad[i] = 2.0 * d / n;
      }
      res.value = acc / n;
      break;
    }
    case Loss::cross_entropy: {
      double acc = 0.0;
      for (std::size_t i = 0; i < prediction.size(); ++i) {
        if (target[i] == 0.0) continue;
        const double p = prediction[i];
        if (p > kProbFloor) {
          acc -= target[i] * std::log(p);
          res.grad[i] = -target[i] / p;
        } else {
          // Clamped region: the loss value is constant in p there.
          acc -= target[i] * std::log(kProbFloor);
        }
      }
      res.value = acc;
      break;
    }
  }
  return res;
}

}  // namespace lml
