#include "lml/lasso_layer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lml {

LassoLayer make_lasso_layer(std::size_t n, Activation sigma_in, Activation sigma_out) {
  if (n == 0) throw std::invalid_argument("make_lasso_layer: zero dimension");
  LassoLayer layer;
  layer.w.assign(n, 1.0);
  layer.sigma_in = sigma_in;
  layer.sigma_out = sigma_out;
  return layer;
}

Vector lasso_forward(const LassoLayer& layer, const Vector& x) {
  if (x.size() != layer.dim()) {
    throw std::invalid_argument("lasso_forward: input length " + std::to_string(x.size()) +
                                " != layer dim " + std::to_string(layer.dim()));
  }
  const Vector activated = activate(layer.sigma_in, x);
  return activate(layer.sigma_out, hadamard(layer.w, activated));
}

LassoCache lasso_forward_cached(const LassoLayer& layer, const Vector& x) {
  if (x.size() != layer.dim()) {
    throw std::invalid_argument("lasso_forward_cached: input length mismatch");
  }
  LassoCache cache;
  cache.input = x;
  cache.activated_input = activate(layer.sigma_in, x);
  cache.pre = hadamard(layer.w, cache.activated_input);
  cache.output = activate(layer.sigma_out, cache.pre);
  return cache;
}

void lasso_backward_accumulate(const LassoLayer& layer, const LassoCache& cache,
                               const Vector& upstream, Vector& dw_acc, Vector& dinput) {
  if (upstream.size() != layer.dim()) {
    throw std::invalid_argument("lasso_backward: upstream length " +
                                std::to_string(upstream.size()) + " != layer dim " +
                                std::to_string(layer.dim()));
  }
  if (dw_acc.size() != layer.dim()) {
    throw std::invalid_argument("lasso_backward: accumulator shape mismatch");
  }
  const Vector dpre =
      activate_backward(layer.sigma_out, cache.pre, cache.output, upstream);

  dinput.assign(layer.dim(), 0.0);
  for (std::size_t i = 0; i < layer.dim(); ++i) {
    dw_acc[i] += dpre[i] * cache.activated_input[i];
    dinput[i] = dpre[i] * layer.w[i];
  }
  // Chain through sigma_in for the input gradient.
  dinput = activate_backward(layer.sigma_in, cache.input, cache.activated_input, dinput);
}

LassoGrads lasso_backward(const LassoLayer& layer, const LassoCache& cache,
                          const Vector& upstream) {
  LassoGrads grads;
  grads.dw.assign(layer.dim(), 0.0);
  lasso_backward_accumulate(layer, cache, upstream, grads.dw, grads.dinput);
  return grads;
}

Vector prox_l1(const Vector& w, double threshold) {
  if (threshold < 0.0 || !std::isfinite(threshold)) {
    throw std::invalid_argument("prox_l1: threshold must be finite and >= 0");
  }
  Vector out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double mag = std::abs(w[i]) - threshold;
    out[i] = mag > 0.0 ? (w[i] > 0.0 ? mag : -mag) : 0.0;
  }
  return out;
}

Vector kick(const Vector& w, const KickConfig& cfg, std::size_t epoch, Rng& rng) {
  if (epoch >= cfg.kick_epochs) return w;
  Vector out = w;
  for (auto& v : out) {
    if (v != 0.0) continue;
    if (rng.uniform() < cfg.kick_probability) {
      v = rng.uniform() < 0.5 ? cfg.kicked_value : -cfg.kicked_value;
    }
  }
  return out;
}

FeatureMask topk_mask(const Vector& w, std::size_t k) {
  if (k < 1 || k > w.size()) {
    throw std::invalid_argument("topk_mask: k=" + std::to_string(k) +
                                " out of range [1, " + std::to_string(w.size()) + "]");
  }
  std::vector<std::size_t> order(w.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(w[a]);
    const double mb = std::abs(w[b]);
    if (ma != mb) return ma > mb;
    return a < b;
  });
  FeatureMask mask;
  mask.k = k;
  mask.indicator.assign(w.size(), 0);
  for (std::size_t i = 0; i < k; ++i) mask.indicator[order[i]] = 1;
  return mask;
}

Vector masked_forward(const LassoLayer& layer, const FeatureMask& mask, const Vector& x) {
  if (mask.indicator.size() != layer.dim()) {
    throw std::invalid_argument("masked_forward: mask length mismatch");
  }
  if (x.size() != layer.dim()) {
    throw std::invalid_argument("masked_forward: input length mismatch");
  }
  const Vector activated = activate(layer.sigma_in, x);
  Vector pre(activated.size());
  for (std::size_t i = 0; i < activated.size(); ++i) {
    pre[i] = mask.indicator[i] ? activated[i] : 0.0;
  }
  return activate(layer.sigma_out, pre);
}

std::size_t count_nonzero(const Vector& w) {
  std::size_t n = 0;
  for (double v : w) {
    if (v != 0.0) ++n;
  }
  return n;
}

}  // namespace lml
