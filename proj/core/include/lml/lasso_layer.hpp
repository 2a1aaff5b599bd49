#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lml/nn.hpp"
#include "lml/tensor.hpp"

namespace lml {

// One-to-one weighted layer: y = sigma_out(w ⊙ sigma_in(x)). No bias.
// Trained under an L1 penalty, the weights act as per-feature switches.
struct LassoLayer {
  Vector w;
  Activation sigma_in = Activation::identity;
  Activation sigma_out = Activation::identity;

  std::size_t dim() const { return w.size(); }
};

/// Weights start at 1.0 so every feature initially passes and the L1 term
/// prunes from there.
LassoLayer make_lasso_layer(std::size_t n, Activation sigma_in = Activation::identity,
                            Activation sigma_out = Activation::identity);

// Zero-weight resurrection schedule for early training: while epoch <
// kick_epochs, each zero weight independently becomes +kicked_value or
// -kicked_value (signs equiprobable) with probability kick_probability.
struct KickConfig {
  std::size_t kick_epochs = 0;
  double kick_probability = 0.0;
  double kicked_value = 0.0;
};

// Indicator over the k entries of w with the largest ranking score.
struct FeatureMask {
  std::vector<std::uint8_t> indicator;
  std::size_t k = 0;
};

struct LassoCache {
  Vector input;
  Vector activated_input;  // sigma_in(x)
  Vector pre;              // w ⊙ sigma_in(x)
  Vector output;
};

Vector lasso_forward(const LassoLayer& layer, const Vector& x);
LassoCache lasso_forward_cached(const LassoLayer& layer, const Vector& x);

struct LassoGrads {
  Vector dw;
  Vector dinput;
};

/// Data-loss gradient only; the L1 term is handled by the prox step.
LassoGrads lasso_backward(const LassoLayer& layer, const LassoCache& cache,
                          const Vector& upstream);

void lasso_backward_accumulate(const LassoLayer& layer, const LassoCache& cache,
                               const Vector& upstream, Vector& dw_acc, Vector& dinput);

/// Soft threshold: w_i -> sign(w_i) * max(|w_i| - threshold, 0).
/// Entries with |w_i| <= threshold come out exactly zero.
Vector prox_l1(const Vector& w, double threshold);

Vector kick(const Vector& w, const KickConfig& cfg, std::size_t epoch, Rng& rng);

/// Mask of the k entries with largest |w_i|; ties broken toward lower index.
FeatureMask topk_mask(const Vector& w, std::size_t k);

/// y = sigma_out(indicator ⊙ sigma_in(x)): masked-in features pass at unit
/// weight, the rest are zeroed.
Vector masked_forward(const LassoLayer& layer, const FeatureMask& mask, const Vector& x);

std::size_t count_nonzero(const Vector& w);

}  // namespace lml
