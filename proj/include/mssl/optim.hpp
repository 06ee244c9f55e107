#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mssl/param_store.hpp"

namespace mssl {

/// Defaults follow the improved-GAN training recipe (lr 3e-4, beta1 0.5).
struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// One bias-corrected Adam update of every scalar in `params`.
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
///   theta <- theta - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
void adam_step(ParamStore& params, std::span<const double> grads, AdamState& state,
               const AdamConfig& config);

}  // namespace mssl
