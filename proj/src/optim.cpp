#include "mssl/optim.hpp"

#include <cmath>

namespace mssl {

void adam_step(ParamStore& params, std::span<const double> grads, AdamState& state,
               const AdamConfig& config) {
  const std::size_t n = params.num_scalars();
  if (grads.size() != n) {
    throw DimensionError("adam: " + std::to_string(grads.size()) + " gradients for " +
                         std::to_string(n) + " parameters");
  }
  if (state.m.empty()) {
    state.m.assign(n, 0.0);
    state.v.assign(n, 0.0);
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  std::size_t k = 0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (double& theta : params[p].value.storage()) {
      const double g = grads[k];
      state.m[k] = config.beta1 * state.m[k] + (1.0 - config.beta1) * g;
      state.v[k] = config.beta2 * state.v[k] + (1.0 - config.beta2) * g * g;
      theta -= config.lr * (state.m[k] / c1) / (std::sqrt(state.v[k] / c2) + config.epsilon);
      ++k;
    }
  }
}

}  // namespace mssl
