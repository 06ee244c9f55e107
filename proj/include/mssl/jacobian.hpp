#pragma once

#include <functional>

#include "mssl/tape.hpp"
#include "mssl/tensor.hpp"

namespace mssl {

/// A differentiable map recorded on a tape: takes a (B x n) input node and
/// returns a (B x m) output node, row-wise independent.
using TapeFn = std::function<Var(Tape&, Var)>;
/// Plain evaluation of a map on a (1 x n) point.
using PlainFn = std::function<Tensor(const Tensor&)>;

/// m x n Jacobian at x via one reverse pass per output row.
Tensor jacobian(const TapeFn& f, const Tensor& x);

/// Jacobians at every row of `points` (N x n) from a single batched tape; the
/// result holds N matrices of m x n. Uses m reverse passes in total.
std::vector<Tensor> jacobians(const TapeFn& f, const Tensor& points);

/// Central differences, column j = (f(x + eps e_j) - f(x - eps e_j)) / (2 eps).
Tensor finite_diff_jacobian(const PlainFn& f, const Tensor& x, double eps = 1e-4);

/// Evaluate a tape map on a plain tensor.
Tensor evaluate(const TapeFn& f, const Tensor& x);

}  // namespace mssl
