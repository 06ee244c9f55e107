#include "mssl/jacobian.hpp"

#include <stdexcept>

namespace mssl {

Tensor jacobian(const TapeFn& f, const Tensor& x) {
  Tensor point({1, x.size()}, x.storage());
  return jacobians(f, point).front();
}

std::vector<Tensor> jacobians(const TapeFn& f, const Tensor& points) {
  if (points.size() == 0) throw std::invalid_argument("jacobians: no points");
  Tape tape;
  Var in = tape.input(points, true);
  Var out = f(tape, in);
  const std::size_t n_points = points.rows();
  const std::size_t n_in = points.cols();
  const std::size_t n_out = out.cols();
  if (out.rows() != n_points) {
    throw DimensionError("jacobians: map changed the batch size");
  }
  std::vector<Tensor> result(n_points, Tensor({n_out, n_in}));
  Tensor seed({n_points, n_out});
  for (std::size_t i = 0; i < n_out; ++i) {
    for (std::size_t r = 0; r < n_points; ++r) seed(r, i) = 1.0;
    tape.backward(out, seed);
    const Tensor g = tape.grad(in);
    for (std::size_t r = 0; r < n_points; ++r) {
      for (std::size_t j = 0; j < n_in; ++j) result[r](i, j) = g(r, j);
    }
    for (std::size_t r = 0; r < n_points; ++r) seed(r, i) = 0.0;
  }
  return result;
}

Tensor finite_diff_jacobian(const PlainFn& f, const Tensor& x, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("finite_diff_jacobian: eps must be positive");
  Tensor point({1, x.size()}, x.storage());
  const std::size_t n = point.size();
  Tensor probe = point;
  std::size_t m = 0;
  Tensor jac;
  for (std::size_t j = 0; j < n; ++j) {
    probe[j] = point[j] + eps;
    const Tensor plus = f(probe);
    probe[j] = point[j] - eps;
    const Tensor minus = f(probe);
    probe[j] = point[j];
    if (j == 0) {
      m = plus.size();
      jac = Tensor({m, n});
    }
    for (std::size_t i = 0; i < m; ++i) jac(i, j) = (plus[i] - minus[i]) / (2.0 * eps);
  }
  return jac;
}

Tensor evaluate(const TapeFn& f, const Tensor& x) {
  Tape tape;
  return f(tape, tape.constant(x)).value();
}

}  // namespace mssl
