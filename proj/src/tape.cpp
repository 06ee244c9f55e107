#include "mssl/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mssl {

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": shape " + a.shape_string() + " vs " +
                         b.shape_string());
  }
}

void require_same_tape(Var a, Var b) {
  if (a.tape != b.tape) throw ContractError("vars belong to different tapes");
}

Tensor like(const Tensor& t) { return Tensor({t.rows(), t.cols()}); }

double log_sigmoid_value(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

}  // namespace

const Tensor& Var::value() const { return tape->value(id); }

const char* op_name(OpKind op) {
  switch (op) {
    case OpKind::input: return "input";
    case OpKind::param: return "param";
    case OpKind::affine: return "affine";
    case OpKind::weight_norm: return "weight_norm";
    case OpKind::elu: return "elu";
    case OpKind::tanh: return "tanh";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::log_sigmoid: return "log_sigmoid";
    case OpKind::exp: return "exp";
    case OpKind::log: return "log";
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::mul: return "mul";
    case OpKind::scale: return "scale";
    case OpKind::add_scalar: return "add_scalar";
    case OpKind::square: return "square";
    case OpKind::abs: return "abs";
    case OpKind::sum_all: return "sum_all";
    case OpKind::mean_all: return "mean_all";
    case OpKind::sum_cols: return "sum_cols";
    case OpKind::mean_rows: return "mean_rows";
    case OpKind::concat_cols: return "concat_cols";
    case OpKind::slice_cols: return "slice_cols";
    case OpKind::pick_cols: return "pick_cols";
    case OpKind::logsumexp: return "logsumexp";
    case OpKind::softmax: return "softmax";
    case OpKind::row_norm: return "row_norm";
    case OpKind::clamp: return "clamp";
  }
  return "?";
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Var Tape::record(OpKind op, std::vector<std::size_t> inputs, Tensor value, double a,
                 double b, std::vector<std::size_t> indices) {
  Node n;
  n.op = op;
  for (std::size_t id : inputs) n.needs_grad = n.needs_grad || nodes_[id].needs_grad;
  n.inputs = std::move(inputs);
  n.value = std::move(value);
  n.a = a;
  n.b = b;
  n.indices = std::move(indices);
  return push(std::move(n));
}

Var Tape::input(Tensor value, bool requires_grad) {
  Node n;
  n.op = OpKind::input;
  n.value = std::move(value);
  n.needs_grad = requires_grad;
  return push(std::move(n));
}

Var Tape::param(const ParamStore& store, std::size_t index) {
  const auto key = std::make_pair(&store, index);
  if (auto it = bound_.find(key); it != bound_.end()) return Var{this, it->second};
  Node n;
  n.op = OpKind::param;
  n.value = store[index].value;
  n.needs_grad = !frozen_.contains(&store);
  n.store = &store;
  n.param_index = index;
  Var v = push(std::move(n));
  bound_.emplace(key, v.id);
  return v;
}

Var Tape::param(const ParamStore& store, const std::string& name) {
  auto i = store.find(name);
  if (!i) throw std::out_of_range("tape: no parameter " + name);
  return param(store, *i);
}

Tensor& Tape::adjoint(std::size_t id) {
  if (adjoints_[id].size() != nodes_[id].value.size()) adjoints_[id] = like(nodes_[id].value);
  return adjoints_[id];
}

void Tape::backward(Var out) {
  if (out.value().size() != 1) {
    throw ContractError("backward: output node " + std::to_string(out.id) + " has shape " +
                        out.value().shape_string() + ", expected a scalar");
  }
  Tensor seed({out.value().rows(), out.value().cols()}, 1.0);
  backward(out, seed);
}

void Tape::backward(Var out, const Tensor& seed) {
  if (out.tape != this) throw ContractError("backward: var from another tape");
  if (seed.size() != out.value().size()) {
    throw DimensionError("backward: seed " + seed.shape_string() + " vs output " +
                         out.value().shape_string());
  }
  adjoints_.assign(nodes_.size(), Tensor());
  if (!needs(out.id)) return;
  Tensor& root = adjoint(out.id);
  std::copy(seed.storage().begin(), seed.storage().end(), root.storage().begin());
  for (std::size_t i = out.id + 1; i-- > 0;) {
    if (!nodes_[i].needs_grad || adjoints_[i].size() == 0) continue;
    propagate(i);
  }
}

Tensor Tape::grad(Var v) const {
  if (v.id < adjoints_.size() && adjoints_[v.id].size() == nodes_[v.id].value.size()) {
    return adjoints_[v.id];
  }
  return like(nodes_[v.id].value);
}

std::vector<double> Tape::gradient(const ParamStore& store) const {
  std::vector<double> flat(store.num_scalars(), 0.0);
  for (const auto& [key, id] : bound_) {
    if (key.first != &store) continue;
    if (id >= adjoints_.size() || adjoints_[id].size() == 0) continue;
    const std::size_t off = store.offset(key.second);
    const auto& g = adjoints_[id].storage();
    std::copy(g.begin(), g.end(), flat.begin() + static_cast<std::ptrdiff_t>(off));
  }
  return flat;
}

// Accumulates the adjoint of node `id` into its inputs.
void Tape::propagate(std::size_t id) {
  const Node& n = nodes_[id];
  const Tensor& g = adjoints_[id];
  const Tensor& y = n.value;
  auto in = [&](std::size_t k) -> const Tensor& { return nodes_[n.inputs[k]].value; };
  auto want = [&](std::size_t k) { return needs(n.inputs[k]); };
  auto acc = [&](std::size_t k) -> Tensor& { return adjoint(n.inputs[k]); };

  switch (n.op) {
    case OpKind::input:
    case OpKind::param:
      return;

    case OpKind::affine: {
      const Tensor& x = in(0);
      const Tensor& w = in(1);
      const std::size_t batch = x.rows(), nin = x.cols(), nout = w.rows();
      if (want(0)) {
        Tensor& dx = acc(0);
        for (std::size_t r = 0; r < batch; ++r) {
          for (std::size_t i = 0; i < nout; ++i) {
            const double gi = g(r, i);
            for (std::size_t j = 0; j < nin; ++j) dx(r, j) += gi * w(i, j);
          }
        }
      }
      if (want(1)) {
        Tensor& dw = acc(1);
        for (std::size_t r = 0; r < batch; ++r) {
          for (std::size_t i = 0; i < nout; ++i) {
            const double gi = g(r, i);
            for (std::size_t j = 0; j < nin; ++j) dw(i, j) += gi * x(r, j);
          }
        }
      }
      if (want(2)) {
        Tensor& db = acc(2);
        for (std::size_t r = 0; r < batch; ++r) {
          for (std::size_t i = 0; i < nout; ++i) db[i] += g(r, i);
        }
      }
      return;
    }

    case OpKind::weight_norm: {
      // w_ij = s_i v_ij / |v_i|
      const Tensor& v = in(0);
      const Tensor& s = in(1);
      const std::size_t m = v.rows(), k = v.cols();
      for (std::size_t i = 0; i < m; ++i) {
        double norm2 = 0.0;
        for (std::size_t j = 0; j < k; ++j) norm2 += v(i, j) * v(i, j);
        const double norm = std::sqrt(norm2);
        double gv = 0.0;  // sum_j g_ij v_ij
        for (std::size_t j = 0; j < k; ++j) gv += g(i, j) * v(i, j);
        if (want(0)) {
          Tensor& dv = acc(0);
          const double c = s[i] / norm;
          for (std::size_t j = 0; j < k; ++j) {
            dv(i, j) += c * (g(i, j) - gv * v(i, j) / norm2);
          }
        }
        if (want(1)) acc(1)[i] += gv / norm;
      }
      return;
    }

    case OpKind::elu: {
      Tensor& dx = acc(0);
      const Tensor& x = in(0);
      for (std::size_t i = 0; i < y.size(); ++i) {
        dx[i] += g[i] * (x[i] > 0.0 ? 1.0 : y[i] + 1.0);
      }
      return;
    }
    case OpKind::tanh: {
      Tensor& dx = acc(0);
      for (std::size_t i = 0; i < y.size(); ++i) dx[i] += g[i] * (1.0 - y[i] * y[i]);
      return;
    }
    case OpKind::sigmoid: {
      Tensor& dx = acc(0);
      for (std::size_t i = 0; i < y.size(); ++i) dx[i] += g[i] * y[i] * (1.0 - y[i]);
      return;
    }
    case OpKind::log_sigmoid: {
      // d/dx log sigmoid(x) = sigmoid(-x)
      Tensor& dx = acc(0);
      const Tensor& x = in(0);
      for (std::size_t i = 0; i < y.size(); ++i) dx[i] += g[i] / (1.0 + std::exp(x[i]));
      return;
    }
    case OpKind::exp: {
      Tensor& dx = acc(0);
      for (std::size_t i = 0; i < y.size(); ++i) dx[i] += g[i] * y[i];
      return;
    }
    case OpKind::log: {
      Tensor& dx = acc(0);
      const Tensor& x = in(0);
      for (std::size_t i = 0; i < y.size(); ++i) dx[i] += g[i] / x[i];
      return;
    }
    case OpKind::add: {
      for (std::size_t k = 0; k < 2; ++k) {
        if (!want(k)) continue;
        Tensor& d = acc(k);
        for (std::size_t i = 0; i < y.size(); ++i) d[i] += g[i];
      }
      return;
    }
    case OpKind::sub: {
      if (want(0)) {
        Tensor& d = acc(0);
        for (std::size_t i = 0; i < y.size(); ++i) d[i] += g[i];
      }
      if (want(1)) {
        Tensor& d = acc(1);
        for (std::size_t i = 0; i < y.size(); ++i) d[i] -= g[i];
      }
      return;
    }
    case OpKind::mul: {
      if (want(0)) {
        Tensor& d = acc(0);
        const Tensor& other = in(1);
        for (std::size_t i = 0; i < y.size(); ++i) d[i] += g[i] * other[i];
      }
      if (want(1)) {
        Tensor& d = acc(1);
        const Tensor& other = in(0);
        for (std::size_t i = 0; i < y.size(); ++i) d[i] += g[i] * other[i];
      }
      return;
    }
    case OpKind::scale: {
      Tensor& d = acc(0);
      for (std::size_t i = 0; i < y.size(); ++i) d[i] += g[i] * n.a;
      return;
    }
    case OpKind::add_scalar: {
      Tensor& d = acc(0);
      for (std::size_t i = 0; i < y.size(); ++i) d[i] += g[i];
      return;
    }
    case OpKind::square: {
      Tensor& d = acc(0);
      const Tensor& x = in(0);
      for (std::size_t i = 0; i < y.size(); ++i) d[i] += 2.0 * g[i] * x[i];
      return;
    }
    case OpKind::abs: {
      Tensor& d = acc(0);
      const Tensor& x = in(0);
      for (std::size_t i = 0; i < y.size(); ++i) {
        d[i] += x[i] > 0.0 ? g[i] : (x[i] < 0.0 ? -g[i] : 0.0);
      }
      return;
    }
    case OpKind::sum_all:
    case OpKind::mean_all: {
      Tensor& d = acc(0);
      const double c = n.op == OpKind::sum_all ? g[0] : g[0] / static_cast<double>(d.size());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += c;
      return;
    }
    case OpKind::sum_cols: {
      Tensor& d = acc(0);
      for (std::size_t r = 0; r < d.rows(); ++r) {
        for (std::size_t c = 0; c < d.cols(); ++c) d(r, c) += g[r];
      }
      return;
    }
    case OpKind::mean_rows: {
      Tensor& d = acc(0);
      const double inv = 1.0 / static_cast<double>(d.rows());
      for (std::size_t r = 0; r < d.rows(); ++r) {
        for (std::size_t c = 0; c < d.cols(); ++c) d(r, c) += g[c] * inv;
      }
      return;
    }
    case OpKind::concat_cols: {
      const std::size_t left = in(0).cols();
      const std::size_t right = in(1).cols();
      if (want(0)) {
        Tensor& d = acc(0);
        for (std::size_t r = 0; r < y.rows(); ++r) {
          for (std::size_t c = 0; c < left; ++c) d(r, c) += g(r, c);
        }
      }
      if (want(1)) {
        Tensor& d = acc(1);
        for (std::size_t r = 0; r < y.rows(); ++r) {
          for (std::size_t c = 0; c < right; ++c) d(r, c) += g(r, left + c);
        }
      }
      return;
    }
    case OpKind::slice_cols: {
      Tensor& d = acc(0);
      const std::size_t begin = n.indices[0];
      for (std::size_t r = 0; r < y.rows(); ++r) {
        for (std::size_t c = 0; c < y.cols(); ++c) d(r, begin + c) += g(r, c);
      }
      return;
    }
    case OpKind::pick_cols: {
      Tensor& d = acc(0);
      for (std::size_t r = 0; r < y.rows(); ++r) d(r, n.indices[r]) += g[r];
      return;
    }
    case OpKind::logsumexp: {
      Tensor& d = acc(0);
      const Tensor& x = in(0);
      for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) d(r, c) += g[r] * std::exp(x(r, c) - y[r]);
      }
      return;
    }
    case OpKind::softmax: {
      Tensor& d = acc(0);
      for (std::size_t r = 0; r < y.rows(); ++r) {
        double dot = 0.0;
        for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
        for (std::size_t c = 0; c < y.cols(); ++c) d(r, c) += y(r, c) * (g(r, c) - dot);
      }
      return;
    }
    case OpKind::row_norm: {
      Tensor& d = acc(0);
      const Tensor& x = in(0);
      for (std::size_t r = 0; r < x.rows(); ++r) {
        if (y[r] == 0.0) continue;
        for (std::size_t c = 0; c < x.cols(); ++c) d(r, c) += g[r] * x(r, c) / y[r];
      }
      return;
    }
    case OpKind::clamp: {
      Tensor& d = acc(0);
      const Tensor& x = in(0);
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (x[i] >= n.a && x[i] <= n.b) d[i] += g[i];
      }
      return;
    }
  }
}

// Op constructors: compute the forward value and record the node.

Var affine(Var x, Var weight, Var bias) {
  require_same_tape(x, weight);
  require_same_tape(x, bias);
  const Tensor& xv = x.value();
  const Tensor& w = weight.value();
  const Tensor& b = bias.value();
  if (xv.cols() != w.cols() || b.size() != w.rows()) {
    throw DimensionError("affine: x " + xv.shape_string() + ", W " + w.shape_string() + ", b " +
                         b.shape_string());
  }
  const std::size_t batch = xv.rows(), nin = xv.cols(), nout = w.rows();
  Tensor out({batch, nout});
  for (std::size_t r = 0; r < batch; ++r) {
    for (std::size_t i = 0; i < nout; ++i) {
      double acc = b[i];
      for (std::size_t j = 0; j < nin; ++j) acc += w(i, j) * xv(r, j);
      out(r, i) = acc;
    }
  }
  return x.tape->record(OpKind::affine, {x.id, weight.id, bias.id}, std::move(out));
}

Var weight_norm(Var direction, Var scale_var) {
  require_same_tape(direction, scale_var);
  const Tensor& v = direction.value();
  const Tensor& s = scale_var.value();
  if (s.size() != v.rows()) {
    throw DimensionError("weight_norm: v " + v.shape_string() + ", s " + s.shape_string());
  }
  Tensor w({v.rows(), v.cols()});
  for (std::size_t i = 0; i < v.rows(); ++i) {
    double norm2 = 0.0;
    for (std::size_t j = 0; j < v.cols(); ++j) norm2 += v(i, j) * v(i, j);
    if (norm2 == 0.0) throw DimensionError("weight_norm: zero direction row");
    const double c = s[i] / std::sqrt(norm2);
    for (std::size_t j = 0; j < v.cols(); ++j) w(i, j) = c * v(i, j);
  }
  return direction.tape->record(OpKind::weight_norm, {direction.id, scale_var.id}, std::move(w));
}

namespace {

template <typename F>
Var elementwise(OpKind op, Var x, F f) {
  Tensor out = x.value();
  for (auto& v : out.storage()) v = f(v);
  return x.tape->record(op, {x.id}, std::move(out));
}

template <typename F>
Var binary(OpKind op, Var a, Var b, const char* what, F f) {
  require_same_tape(a, b);
  require_same(a.value(), b.value(), what);
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(out[i], bv[i]);
  return a.tape->record(op, {a.id, b.id}, std::move(out));
}

}  // namespace

Var elu(Var x) {
  return elementwise(OpKind::elu, x, [](double v) { return v > 0.0 ? v : std::expm1(v); });
}
Var tanh(Var x) {
  return elementwise(OpKind::tanh, x, [](double v) { return std::tanh(v); });
}
Var sigmoid(Var x) {
  return elementwise(OpKind::sigmoid, x, [](double v) {
    return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  });
}
Var log_sigmoid(Var x) { return elementwise(OpKind::log_sigmoid, x, log_sigmoid_value); }
Var exp(Var x) {
  return elementwise(OpKind::exp, x, [](double v) { return std::exp(v); });
}
Var log(Var x) {
  return elementwise(OpKind::log, x, [](double v) { return std::log(v); });
}
Var add(Var a, Var b) {
  return binary(OpKind::add, a, b, "add", [](double u, double v) { return u + v; });
}
Var sub(Var a, Var b) {
  return binary(OpKind::sub, a, b, "sub", [](double u, double v) { return u - v; });
}
Var mul(Var a, Var b) {
  return binary(OpKind::mul, a, b, "mul", [](double u, double v) { return u * v; });
}
Var scale(Var x, double factor) {
  Tensor out = x.value();
  for (auto& v : out.storage()) v *= factor;
  return x.tape->record(OpKind::scale, {x.id}, std::move(out), factor);
}
Var add_scalar(Var x, double c) {
  Tensor out = x.value();
  for (auto& v : out.storage()) v += c;
  return x.tape->record(OpKind::add_scalar, {x.id}, std::move(out), c);
}
Var square(Var x) {
  return elementwise(OpKind::square, x, [](double v) { return v * v; });
}
Var abs(Var x) {
  return elementwise(OpKind::abs, x, [](double v) { return std::abs(v); });
}

Var sum_all(Var x) {
  double s = 0.0;
  for (double v : x.value().values()) s += v;
  return x.tape->record(OpKind::sum_all, {x.id}, Tensor({1, 1}, s));
}

Var mean_all(Var x) {
  const Tensor& v = x.value();
  if (v.size() == 0) throw DimensionError("mean_all: empty tensor");
  double s = 0.0;
  for (double e : v.values()) s += e;
  return x.tape->record(OpKind::mean_all, {x.id},
                        Tensor({1, 1}, s / static_cast<double>(v.size())));
}

Var sum_cols(Var x) {
  const Tensor& v = x.value();
  Tensor out({v.rows(), 1});
  for (std::size_t r = 0; r < v.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < v.cols(); ++c) s += v(r, c);
    out[r] = s;
  }
  return x.tape->record(OpKind::sum_cols, {x.id}, std::move(out));
}

Var mean_rows(Var x) {
  const Tensor& v = x.value();
  if (v.rows() == 0) throw DimensionError("mean_rows: no rows");
  Tensor out({1, v.cols()});
  for (std::size_t r = 0; r < v.rows(); ++r) {
    for (std::size_t c = 0; c < v.cols(); ++c) out[c] += v(r, c);
  }
  for (auto& e : out.storage()) e /= static_cast<double>(v.rows());
  return x.tape->record(OpKind::mean_rows, {x.id}, std::move(out));
}

Var concat_cols(Var a, Var b) {
  require_same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rows() != bv.rows()) {
    throw DimensionError("concat_cols: " + av.shape_string() + " vs " + bv.shape_string());
  }
  Tensor out({av.rows(), av.cols() + bv.cols()});
  for (std::size_t r = 0; r < av.rows(); ++r) {
    for (std::size_t c = 0; c < av.cols(); ++c) out(r, c) = av(r, c);
    for (std::size_t c = 0; c < bv.cols(); ++c) out(r, av.cols() + c) = bv(r, c);
  }
  return a.tape->record(OpKind::concat_cols, {a.id, b.id}, std::move(out));
}

Var slice_cols(Var x, std::size_t begin, std::size_t end) {
  const Tensor& v = x.value();
  if (begin > end || end > v.cols()) {
    throw DimensionError("slice_cols: [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") of " + v.shape_string());
  }
  Tensor out({v.rows(), end - begin});
  for (std::size_t r = 0; r < v.rows(); ++r) {
    for (std::size_t c = begin; c < end; ++c) out(r, c - begin) = v(r, c);
  }
  return x.tape->record(OpKind::slice_cols, {x.id}, std::move(out), 0.0, 0.0, {begin, end});
}

Var pick_cols(Var x, std::span<const std::size_t> index) {
  const Tensor& v = x.value();
  if (index.size() != v.rows()) {
    throw DimensionError("pick_cols: " + std::to_string(index.size()) + " indices for " +
                         v.shape_string());
  }
  Tensor out({v.rows(), 1});
  for (std::size_t r = 0; r < v.rows(); ++r) {
    if (index[r] >= v.cols()) throw DimensionError("pick_cols: index out of range");
    out[r] = v(r, index[r]);
  }
  return x.tape->record(OpKind::pick_cols, {x.id}, std::move(out), 0.0, 0.0,
                        std::vector<std::size_t>(index.begin(), index.end()));
}

Var logsumexp(Var x, bool with_zero) {
  const Tensor& v = x.value();
  Tensor out({v.rows(), 1});
  for (std::size_t r = 0; r < v.rows(); ++r) {
    double m = with_zero ? 0.0 : -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < v.cols(); ++c) m = std::max(m, v(r, c));
    double s = with_zero ? std::exp(-m) : 0.0;
    for (std::size_t c = 0; c < v.cols(); ++c) s += std::exp(v(r, c) - m);
    out[r] = m + std::log(s);
  }
  return x.tape->record(OpKind::logsumexp, {x.id}, std::move(out), with_zero ? 1.0 : 0.0);
}

Var softmax(Var x) {
  const Tensor& v = x.value();
  Tensor out({v.rows(), v.cols()});
  for (std::size_t r = 0; r < v.rows(); ++r) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < v.cols(); ++c) m = std::max(m, v(r, c));
    double s = 0.0;
    for (std::size_t c = 0; c < v.cols(); ++c) {
      out(r, c) = std::exp(v(r, c) - m);
      s += out(r, c);
    }
    for (std::size_t c = 0; c < v.cols(); ++c) out(r, c) /= s;
  }
  return x.tape->record(OpKind::softmax, {x.id}, std::move(out));
}

Var row_norm(Var x) {
  const Tensor& v = x.value();
  Tensor out({v.rows(), 1});
  for (std::size_t r = 0; r < v.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < v.cols(); ++c) s += v(r, c) * v(r, c);
    out[r] = std::sqrt(s);
  }
  return x.tape->record(OpKind::row_norm, {x.id}, std::move(out));
}

Var clamp(Var x, double lo, double hi) {
  Tensor out = x.value();
  std::size_t clamped = 0;
  for (auto& v : out.storage()) {
    if (v < lo) {
      v = lo;
      ++clamped;
    } else if (v > hi) {
      v = hi;
      ++clamped;
    }
  }
  x.tape->count_saturations(clamped);
  return x.tape->record(OpKind::clamp, {x.id}, std::move(out), lo, hi);
}

}  // namespace mssl
