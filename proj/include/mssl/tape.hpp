#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mssl/param_store.hpp"
#include "mssl/tensor.hpp"

namespace mssl {

/// Raised when an API is used against its contract (e.g. backward on a
/// non-scalar node without an explicit seed).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid for the tape's lifetime.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

enum class OpKind {
  input,
  param,
  affine,
  weight_norm,
  elu,
  tanh,
  sigmoid,
  log_sigmoid,
  exp,
  log,
  add,
  sub,
  mul,
  scale,
  add_scalar,
  square,
  abs,
  sum_all,
  mean_all,
  sum_cols,
  mean_rows,
  concat_cols,
  slice_cols,
  pick_cols,
  logsumexp,
  softmax,
  row_norm,
  clamp,
};

const char* op_name(OpKind op);

/// Reverse-mode record. Nodes are appended in evaluation order, so node ids are
/// a topological order; backward walks them once in reverse.
///
/// Batched tensors are rows = examples. Every op computes each output row from
/// the matching input rows only, with a fixed summation order, so a batched
/// forward is bitwise identical to per-example forwards.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var input(Tensor value, bool requires_grad = false);
  Var constant(Tensor value) { return input(std::move(value), false); }

  /// Bind parameter `index` of `store`. Repeated binds return the same node so
  /// gradients accumulate across uses.
  Var param(const ParamStore& store, std::size_t index);
  Var param(const ParamStore& store, const std::string& name);

  /// Parameters of a frozen store are bound as constants: no adjoints are
  /// propagated into them. Must be called before the store is bound.
  void freeze(const ParamStore& store) { frozen_.insert(&store); }

  /// Scalar output; seeds d(out)/d(out) = 1.
  void backward(Var out);
  /// Arbitrary output with an explicit seed adjoint of the same shape.
  void backward(Var out, const Tensor& seed);

  /// Adjoint of a node after the last backward (zeros if it had none).
  Tensor grad(Var v) const;
  /// Flat gradient aligned with store.flatten(); zeros for unbound entries.
  std::vector<double> gradient(const ParamStore& store) const;

  std::size_t size() const { return nodes_.size(); }
  OpKind op(std::size_t id) const { return nodes_[id].op; }
  std::span<const std::size_t> inputs(std::size_t id) const { return nodes_[id].inputs; }
  const Tensor& value(std::size_t id) const { return nodes_[id].value; }

  /// Elements clamped by clamp() ops since construction.
  std::size_t saturation_count() const { return saturations_; }

  /// Low-level node append used by the op functions below. needs_grad is
  /// inherited from the inputs.
  Var record(OpKind op, std::vector<std::size_t> inputs, Tensor value, double a = 0.0,
             double b = 0.0, std::vector<std::size_t> indices = {});
  void count_saturations(std::size_t n) { saturations_ += n; }

 private:
  struct Node {
    OpKind op = OpKind::input;
    std::vector<std::size_t> inputs;
    Tensor value;
    bool needs_grad = false;
    double a = 0.0;
    double b = 0.0;
    std::vector<std::size_t> indices;
    const ParamStore* store = nullptr;
    std::size_t param_index = 0;
  };

  Var push(Node node);
  bool needs(std::size_t id) const { return nodes_[id].needs_grad; }

  Tensor& adjoint(std::size_t id);
  void propagate(std::size_t id);

  std::vector<Node> nodes_;
  std::vector<Tensor> adjoints_;
  std::map<std::pair<const ParamStore*, std::size_t>, std::size_t> bound_;
  std::set<const ParamStore*> frozen_;
  std::size_t saturations_ = 0;
};

/// x (B x n), W (m x n), b (m) -> x W^T + b (B x m).
Var affine(Var x, Var weight, Var bias);
/// Direction v (m x n) and scale s (m) -> W with rows s_i v_i / |v_i|.
Var weight_norm(Var direction, Var scale);
/// Exponential linear unit with alpha = 1: x for x > 0, exp(x) - 1 otherwise.
Var elu(Var x);
Var tanh(Var x);
Var sigmoid(Var x);
/// Numerically stable log(sigmoid(x)).
Var log_sigmoid(Var x);
Var exp(Var x);
Var log(Var x);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double factor);
Var add_scalar(Var x, double c);
Var square(Var x);
Var abs(Var x);
Var sum_all(Var x);
Var mean_all(Var x);
/// Per-row sum: B x n -> B x 1.
Var sum_cols(Var x);
/// Per-column mean over rows: B x n -> 1 x n.
Var mean_rows(Var x);
Var concat_cols(Var a, Var b);
Var slice_cols(Var x, std::size_t begin, std::size_t end);
/// Per-row element selection: out[r] = x[r, index[r]] (B x 1).
Var pick_cols(Var x, std::span<const std::size_t> index);
/// Per-row log(sum_j exp(x_j)), optionally with an extra pinned zero logit.
Var logsumexp(Var x, bool with_zero);
/// Per-row softmax over columns.
Var softmax(Var x);
/// Per-row Euclidean norm: B x n -> B x 1 (subgradient 0 at the origin).
Var row_norm(Var x);
/// Elementwise clamp to [lo, hi]; clamped entries pass no gradient and are
/// counted in Tape::saturation_count().
Var clamp(Var x, double lo, double hi);

}  // namespace mssl
