#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mssl/param_store.hpp"
#include "mssl/rng.hpp"
#include "mssl/tape.hpp"

namespace mssl {

/// A probe builds a scalar on the tape from the given input nodes.
using ScalarFn = std::function<Var(Tape&, std::span<const Var>)>;

struct GradCheckResult {
  std::string name;
  std::size_t probes = 0;
  /// max over probes of max_i |reverse_i - fd_i| / (1 + max_i |reverse_i|)
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed() const { return max_error <= tolerance; }
};

struct GradCheckOptions {
  double eps = 1e-4;
  double tolerance = 1e-5;
  std::size_t probes = 100;
};

/// Compare reverse-mode gradients of fn w.r.t. every input against central
/// differences at one point. Returns the scaled max error.
double gradient_error(const ScalarFn& fn, const std::vector<Tensor>& inputs, double eps);

/// A named probe family: draws a fresh input set per probe.
struct GradCheckCase {
  std::string name;
  std::function<std::vector<Tensor>(Rng&)> sample;
  ScalarFn fn;
};

/// Same comparison with respect to every scalar of a parameter store; `fn`
/// binds the store itself. The store is restored before returning.
double param_gradient_error(const std::function<Var(Tape&)>& fn, ParamStore& store,
                            double eps);

GradCheckResult run_gradcheck(const GradCheckCase& c, const GradCheckOptions& options, Rng rng);

/// One case per differentiable tape op. Non-scalar ops are contracted with a
/// fixed random weight tensor so every output entry contributes.
std::vector<GradCheckCase> op_gradcheck_cases();

/// Deliberately wrong ELU derivative (slope 1.01 on the positive branch),
/// used to show that the harness detects a broken backward rule.
GradCheckCase faulty_gradcheck_case();

}  // namespace mssl
