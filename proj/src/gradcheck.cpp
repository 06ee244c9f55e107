#include "mssl/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace mssl {

namespace {

double evaluate_scalar(const ScalarFn& fn, const std::vector<Tensor>& inputs) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.constant(t));
  return fn(tape, vars).value()[0];
}

Var contract(Var y) {
  Tensor w({y.rows(), y.cols()});
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::cos(0.37 * static_cast<double>(i) + 0.1);
  return sum_all(mul(y, y.tape->constant(std::move(w))));
}

Tensor uniform(Rng& rng, std::size_t r, std::size_t c, double lo, double hi) {
  Tensor t({r, c});
  for (auto& v : t.storage()) v = rng.uniform(lo, hi);
  return t;
}

// Values in [lo, hi] with random sign, bounded away from zero.
Tensor away_from_zero(Rng& rng, std::size_t r, std::size_t c, double lo, double hi) {
  Tensor t = uniform(rng, r, c, lo, hi);
  for (auto& v : t.storage()) {
    if (rng.uniform() < 0.5) v = -v;
  }
  return t;
}

GradCheckCase unary_case(std::string name, Var (*op)(Var), double lo, double hi) {
  return {std::move(name),
          [lo, hi](Rng& rng) { return std::vector<Tensor>{uniform(rng, 3, 4, lo, hi)}; },
          [op](Tape&, std::span<const Var> v) { return contract(op(v[0])); }};
}

}  // namespace

double gradient_error(const ScalarFn& fn, const std::vector<Tensor>& inputs, double eps) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.input(t, true));
  Var out = fn(tape, vars);
  tape.backward(out);

  double worst = 0.0;
  std::vector<Tensor> probe = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor analytic = tape.grad(vars[k]);
    const double scale = 1.0 + max_abs(analytic);
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      probe[k][i] = inputs[k][i] + eps;
      const double plus = evaluate_scalar(fn, probe);
      probe[k][i] = inputs[k][i] - eps;
      const double minus = evaluate_scalar(fn, probe);
      probe[k][i] = inputs[k][i];
      const double fd = (plus - minus) / (2.0 * eps);
      worst = std::max(worst, std::abs(analytic[i] - fd) / scale);
    }
  }
  return worst;
}

double param_gradient_error(const std::function<Var(Tape&)>& fn, ParamStore& store,
                            double eps) {
  std::vector<double> analytic;
  {
    Tape tape;
    Var out = fn(tape);
    tape.backward(out);
    analytic = tape.gradient(store);
  }
  double amax = 0.0;
  for (double g : analytic) amax = std::max(amax, std::abs(g));
  const double scale = 1.0 + amax;
  const auto evaluate_at = [&](const std::vector<double>& flat) {
    store.unflatten(flat);
    Tape tape;
    return fn(tape).value()[0];
  };
  const std::vector<double> base = store.flatten();
  std::vector<double> probe = base;
  double worst = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    probe[i] = base[i] + eps;
    const double plus = evaluate_at(probe);
    probe[i] = base[i] - eps;
    const double minus = evaluate_at(probe);
    probe[i] = base[i];
    worst = std::max(worst, std::abs(analytic[i] - (plus - minus) / (2.0 * eps)) / scale);
  }
  store.unflatten(base);
  return worst;
}

GradCheckResult run_gradcheck(const GradCheckCase& c, const GradCheckOptions& options, Rng rng) {
  GradCheckResult result;
  result.name = c.name;
  result.tolerance = options.tolerance;
  for (std::size_t p = 0; p < options.probes; ++p) {
    const auto inputs = c.sample(rng);
    result.max_error = std::max(result.max_error, gradient_error(c.fn, inputs, options.eps));
    ++result.probes;
  }
  return result;
}

std::vector<GradCheckCase> op_gradcheck_cases() {
  std::vector<GradCheckCase> cases;

  cases.push_back({"affine",
                   [](Rng& rng) {
                     return std::vector<Tensor>{uniform(rng, 3, 4, -2, 2),
                                                uniform(rng, 5, 4, -1, 1),
                                                uniform(rng, 1, 5, -1, 1)};
                   },
                   [](Tape&, std::span<const Var> v) {
                     return contract(affine(v[0], v[1], v[2]));
                   }});
  cases.push_back({"weight_norm",
                   [](Rng& rng) {
                     return std::vector<Tensor>{away_from_zero(rng, 3, 4, 0.3, 1.5),
                                                uniform(rng, 1, 3, -2, 2)};
                   },
                   [](Tape&, std::span<const Var> v) { return contract(weight_norm(v[0], v[1])); }});
  cases.push_back(unary_case("elu", elu, -3, 3));
  cases.push_back(unary_case("tanh", tanh, -3, 3));
  cases.push_back(unary_case("sigmoid", sigmoid, -6, 6));
  cases.push_back(unary_case("log_sigmoid", log_sigmoid, -10, 10));
  cases.push_back(unary_case("exp", exp, -2, 2));
  cases.push_back(unary_case("log", log, 0.2, 4));
  cases.push_back(unary_case("square", square, -3, 3));
  cases.push_back(unary_case("sum_all", sum_all, -3, 3));
  cases.push_back(unary_case("mean_all", mean_all, -3, 3));
  cases.push_back(unary_case("sum_cols", sum_cols, -3, 3));
  cases.push_back(unary_case("mean_rows", mean_rows, -3, 3));
  cases.push_back(unary_case("softmax", softmax, -4, 4));
  cases.push_back({"abs",
                   [](Rng& rng) { return std::vector<Tensor>{away_from_zero(rng, 3, 4, 0.1, 3)}; },
                   [](Tape&, std::span<const Var> v) { return contract(abs(v[0])); }});
  cases.push_back({"row_norm",
                   [](Rng& rng) { return std::vector<Tensor>{away_from_zero(rng, 3, 4, 0.2, 2)}; },
                   [](Tape&, std::span<const Var> v) { return contract(row_norm(v[0])); }});
  cases.push_back({"logsumexp",
                   [](Rng& rng) { return std::vector<Tensor>{uniform(rng, 3, 4, -5, 5)}; },
                   [](Tape&, std::span<const Var> v) { return contract(logsumexp(v[0], false)); }});
  cases.push_back({"logsumexp_with_zero",
                   [](Rng& rng) { return std::vector<Tensor>{uniform(rng, 3, 4, -5, 5)}; },
                   [](Tape&, std::span<const Var> v) { return contract(logsumexp(v[0], true)); }});
  cases.push_back({"clamp",
                   [](Rng& rng) {
                     // Keep entries at least 0.05 away from the bounds.
                     Tensor t = uniform(rng, 3, 4, -2, 2);
                     for (auto& x : t.storage()) {
                       if (std::abs(std::abs(x) - 1.0) < 0.05) x *= 1.2;
                     }
                     return std::vector<Tensor>{t};
                   },
                   [](Tape&, std::span<const Var> v) { return contract(clamp(v[0], -1.0, 1.0)); }});
  cases.push_back({"add_sub_mul",
                   [](Rng& rng) {
                     return std::vector<Tensor>{uniform(rng, 3, 4, -2, 2), uniform(rng, 3, 4, -2, 2)};
                   },
                   [](Tape&, std::span<const Var> v) {
                     return contract(mul(add(v[0], v[1]), sub(v[0], scale(v[1], 0.5))));
                   }});
  cases.push_back({"add_scalar",
                   [](Rng& rng) { return std::vector<Tensor>{uniform(rng, 3, 4, -2, 2)}; },
                   [](Tape&, std::span<const Var> v) {
                     return contract(square(add_scalar(v[0], 0.7)));
                   }});
  cases.push_back({"concat_slice",
                   [](Rng& rng) {
                     return std::vector<Tensor>{uniform(rng, 3, 2, -2, 2), uniform(rng, 3, 3, -2, 2)};
                   },
                   [](Tape&, std::span<const Var> v) {
                     Var c = concat_cols(v[0], v[1]);
                     return contract(tanh(slice_cols(c, 1, 4)));
                   }});
  cases.push_back({"pick_cols",
                   [](Rng& rng) { return std::vector<Tensor>{uniform(rng, 3, 4, -2, 2)}; },
                   [](Tape&, std::span<const Var> v) {
                     const std::vector<std::size_t> idx{2, 0, 3};
                     return contract(exp(pick_cols(v[0], idx)));
                   }});
  return cases;
}

GradCheckCase faulty_gradcheck_case() {
  return {"faulty_elu",
          [](Rng& rng) { return std::vector<Tensor>{uniform(rng, 3, 4, 0.1, 3)}; },
          [](Tape& tape, std::span<const Var> v) {
            // Forward value equals elu(x); the detached offset leaves a spurious
            // +0.01 slope in the gradient.
            Var leak = scale(v[0], 0.01);
            Var detached = tape.constant(leak.value());
            return contract(add(elu(v[0]), sub(leak, detached)));
          }};
}

}  // namespace mssl
