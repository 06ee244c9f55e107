#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mssl/gradcheck.hpp"
#include "mssl/jacobian.hpp"
#include "mssl/models.hpp"
#include "mssl/numerics.hpp"
#include "mssl/param_store.hpp"
#include "mssl/rng.hpp"
#include "mssl/tape.hpp"

using namespace mssl;

namespace {

Tensor row(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor({1, n}, std::move(v));
}

}  // namespace

TEST_CASE("affine examples") {
  Tape t;
  SUBCASE("identity") {
    Var y = affine(t.constant(row({3, 4})), t.constant(Tensor::identity(2)),
                   t.constant(Tensor::vector({0, 0})));
    CHECK(y.value() == row({3, 4}));
  }
  SUBCASE("zero map") {
    Var y = affine(t.constant(row({7, -9})), t.constant(Tensor::zeros(2, 2)),
                   t.constant(Tensor::vector({1, 2})));
    CHECK(y.value() == row({1, 2}));
  }
  SUBCASE("hand multiply") {
    Var y = affine(t.constant(row({1, 1})), t.constant(Tensor::matrix({{1, 2}, {3, 4}})),
                   t.constant(Tensor::vector({0, 0})));
    CHECK(y.value() == row({3, 7}));
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(affine(t.constant(row({1, 1, 1})), t.constant(Tensor::identity(2)),
                           t.constant(Tensor::vector({0, 0}))),
                    DimensionError);
  }
}

TEST_CASE("elu examples") {
  Tape t;
  Var y = elu(t.constant(row({0.0, 2.5, -1.0})));
  CHECK(y.value()[0] == 0.0);
  CHECK(y.value()[1] == 2.5);
  CHECK(y.value()[2] == doctest::Approx(-0.632121).epsilon(1e-6));
  CHECK(y.value()[2] == std::exp(-1.0) - 1.0);
}

TEST_CASE("elu derivative is 1 at zero from both sides") {
  const double h = 1e-7;
  Tape t;
  Var x = t.input(row({-h, 0.0, h}), true);
  t.backward(sum_all(elu(x)));
  const Tensor g = t.grad(x);
  for (double v : g.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("softmax_with_fake examples") {
  const std::vector<double> zero{0.0, 0.0};
  auto p = softmax_with_fake(zero);
  REQUIRE(p.size() == 3);
  for (double v : p) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  const std::vector<double> ln2{std::log(2.0)};
  p = softmax_with_fake(ln2);
  CHECK(p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  // Shifting the k real logits changes p(k+1) because the fake logit stays 0,
  // while ratios among real classes are preserved.
  const std::vector<double> a{0.3, -0.4}, b{1.3, 0.6};
  const auto pa = softmax_with_fake(a), pb = softmax_with_fake(b);
  CHECK(pa[0] / pa[1] == doctest::Approx(pb[0] / pb[1]).epsilon(1e-12));
  CHECK(pa[2] > pb[2]);
}

TEST_CASE("softmax_with_fake sums to one and is overflow safe") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> l(1 + rng.below(4));
    for (auto& v : l) v = rng.uniform(-50, 50);
    const auto p = softmax_with_fake(l);
    double s = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
  const std::vector<double> huge{800.0, 799.0};
  const auto p = softmax_with_fake(huge);
  CHECK(std::isfinite(p[0]));
  CHECK(p[2] < 1e-300);
}

TEST_CASE("backward examples") {
  SUBCASE("sum gives ones") {
    Tape t;
    Var x = t.input(row({1, -2, 5}), true);
    t.backward(sum_all(x));
    CHECK(t.grad(x) == row({1, 1, 1}));
  }
  SUBCASE("half squared norm gives x") {
    Tape t;
    Var x = t.input(row({1, -2}), true);
    t.backward(scale(sum_all(square(x)), 0.5));
    CHECK(t.grad(x) == row({1, -2}));
  }
  SUBCASE("bilinear form") {
    Tape t;
    Var w = t.input(row({2, 3}), true);
    Var x = t.input(row({1, 1}), true);
    t.backward(sum_all(mul(w, x)));
    CHECK(t.grad(w) == row({1, 1}));
    CHECK(t.grad(x) == row({2, 3}));
  }
  SUBCASE("non-scalar output is a contract error") {
    Tape t;
    Var x = t.input(row({1, 2}), true);
    CHECK_THROWS_AS(t.backward(square(x)), ContractError);
  }
  SUBCASE("inputs untouched") {
    Tape t;
    const Tensor v = row({0.5, -1.5});
    Var x = t.input(v, true);
    t.backward(sum_all(tanh(x)));
    CHECK(x.value() == v);
  }
}

TEST_CASE("tape is topologically ordered") {
  Tape t;
  Var x = t.input(row({1, 2}), true);
  Var y = sum_all(mul(elu(x), tanh(x)));
  (void)y;
  for (std::size_t id = 0; id < t.size(); ++id) {
    for (std::size_t in : t.inputs(id)) CHECK(in < id);
  }
}

TEST_CASE("param gradients and frozen stores") {
  ParamStore store;
  store.add("w", row({2, 3}));
  Tape t;
  Var w = t.param(store, "w");
  Var w_again = t.param(store, "w");
  CHECK(w.id == w_again.id);
  Var x = t.constant(row({1, 4}));
  t.backward(add(sum_all(mul(w, x)), sum_all(mul(w_again, x))));
  CHECK(t.gradient(store) == std::vector<double>{2, 8});

  Tape frozen;
  frozen.freeze(store);
  Var fw = frozen.param(store, "w");
  Var fx = frozen.input(row({1, 4}), true);
  frozen.backward(sum_all(mul(fw, fx)));
  CHECK(frozen.gradient(store) == std::vector<double>{0, 0});
  CHECK(frozen.grad(fx) == row({2, 3}));
}

TEST_CASE("param store flatten round trip") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    ParamStore store;
    const std::size_t n = 1 + rng.below(5);
    for (std::size_t i = 0; i < n; ++i) {
      Tensor t({1 + rng.below(4), 1 + rng.below(4)});
      for (auto& v : t.storage()) v = rng.normal();
      store.add("p" + std::to_string(i), t);
    }
    ParamStore copy = store;
    auto flat = store.flatten();
    for (auto& v : flat) v += 1.0;
    copy.unflatten(flat);
    CHECK(copy.flatten() == flat);
    for (auto& v : flat) v -= 1.0;
    copy.unflatten(store.flatten());
    CHECK(copy == store);
  }
}

TEST_CASE("jacobian examples") {
  SUBCASE("linear map returns its matrix") {
    const Tensor a = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
    TapeFn f = [&](Tape& t, Var x) {
      return affine(x, t.constant(a), t.constant(Tensor::vector({0.5, -0.5})));
    };
    CHECK(jacobian(f, row({0.3, 0.1, -2})) == a);
  }
  SUBCASE("elementwise elu") {
    TapeFn f = [](Tape&, Var x) { return elu(x); };
    const Tensor j = jacobian(f, row({2, -1}));
    CHECK(j(0, 0) == 1.0);
    CHECK(j(0, 1) == 0.0);
    CHECK(j(1, 0) == 0.0);
    CHECK(j(1, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  }
  SUBCASE("chain rule vs finite differences and product of jacobians") {
    Mlp g(MlpSpec{{3, 6, 4}, Activation::elu, Activation::identity, true, 11});
    Mlp h(MlpSpec{{4, 5, 2}, Activation::tanh, Activation::identity, true, 12});
    TapeFn composed = [&](Tape& t, Var x) { return h.as_fn()(t, g.as_fn()(t, x)); };
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      const Tensor x = row({rng.normal(), rng.normal(), rng.normal()});
      const Tensor j = jacobian(composed, x);
      const Tensor product = matmul(jacobian(h.as_fn(), g(x)), jacobian(g.as_fn(), x));
      for (std::size_t i = 0; i < j.size(); ++i) CHECK(std::abs(j[i] - product[i]) < 1e-8);
      const Tensor fd = finite_diff_jacobian([&](const Tensor& p) { return h(g(p)); }, x, 1e-4);
      for (std::size_t i = 0; i < j.size(); ++i) {
        CHECK(std::abs(j[i] - fd[i]) / (1.0 + max_abs(j)) < 1e-5);
      }
    }
  }
  SUBCASE("batched jacobians equal single-point jacobians") {
    Mlp g(MlpSpec{{3, 8, 5}, Activation::elu, Activation::identity, true, 2});
    Rng rng(9);
    Tensor pts({4, 3});
    for (auto& v : pts.storage()) v = rng.normal();
    const auto batched = jacobians(g.as_fn(), pts);
    for (std::size_t r = 0; r < 4; ++r) CHECK(batched[r] == jacobian(g.as_fn(), pts.row_copy(r)));
  }
}

TEST_CASE("finite difference examples") {
  const Tensor a = Tensor::matrix({{2, -1}, {0.5, 3}});
  const Tensor fd = finite_diff_jacobian([&](const Tensor& x) { return matmul(x, transpose(a)); },
                                         row({1, 2}));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(fd[i] - a[i]) < 1e-10);

  const Tensor d = finite_diff_jacobian(
      [](const Tensor& x) { return row({x[0] * x[0]}); }, row({3.0}), 1e-4);
  CHECK(std::abs(d[0] - 6.0) < 1e-7);
  CHECK_THROWS(finite_diff_jacobian([](const Tensor& x) { return x; }, row({1.0}), 0.0));
}

TEST_CASE("gradient check of every op") {
  GradCheckOptions options;
  Rng rng(2024);
  for (const auto& c : op_gradcheck_cases()) {
    const auto result = run_gradcheck(c, options, rng.split(c.name));
    INFO(c.name << " max error " << result.max_error);
    CHECK(result.probes >= 100);
    CHECK(result.passed());
  }
}

TEST_CASE("gradient check flags a broken backward rule") {
  const auto result = run_gradcheck(faulty_gradcheck_case(), {}, Rng(1));
  CHECK_FALSE(result.passed());
}

TEST_CASE("determinism of tapes and gradients") {
  auto run = [] {
    Mlp g(MlpSpec{{4, 16, 3}, Activation::elu, Activation::identity, true, 77});
    Rng rng(4);
    Tensor x({8, 4});
    for (auto& v : x.storage()) v = rng.normal();
    Tape t;
    Var out = mean_all(square(g.forward(t, t.constant(x))));
    t.backward(out);
    return std::make_pair(out.value(), t.gradient(g.params()));
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("rng streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng c(42);
  CHECK(c.split("x").next() != c.split("y").next());
  CHECK(c.counter() == 0);
  // First SplitMix64 output for seed 0.
  Rng zero(0);
  CHECK(zero.next() == 0xE220A8397B1DCDAFULL);
  double mean = 0.0, var = 0.0;
  const int n = 200000;
  Rng g(1);
  for (int i = 0; i < n; ++i) {
    const double v = g.normal();
    mean += v;
    var += v * v;
  }
  mean /= n;
  var = var / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.01);
  for (int i = 0; i < 1000; ++i) CHECK(g.below(7) < 7);
}
