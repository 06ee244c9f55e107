#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mssl/losses.hpp"

using namespace mssl;

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

Tensor column(std::vector<double> probs) {
  const std::size_t n = probs.size();
  for (auto& p : probs) p = logit(p);
  return Tensor({n, 1}, std::move(probs));
}

double value(Var v) { return v.value()[0]; }

TapeFn linear_fn(const Tensor& w) {
  return [w](Tape& tape, Var x) {
    return affine(x, tape.constant(w), tape.constant(Tensor({w.rows()})));
  };
}

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Tensor t({r, c});
  for (auto& v : t.storage()) v = rng.normal();
  return t;
}

}  // namespace

TEST_CASE("bigan discriminator loss examples") {
  Tape t;
  SUBCASE("constant one half") {
    Var l = bigan_disc_loss(t.constant(column({0.5, 0.5})), t.constant(column({0.5, 0.5, 0.5})));
    CHECK(value(l) == doctest::Approx(-2.0 * std::log(0.5)).epsilon(1e-14));
  }
  SUBCASE("perfect discriminator limit") {
    // The floor is set by the probability clamp: -2 log(1 - 1e-12).
    Var l = bigan_disc_loss(t.constant(Tensor({1, 1}, {40.0})), t.constant(Tensor({1, 1}, {-40.0})));
    CHECK(value(l) < 2.1e-12);
  }
  SUBCASE("single pair") {
    Var l = bigan_disc_loss(t.constant(column({0.8})), t.constant(column({0.3})));
    CHECK(value(l) == doctest::Approx(0.579818).epsilon(1e-6));
  }
  SUBCASE("empty batch") {
    CHECK_THROWS_AS(bigan_disc_loss(t.constant(Tensor({0, 1})), t.constant(column({0.3}))),
                    std::invalid_argument);
  }
}

TEST_CASE("augmented bigan loss examples") {
  Tape t;
  SUBCASE("constant one half") {
    Var h = t.constant(column({0.5}));
    CHECK(value(augmented_bigan_disc_loss(h, h, h)) ==
          doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-14));
  }
  SUBCASE("single triple") {
    Var l = augmented_bigan_disc_loss(t.constant(column({0.9})), t.constant(column({0.2})),
                                      t.constant(column({0.4})));
    const double direct = -std::log(0.9) - 0.5 * std::log(0.8) - 0.5 * std::log(0.6);
    CHECK(value(l) == doctest::Approx(direct).epsilon(1e-14));
    CHECK(value(l) == doctest::Approx(0.472345).epsilon(1e-6));
  }
  SUBCASE("dropping the third pair recovers bigan bitwise") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      Var real = t.constant(random_matrix(5, 1, rng));
      Var fake = t.constant(random_matrix(4, 1, rng));
      Var recon = t.constant(random_matrix(5, 1, rng));
      CHECK(value(augmented_bigan_disc_loss(real, fake, recon, {1.0, 1.0, 0.0})) ==
            value(bigan_disc_loss(real, fake)));
    }
  }
  SUBCASE("identity reconstruction reduces to bigan on the batch") {
    // Same fake logits for the latent and reconstruction pairs.
    Var real = t.constant(column({0.7, 0.6}));
    Var fake = t.constant(column({0.1, 0.35}));
    CHECK(value(augmented_bigan_disc_loss(real, fake, fake)) ==
          doctest::Approx(value(bigan_disc_loss(real, fake))).epsilon(1e-15));
  }
  SUBCASE("saturated outputs stay finite and are counted") {
    Tape s;
    Var real = s.constant(Tensor({1, 1}, {-1e4}));
    Var fake = s.constant(Tensor({1, 1}, {1e4}));
    Var l = augmented_bigan_disc_loss(real, fake, fake);
    CHECK(std::isfinite(value(l)));
    CHECK(value(l) == doctest::Approx(-2.0 * std::log(1e-12)).epsilon(1e-12));
    CHECK(s.saturation_count() == 3);
  }
}

TEST_CASE("feature matching examples") {
  Tape t;
  Var a = t.constant(Tensor::matrix({{1, 2}, {3, -1}}));
  CHECK(value(feature_matching_loss(a, a)) == 0.0);
  CHECK(value(feature_matching_loss(t.constant(Tensor::matrix({{1, 0, 0}})),
                                    t.constant(Tensor::matrix({{0, 0, 0}})))) == 1.0);
  CHECK(value(feature_matching_loss(t.constant(Tensor::matrix({{1, 2}})),
                                    t.constant(Tensor::matrix({{0, 0}})))) == 5.0);
  CHECK_THROWS_AS(feature_matching_loss(t.constant(Tensor({0, 2})), a), std::invalid_argument);
}

TEST_CASE("semi-supervised discriminator loss examples") {
  Tape t;
  Var uniform = t.constant(Tensor({3, 2}));
  const std::vector<std::size_t> y{0, 1, 1};
  CHECK(value(ssl_sup_loss(uniform, y)) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(value(ssl_unsup_loss(uniform, uniform)) ==
        doctest::Approx(-std::log(1.0 / 3) - std::log(2.0 / 3)).epsilon(1e-14));
  CHECK(value(ssl_unsup_loss(uniform, uniform)) == doctest::Approx(1.504077).epsilon(1e-6));
  // Weak fakes: logits very negative on fakes, very positive on reals.
  Var reals = t.constant(Tensor({2, 2}, 30.0));
  Var fakes = t.constant(Tensor({2, 2}, -30.0));
  CHECK(value(ssl_unsup_loss(reals, fakes)) < 2.1e-12);
  const std::vector<std::size_t> bad{0, 2, 1};
  CHECK_THROWS_AS(ssl_sup_loss(uniform, bad), std::out_of_range);
}

TEST_CASE("regular generator loss examples") {
  Tape t;
  // p(k+1) = 1 / (1 + sum exp l); with k = 1, l = logit-free: p = 1/(1+e^l).
  const auto logits_for = [](std::vector<double> p_fake) {
    const std::size_t n = p_fake.size();
    for (auto& p : p_fake) p = std::log((1.0 - p) / p);
    return Tensor({n, 1}, std::move(p_fake));
  };
  CHECK(value(regular_gen_loss(t.constant(Tensor({1, 1}, {-1e4})))) ==
        doctest::Approx(std::log1p(-1e-12)).epsilon(1e-12));
  CHECK(value(regular_gen_loss(t.constant(logits_for({0.5})))) ==
        doctest::Approx(-0.693147).epsilon(1e-6));
  CHECK(value(regular_gen_loss(t.constant(logits_for({0.9, 0.5})))) ==
        doctest::Approx(0.5 * (std::log(0.9) + std::log(0.5))).epsilon(1e-14));
}

TEST_CASE("property: unsupervised loss agrees with the logit rewrite") {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 1 + rng.below(4);
    Tensor real({5, k}), fake({3, k});
    for (auto& v : real.storage()) v = rng.uniform(-6, 6);
    for (auto& v : fake.storage()) v = rng.uniform(-6, 6);
    Tape t;
    const double tape_value = value(ssl_unsup_loss(t.constant(real), t.constant(fake)));
    const double probs = ssl_unsup_from_probabilities(real, fake);
    const double rewrite = ssl_unsup_logit_form(real, fake);
    CHECK(std::abs(probs - rewrite) < 1e-10);
    CHECK(std::abs(tape_value - rewrite) < 1e-10);
  }
}

TEST_CASE("tangentprop examples") {
  Rng rng(5);
  SUBCASE("identity classifier, v = (0.1, 0)") {
    const TangentBasis b{Tensor({1, 2}), Tensor::matrix({{0.1, 0.0}}), TangentSource::ground_truth};
    const TangentBasis* p = &b;
    Tape t;
    Var pen = tangentprop_penalty(t, linear_fn(Tensor::identity(2)), Tensor::matrix({{0.3, -1}}),
                                  {&p, 1}, rng, {false, 0.0});
    CHECK(value(pen) == doctest::Approx(0.01).epsilon(1e-12));
  }
  SUBCASE("zero tangent") {
    const TangentBasis b{Tensor({1, 3}), Tensor({1, 3}), TangentSource::ground_truth};
    const TangentBasis* p = &b;
    Tape t;
    CHECK(value(tangentprop_penalty(t, linear_fn(random_matrix(2, 3, rng)),
                                    Tensor::matrix({{1, 2, 3}}), {&p, 1}, rng)) == 0.0);
  }
  SUBCASE("linear classifier gives |Wv|^2 exactly") {
    for (int trial = 0; trial < 100; ++trial) {
      const Tensor w = random_matrix(3, 6, rng);
      const Tensor v = random_matrix(1, 6, rng);
      const TangentBasis b{Tensor({1, 6}), v, TangentSource::ground_truth};
      const TangentBasis* p = &b;
      Tape t;
      const double pen = value(tangentprop_penalty(t, linear_fn(w), random_matrix(1, 6, rng),
                                                   {&p, 1}, rng, {false, 0.0}));
      const Tensor wv = matmul(v, transpose(w));
      double expect = 0.0;
      for (double e : wv.storage()) expect += e * e;
      CHECK(std::abs(pen - expect) < 1e-12 * std::max(1.0, expect));
    }
  }
  SUBCASE("normalized tangents move by the configured step") {
    const TangentBasis b{Tensor({1, 2}), Tensor::matrix({{3, 4}}), TangentSource::ground_truth};
    const TangentBasis* p = &b;
    Tape t;
    CHECK(value(tangentprop_penalty(t, linear_fn(Tensor::identity(2)), Tensor({1, 2}), {&p, 1},
                                    rng, {true, 0.1})) == doctest::Approx(0.01).epsilon(1e-12));
  }
  SUBCASE("empty tangent set") {
    const TangentBasis b{Tensor({1, 2}), Tensor({0, 2}), TangentSource::ground_truth};
    const TangentBasis* p = &b;
    Tape t;
    CHECK_THROWS_AS(tangentprop_penalty(t, linear_fn(Tensor::identity(2)), Tensor({1, 2}),
                                        {&p, 1}, rng),
                    std::invalid_argument);
  }
}

TEST_CASE("jacobian norm penalty and exact value") {
  Rng rng(6);
  SUBCASE("hand example") {
    CHECK(jacnorm_exact(linear_fn(Tensor::matrix({{1, 2}, {3, 4}})), Tensor({1, 2})) == 30.0);
  }
  SUBCASE("constant map") {
    const TapeFn c = [](Tape&, Var x) { return scale(sum_cols(x), 0.0); };
    CHECK(jacnorm_exact(c, Tensor::matrix({{1, 2, 3}})) == 0.0);
  }
  SUBCASE("zero weights give zero penalty") {
    Tape t;
    CHECK(value(jacnorm_penalty(t, linear_fn(Tensor({2, 3})), Tensor({4, 3}), 0.1, rng)) == 0.0);
  }
  SUBCASE("identity: mean penalty is n sigma^2") {
    const double sigma = 0.1;
    const std::size_t n = 4, draws = 100000;
    Tape t;
    const double mean =
        value(jacnorm_penalty(t, linear_fn(Tensor::identity(n)), Tensor({draws, n}), sigma, rng));
    CHECK(mean == doctest::Approx(n * sigma * sigma).epsilon(0.02));
  }
  SUBCASE("linear map: mean penalty is sigma^2 |W|_F^2") {
    const double sigma = 0.1;
    const Tensor w = random_matrix(3, 5, rng);
    Tape t;
    const double mean = value(jacnorm_penalty(t, linear_fn(w), Tensor({100000, 5}), sigma, rng));
    double fro = 0.0;
    for (double e : w.storage()) fro += e * e;
    CHECK(mean / (sigma * sigma) == doctest::Approx(fro).epsilon(0.02));
    CHECK(jacnorm_exact(linear_fn(w), Tensor({1, 5})) == doctest::Approx(fro).epsilon(1e-14));
  }
  SUBCASE("invalid sigma") {
    Tape t;
    CHECK_THROWS_AS(jacnorm_penalty(t, linear_fn(Tensor::identity(2)), Tensor({1, 2}), 0.0, rng),
                    std::invalid_argument);
  }
}

TEST_CASE("final semi-supervised objective bookkeeping") {
  Classifier f(ClassifierSpec{4, 3, {8, 8}, true, 7});
  Rng data_rng(8);
  SslBatch batch;
  batch.labeled_x = random_matrix(6, 4, data_rng);
  batch.labeled_y = {0, 1, 2, 0, 1, 2};
  batch.unlabeled_x = random_matrix(10, 4, data_rng);
  batch.fake_x = random_matrix(10, 4, data_rng);
  std::vector<TangentBasis> bases;
  for (int i = 0; i < 10; ++i) {
    bases.push_back({Tensor({1, 4}), random_matrix(2, 4, data_rng), TangentSource::ground_truth});
  }
  for (const auto& b : bases) batch.tangents.push_back(&b);

  SUBCASE("zero weights reduce to the plain semi-supervised value") {
    Tape t;
    Rng rng(1);
    SslLossConfig cfg;
    cfg.lambda1 = cfg.lambda2 = 0.0;
    const SslLoss l = final_ssl_loss(t, f, batch, cfg, rng);
    Tape u;
    const double sup = value(ssl_sup_loss(f.logits(u, u.constant(batch.labeled_x)), batch.labeled_y));
    const double unsup = value(ssl_unsup_loss(f.logits(u, u.constant(batch.unlabeled_x)),
                                              f.logits(u, u.constant(batch.fake_x))));
    CHECK(l.report.total == sup + unsup);
    CHECK(l.report.component("tangent") == 0.0);
    CHECK(l.report.component("jacnorm") == 0.0);
    CHECK(rng.counter() == 0);
  }
  SUBCASE("total is the weighted sum of components") {
    for (double lam : {0.5, 1.0, 2.5}) {
      Tape t;
      Rng rng(2);
      SslLossConfig cfg;
      cfg.lambda1 = lam;
      cfg.lambda2 = 1.0;
      const SslLoss l = final_ssl_loss(t, f, batch, cfg, rng);
      const auto& r = l.report;
      const double rebuilt = r.component("sup") + r.component("unsup") +
                             lam * r.component("tangent") + 1.0 * r.component("jacnorm");
      CHECK(std::abs(r.total - rebuilt) < 1e-12);
      CHECK(r.component("tangent") > 0.0);
      CHECK(r.component("jacnorm") > 0.0);
    }
  }
  SUBCASE("missing tangents with lambda1 > 0") {
    SslBatch b = batch;
    b.tangents.clear();
    Tape t;
    Rng rng(3);
    CHECK_THROWS_AS(final_ssl_loss(t, f, b, SslLossConfig{}, rng), std::invalid_argument);
  }
  SUBCASE("supervised only") {
    SslBatch b;
    b.labeled_x = batch.labeled_x;
    b.labeled_y = batch.labeled_y;
    Tape t;
    Rng rng(4);
    const SslLoss l = final_ssl_loss(t, f, b, SslLossConfig{}, rng);
    CHECK(l.report.component("unsup") == 0.0);
    CHECK(l.report.total == l.report.component("sup"));
  }
  SUBCASE("metrics rows") {
    Tape t;
    Rng rng(5);
    const SslLoss l = final_ssl_loss(t, f, batch, SslLossConfig{}, rng);
    std::ostringstream out;
    write_metrics_header(out);
    write_metrics_rows(out, 12, l.report);
    const std::string s = out.str();
    CHECK(s.rfind("step,component,value\n12,sup,", 0) == 0);
    CHECK(s.find("12,total,") != std::string::npos);
  }
}

TEST_CASE("no loss returns non-finite values on extreme model outputs") {
  Tape t;
  for (double big : {1e3, 1e8, 1e300}) {
    Var hi = t.constant(Tensor({2, 2}, big));
    Var lo = t.constant(Tensor({2, 2}, -big));
    const std::vector<std::size_t> y{0, 1};
    for (Var l : {ssl_sup_loss(hi, y), ssl_unsup_loss(hi, lo), ssl_unsup_loss(lo, hi),
                  regular_gen_loss(hi), regular_gen_loss(lo)}) {
      CHECK(std::isfinite(value(l)));
    }
    Var chi = t.constant(Tensor({2, 1}, big));
    Var clo = t.constant(Tensor({2, 1}, -big));
    CHECK(std::isfinite(value(augmented_bigan_disc_loss(clo, chi, chi))));
    CHECK(std::isfinite(value(bigan_disc_loss(clo, chi))));
  }
  CHECK(t.saturation_count() > 0);
}

TEST_CASE("loss gradient checks") {
  GradCheckOptions opt;
  for (const auto& c : loss_gradcheck_cases()) {
    const auto r = run_gradcheck(c, opt, Rng(11));
    INFO(r.name << " max error " << r.max_error);
    CHECK(r.probes >= 100);
    CHECK(r.passed());
  }
  for (const auto& r : model_loss_gradchecks(opt, Rng(12))) {
    INFO(r.name << " max error " << r.max_error);
    CHECK(r.probes >= 100);
    CHECK(r.passed());
  }
}
