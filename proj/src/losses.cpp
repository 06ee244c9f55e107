#include "mssl/losses.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <stdexcept>

#include "mssl/numerics.hpp"

namespace mssl {

namespace {

const double kLogLo = std::log(kProbClamp);
const double kLogHi = std::log1p(-kProbClamp);

void require_rows(Var v, const char* who) {
  if (v.rows() == 0) throw std::invalid_argument(std::string(who) + ": empty batch");
}

void require_logit_column(Var v, const char* who) {
  require_rows(v, who);
  if (v.cols() != 1) throw DimensionError(std::string(who) + ": expected B x 1 realness logits");
}

// Mean of log(1 - sigmoid(a)) = mean of log(sigmoid(-a)).
Var mean_log_not(Var logits) { return mean_all(clamped_log_sigmoid(scale(logits, -1.0))); }

Var mean_log(Var logits) { return mean_all(clamped_log_sigmoid(logits)); }

Tensor uniform(Rng& rng, std::size_t r, std::size_t c, double lo, double hi) {
  Tensor t({r, c});
  for (auto& v : t.storage()) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace

Var clamped_log_sigmoid(Var logit) { return clamp(log_sigmoid(logit), kLogLo, kLogHi); }

Var clamp_log_prob(Var log_prob) { return clamp(log_prob, kLogLo, kLogHi); }

double LossReport::component(const std::string& name) const {
  for (const auto& [n, v] : components) {
    if (n == name) return v;
  }
  throw std::out_of_range("loss report has no component '" + name + "'");
}

void LossReport::set(const std::string& name, double value) {
  for (auto& [n, v] : components) {
    if (n == name) {
      v = value;
      return;
    }
  }
  components.emplace_back(name, value);
}

void write_metrics_header(std::ostream& out) { out << "step,component,value\n"; }

void write_metrics_rows(std::ostream& out, std::size_t step, const LossReport& report) {
  char buf[32];
  const auto row = [&](const std::string& name, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << step << "," << name << "," << buf << "\n";
  };
  for (const auto& [name, v] : report.components) row(name, v);
  row("total", report.total);
  row("saturations", static_cast<double>(report.saturations));
}

Var bigan_disc_loss(Var real_logits, Var fake_logits) {
  require_logit_column(real_logits, "bigan_disc_loss");
  require_logit_column(fake_logits, "bigan_disc_loss");
  return scale(add(mean_log(real_logits), mean_log_not(fake_logits)), -1.0);
}

Var augmented_bigan_disc_loss(Var real_logits, Var latent_fake_logits, Var recon_fake_logits,
                              const AugmentedWeights& w) {
  require_logit_column(real_logits, "augmented_bigan_disc_loss");
  require_logit_column(latent_fake_logits, "augmented_bigan_disc_loss");
  require_logit_column(recon_fake_logits, "augmented_bigan_disc_loss");
  Var sum = add(scale(mean_log(real_logits), w.real),
                scale(mean_log_not(latent_fake_logits), w.latent_fake));
  sum = add(sum, scale(mean_log_not(recon_fake_logits), w.recon_fake));
  return scale(sum, -1.0);
}

Var feature_matching_loss(Var features_a, Var features_b) {
  require_rows(features_a, "feature_matching_loss");
  require_rows(features_b, "feature_matching_loss");
  if (features_a.cols() != features_b.cols()) {
    throw DimensionError("feature_matching_loss: feature widths differ");
  }
  return sum_all(square(sub(mean_rows(features_a), mean_rows(features_b))));
}

Var ssl_sup_loss(Var logits, std::span<const std::size_t> labels) {
  require_rows(logits, "ssl_sup_loss");
  if (labels.size() != logits.rows()) throw DimensionError("ssl_sup_loss: label count mismatch");
  for (auto y : labels) {
    if (y >= logits.cols()) {
      throw std::out_of_range("ssl_sup_loss: label " + std::to_string(y + 1) + " outside 1.." +
                              std::to_string(logits.cols()));
    }
  }
  Var log_p = sub(pick_cols(logits, labels), logsumexp(logits, false));
  return scale(mean_all(clamp_log_prob(log_p)), -1.0);
}

Var ssl_unsup_loss(Var real_logits, Var fake_logits) {
  require_rows(real_logits, "ssl_unsup_loss");
  require_rows(fake_logits, "ssl_unsup_loss");
  Var log_fake_on_fakes = clamp_log_prob(scale(logsumexp(fake_logits, true), -1.0));
  Var log_real_on_reals =
      clamp_log_prob(sub(logsumexp(real_logits, false), logsumexp(real_logits, true)));
  return scale(add(mean_all(log_fake_on_fakes), mean_all(log_real_on_reals)), -1.0);
}

Var regular_gen_loss(Var fake_logits) {
  require_rows(fake_logits, "regular_gen_loss");
  return mean_all(clamp_log_prob(scale(logsumexp(fake_logits, true), -1.0)));
}

double ssl_unsup_from_probabilities(const Tensor& real_logits, const Tensor& fake_logits) {
  double fake_term = 0.0;
  for (std::size_t r = 0; r < fake_logits.rows(); ++r) {
    fake_term += std::log(softmax_with_fake(fake_logits.row(r)).back());
  }
  double real_term = 0.0;
  for (std::size_t r = 0; r < real_logits.rows(); ++r) {
    real_term += std::log(1.0 - softmax_with_fake(real_logits.row(r)).back());
  }
  return -fake_term / static_cast<double>(fake_logits.rows()) -
         real_term / static_cast<double>(real_logits.rows());
}

double ssl_unsup_logit_form(const Tensor& real_logits, const Tensor& fake_logits) {
  const auto sum_exp = [](std::span<const double> l) {
    double s = 0.0;
    for (double v : l) s += std::exp(v);
    return s;
  };
  double fake_term = 0.0;
  for (std::size_t r = 0; r < fake_logits.rows(); ++r) {
    fake_term += std::log1p(sum_exp(fake_logits.row(r)));
  }
  double real_term = 0.0;
  for (std::size_t r = 0; r < real_logits.rows(); ++r) {
    const double s = sum_exp(real_logits.row(r));
    real_term += std::log(s) - std::log1p(s);
  }
  return fake_term / static_cast<double>(fake_logits.rows()) -
         real_term / static_cast<double>(real_logits.rows());
}

TapeFn classifier_output_fn(const Classifier& c, PenaltyOutput output) {
  return [&c, output](Tape& tape, Var x) {
    Var logits = c.logits(tape, x);
    return output == PenaltyOutput::probabilities ? softmax(logits) : logits;
  };
}

Var tangentprop_penalty(Tape& tape, const TapeFn& c, const Tensor& x,
                        std::span<const TangentBasis* const> tangents, Rng& rng,
                        const TangentPropConfig& config) {
  if (tangents.size() != x.rows()) {
    throw DimensionError("tangentprop_penalty: need one tangent basis per row");
  }
  Tensor shifted = x;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const TangentBasis* basis = tangents[r];
    if (basis == nullptr || basis->count() == 0) {
      throw std::invalid_argument("tangentprop_penalty: empty tangent set for row " +
                                  std::to_string(r));
    }
    if (basis->ambient_dim() != x.cols()) {
      throw DimensionError("tangentprop_penalty: tangent dimension mismatch");
    }
    const auto v = basis->directions.row(rng.below(basis->count()));
    double factor = 1.0;
    if (config.normalize) {
      double n2 = 0.0;
      for (double e : v) n2 += e * e;
      factor = n2 > 0.0 ? config.step / std::sqrt(n2) : 0.0;
    }
    auto out = shifted.row(r);
    for (std::size_t j = 0; j < v.size(); ++j) out[j] += factor * v[j];
  }
  Var diff = sub(c(tape, tape.constant(std::move(shifted))), c(tape, tape.constant(x)));
  return mean_all(sum_cols(square(diff)));
}

Var jacnorm_penalty(Tape& tape, const TapeFn& c, const Tensor& x, double sigma, Rng& rng) {
  if (!(sigma > 0.0)) throw std::invalid_argument("jacnorm_penalty: sigma must be > 0");
  Tensor shifted = x;
  for (auto& v : shifted.storage()) v += sigma * rng.normal();
  Var diff = sub(c(tape, tape.constant(std::move(shifted))), c(tape, tape.constant(x)));
  return mean_all(sum_cols(square(diff)));
}

double jacnorm_exact(const TapeFn& c, const Tensor& x) {
  if (x.rows() == 0) throw std::invalid_argument("jacnorm_exact: empty batch");
  double total = 0.0;
  for (const Tensor& j : jacobians(c, x)) {
    for (double v : j.storage()) total += v * v;
  }
  return total / static_cast<double>(x.rows());
}

SslLoss final_ssl_loss(Tape& tape, const Classifier& f, const SslBatch& batch,
                       const SslLossConfig& config, Rng& rng) {
  if (config.lambda1 < 0.0 || config.lambda2 < 0.0) {
    throw std::invalid_argument("final_ssl_loss: lambda1 and lambda2 must be >= 0");
  }
  const bool has_unlabeled = batch.unlabeled_x.rows() > 0;
  if (has_unlabeled != (batch.fake_x.rows() > 0)) {
    throw std::invalid_argument("final_ssl_loss: unlabeled and fake batches must both be present");
  }
  SslLoss out;
  double sup = 0.0, unsup = 0.0, tangent = 0.0, jac = 0.0;
  std::optional<Var> total;
  const auto accumulate = [&](Var term) { total = total ? add(*total, term) : term; };

  if (batch.labeled_x.rows() > 0) {
    Var l = ssl_sup_loss(f.logits(tape, tape.constant(batch.labeled_x)), batch.labeled_y);
    sup = l.value()[0];
    accumulate(l);
  }
  if (has_unlabeled) {
    Var real = f.logits(tape, tape.constant(batch.unlabeled_x));
    Var fake = f.logits(tape, tape.constant(batch.fake_x));
    Var l = ssl_unsup_loss(real, fake);
    unsup = l.value()[0];
    accumulate(l);
  }
  if (has_unlabeled && (config.lambda1 > 0.0 || config.lambda2 > 0.0)) {
    const TapeFn c = classifier_output_fn(f, config.output);
    if (config.lambda1 > 0.0) {
      if (batch.tangents.size() != batch.unlabeled_x.rows()) {
        throw std::invalid_argument("final_ssl_loss: lambda1 > 0 requires tangents for every "
                                    "unlabeled example");
      }
      Var t = tangentprop_penalty(tape, c, batch.unlabeled_x, batch.tangents, rng, config.tangent);
      tangent = t.value()[0];
      accumulate(scale(t, config.lambda1));
    }
    if (config.lambda2 > 0.0) {
      Var j = jacnorm_penalty(tape, c, batch.unlabeled_x, config.sigma, rng);
      jac = j.value()[0];
      accumulate(scale(j, config.lambda2));
    }
  }
  if (!total) throw std::invalid_argument("final_ssl_loss: empty batch");
  out.total = *total;
  out.report.set("sup", sup);
  out.report.set("unsup", unsup);
  out.report.set("tangent", tangent);
  out.report.set("jacnorm", jac);
  out.report.total = out.total.value()[0];
  out.report.saturations = tape.saturation_count();
  return out;
}

std::vector<GradCheckCase> loss_gradcheck_cases() {
  std::vector<GradCheckCase> cases;
  const auto logits = [](std::size_t r, std::size_t c) {
    return [r, c](Rng& rng) { return std::vector<Tensor>{uniform(rng, r, c, -4, 4)}; };
  };
  const auto two = [](std::size_t r1, std::size_t r2, std::size_t c) {
    return [=](Rng& rng) {
      return std::vector<Tensor>{uniform(rng, r1, c, -4, 4), uniform(rng, r2, c, -4, 4)};
    };
  };

  cases.push_back({"bigan_disc_loss", two(4, 3, 1), [](Tape&, std::span<const Var> v) {
                     return bigan_disc_loss(v[0], v[1]);
                   }});
  cases.push_back({"augmented_bigan_disc_loss",
                   [](Rng& rng) {
                     return std::vector<Tensor>{uniform(rng, 4, 1, -4, 4), uniform(rng, 3, 1, -4, 4),
                                                uniform(rng, 4, 1, -4, 4)};
                   },
                   [](Tape&, std::span<const Var> v) {
                     return augmented_bigan_disc_loss(v[0], v[1], v[2]);
                   }});
  cases.push_back({"feature_matching_loss", two(4, 3, 5), [](Tape&, std::span<const Var> v) {
                     return feature_matching_loss(v[0], v[1]);
                   }});
  cases.push_back({"ssl_sup_loss", logits(4, 3), [](Tape&, std::span<const Var> v) {
                     const std::vector<std::size_t> y{0, 2, 1, 2};
                     return ssl_sup_loss(v[0], y);
                   }});
  cases.push_back({"ssl_unsup_loss", two(4, 3, 3), [](Tape&, std::span<const Var> v) {
                     return ssl_unsup_loss(v[0], v[1]);
                   }});
  cases.push_back({"regular_gen_loss", logits(4, 2), [](Tape&, std::span<const Var> v) {
                     return regular_gen_loss(v[0]);
                   }});

  // Penalties w.r.t. the weights of a one-hidden-layer classifier
  // c(x) = softmax(W2 tanh(W1 x + b1) + b2), with fixed data and draws.
  const auto net_inputs = [](Rng& rng) {
    return std::vector<Tensor>{uniform(rng, 4, 3, -1, 1), uniform(rng, 1, 4, -1, 1),
                               uniform(rng, 2, 4, -1, 1), uniform(rng, 1, 2, -1, 1)};
  };
  const auto net = [](std::span<const Var> v) -> TapeFn {
    const Var w1 = v[0], b1 = v[1], w2 = v[2], b2 = v[3];
    return [=](Tape&, Var x) { return softmax(affine(tanh(affine(x, w1, b1)), w2, b2)); };
  };
  static const Tensor x = Tensor::matrix({{0.3, -0.7, 1.1}, {-0.2, 0.5, 0.0}, {0.9, 0.1, -0.4}});
  cases.push_back({"tangentprop_penalty", net_inputs, [net](Tape& tape, std::span<const Var> v) {
                     static const TangentBasis basis{
                         Tensor({1, 3}), Tensor::matrix({{1, 0, 0}, {0.6, 0.8, 0}, {0, -1, 2}}),
                         TangentSource::ground_truth};
                     const std::vector<const TangentBasis*> t(3, &basis);
                     Rng rng(17);
                     return tangentprop_penalty(tape, net(v), x, t, rng, {true, 0.3});
                   }});
  cases.push_back({"jacnorm_penalty", net_inputs, [net](Tape& tape, std::span<const Var> v) {
                     Rng rng(18);
                     return jacnorm_penalty(tape, net(v), x, 0.2, rng);
                   }});
  return cases;
}

std::vector<GradCheckResult> model_loss_gradchecks(const GradCheckOptions& options, Rng rng) {
  std::vector<GradCheckResult> results;
  const auto run = [&](const std::string& name, ParamStore& store,
                       const std::function<Var(Tape&)>& fn) {
    GradCheckResult r;
    r.name = name;
    r.tolerance = options.tolerance;
    for (std::size_t p = 0; p < options.probes; ++p) {
      std::vector<double> flat = store.flatten();
      for (auto& v : flat) v = rng.uniform(-1.0, 1.0);
      store.unflatten(flat);
      r.max_error = std::max(r.max_error, param_gradient_error(fn, store, options.eps));
      ++r.probes;
    }
    results.push_back(r);
  };

  {
    Classifier f(ClassifierSpec{3, 2, {4}, true, 5});
    static const TangentBasis basis{Tensor({1, 3}), Tensor::matrix({{1, 0, 0}, {0, 0.6, 0.8}}),
                                    TangentSource::ground_truth};
    SslBatch batch;
    batch.labeled_x = Tensor::matrix({{0.1, 0.2, -0.3}, {1.0, -0.5, 0.2}});
    batch.labeled_y = {0, 1};
    batch.unlabeled_x = Tensor::matrix({{0.4, -0.1, 0.3}, {-0.6, 0.8, 0.1}, {0.2, 0.2, 0.9}});
    batch.fake_x = Tensor::matrix({{0.7, 0.7, -0.7}, {-0.3, -0.2, 0.5}});
    batch.tangents.assign(3, &basis);
    run("final_ssl_loss", f.params(), [&](Tape& tape) {
      Rng draws(19);
      return final_ssl_loss(tape, f, batch, SslLossConfig{}, draws).total;
    });
  }
  {
    DualDiscriminatorSpec spec;
    spec.latent_dim = 2;
    spec.data_dim = 3;
    spec.z_hidden = {3};
    spec.x_hidden = {3};
    spec.trunk_hidden = {3};
    spec.seed = 6;
    DualDiscriminator d(spec);
    const Tensor z = Tensor::matrix({{0.5, -0.5}, {0.1, 0.9}});
    const Tensor x = Tensor::matrix({{0.3, 0.2, -0.1}, {-0.4, 0.6, 0.0}});
    const Tensor hx = Tensor::matrix({{-0.2, 0.3}, {0.7, 0.1}});
    const Tensor gz = Tensor::matrix({{0.0, 0.5, 0.5}, {0.2, -0.9, 0.4}});
    const Tensor ghx = Tensor::matrix({{0.1, 0.1, -0.2}, {-0.3, 0.5, 0.2}});
    const auto logit = [&](Tape& tape, const Tensor& zz, const Tensor& xx) {
      return d.forward(tape, tape.constant(zz), tape.constant(xx)).realness_logit;
    };
    run("bigan_disc_loss(params)", d.params(), [&](Tape& tape) {
      return bigan_disc_loss(logit(tape, hx, x), logit(tape, z, gz));
    });
    run("augmented_bigan_disc_loss(params)", d.params(), [&](Tape& tape) {
      return augmented_bigan_disc_loss(logit(tape, hx, x), logit(tape, z, gz), logit(tape, hx, ghx));
    });
    run("feature_matching_loss(params)", d.params(), [&](Tape& tape) {
      Var a = d.feature_layer(tape, tape.constant(hx), tape.constant(x), FeatureTag::trunk_penultimate);
      Var b = d.feature_layer(tape, tape.constant(z), tape.constant(gz), FeatureTag::trunk_penultimate);
      return feature_matching_loss(a, b);
    });
  }
  return results;
}

}  // namespace mssl
