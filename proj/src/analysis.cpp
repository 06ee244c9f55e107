#include "mssl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "mssl/losses.hpp"
#include "mssl/numerics.hpp"

namespace mssl {

namespace {

// Per-logit gradient sum: sum_r sum_i w[r][i] grad l_i(x_r), one backward
// pass per logit index.
std::vector<double> weighted_logit_gradient(const LogitModel& f, const Tensor& x,
                                            const Tensor& weights) {
  Tape tape;
  Var logits = f.logits(tape, tape.constant(x));
  std::vector<double> total(f.params->num_scalars(), 0.0);
  for (std::size_t i = 0; i < logits.cols(); ++i) {
    Tensor seed({logits.rows(), logits.cols()});
    for (std::size_t r = 0; r < logits.rows(); ++r) seed(r, i) = weights(r, i);
    tape.backward(logits, seed);
    const auto g = tape.gradient(*f.params);
    for (std::size_t j = 0; j < total.size(); ++j) total[j] += g[j];
  }
  return total;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

}  // namespace

std::vector<double> a_coeffs(std::span<const double> logits) {
  auto p = softmax_with_fake(logits);
  p.pop_back();
  return p;
}

std::vector<double> b_coeffs(std::span<const double> logits) {
  const double p_fake = softmax_with_fake(logits).back();
  auto cond = softmax(logits);
  for (auto& c : cond) c *= p_fake;
  return cond;
}

LogitModel logit_model(const Classifier& f) {
  return {[&f](Tape& tape, Var x) {
            return f.logits(tape, x);
          },
          &f.params()};
}

GradDecomposition unsup_grad_decomposition(const LogitModel& f, const Tensor& fakes,
                                           const Tensor& reals) {
  if (fakes.rows() == 0 || reals.rows() == 0) {
    throw std::invalid_argument("unsup_grad_decomposition: empty batch");
  }
  GradDecomposition out;
  {
    Tape tape;
    Var loss = ssl_unsup_loss(f.logits(tape, tape.constant(reals)),
                              f.logits(tape, tape.constant(fakes)));
    tape.backward(loss);
    out.direct = tape.gradient(*f.params);
  }

  const auto logits_of = [&](const Tensor& x) {
    Tape tape;
    tape.freeze(*f.params);
    return f.logits(tape, tape.constant(x)).value();
  };
  const Tensor lg = logits_of(fakes), lr = logits_of(reals);
  const std::size_t k = lg.cols();
  Tensor wa({fakes.rows(), k}), wb({reals.rows(), k});
  for (std::size_t r = 0; r < fakes.rows(); ++r) {
    const auto a = a_coeffs(lg.row(r));
    for (std::size_t i = 0; i < k; ++i) wa(r, i) = a[i] / static_cast<double>(fakes.rows());
  }
  for (std::size_t r = 0; r < reals.rows(); ++r) {
    const auto b = b_coeffs(lr.row(r));
    for (std::size_t i = 0; i < k; ++i) wb(r, i) = b[i] / static_cast<double>(reals.rows());
  }
  const auto ga = weighted_logit_gradient(f, fakes, wa);
  const auto gb = weighted_logit_gradient(f, reals, wb);
  out.decomposed.resize(ga.size());
  for (std::size_t j = 0; j < ga.size(); ++j) out.decomposed[j] = ga[j] - gb[j];

  const double scale = std::max(max_abs(out.direct), max_abs(out.decomposed));
  if (scale > 0.0) {
    for (std::size_t j = 0; j < ga.size(); ++j) {
      out.max_rel_err =
          std::max(out.max_rel_err, std::abs(out.decomposed[j] - out.direct[j]) / scale);
    }
  }
  return out;
}

double entropy_real(const Tensor& real_logits) {
  if (real_logits.rows() == 0) throw std::invalid_argument("entropy_real: empty batch");
  double total = 0.0;
  for (std::size_t r = 0; r < real_logits.rows(); ++r) {
    total += entropy(softmax(real_logits.row(r)));
  }
  return total / static_cast<double>(real_logits.rows());
}

double entropy_real(const Classifier& f, const Tensor& reals) {
  return entropy_real(f.logits(reals));
}

const char* fake_regime_name(FakeRegime r) {
  switch (r) {
    case FakeRegime::weak: return "weak";
    case FakeRegime::strong: return "strong";
    case FakeRegime::moderate: return "moderate";
  }
  return "?";
}

FakeRegime classify_regime(double p_fake_on_fakes, double p_fake_on_reals,
                           const RegimeThresholds& t) {
  if (p_fake_on_fakes > t.weak_fake_on_fakes && p_fake_on_reals < t.weak_fake_on_reals) {
    return FakeRegime::weak;
  }
  const auto inside = [&](double p) { return p >= t.strong_lo && p <= t.strong_hi; };
  if (inside(p_fake_on_fakes) && inside(p_fake_on_reals)) return FakeRegime::strong;
  return FakeRegime::moderate;
}

ProbeRecord probe_from_logits(const Tensor& fake_logits, const Tensor& real_logits,
                              std::span<const std::size_t> real_labels, std::size_t step,
                              const RegimeThresholds& thresholds) {
  if (fake_logits.rows() == 0 || real_logits.rows() == 0) {
    throw std::invalid_argument("probe_step: empty batch");
  }
  if (!real_labels.empty() && real_labels.size() != real_logits.rows()) {
    throw DimensionError("probe_step: label count mismatch");
  }
  ProbeRecord rec;
  rec.step = step;
  {
    Tape tape;
    rec.l_unsup = ssl_unsup_loss(tape.constant(real_logits), tape.constant(fake_logits)).value()[0];
  }
  const std::size_t k = fake_logits.cols();
  const double ng = static_cast<double>(fake_logits.rows());
  const double nr = static_cast<double>(real_logits.rows());
  for (std::size_t r = 0; r < fake_logits.rows(); ++r) {
    const auto l = fake_logits.row(r);
    const auto a = a_coeffs(l);
    const std::size_t imax =
        static_cast<std::size_t>(std::max_element(l.begin(), l.end()) - l.begin());
    rec.a_imax_mean += a[imax] / ng;
    if (k > 1) {
      double other = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        if (i != imax) other += a[i];
      }
      rec.a_other_mean += other / static_cast<double>(k - 1) / ng;
    }
    rec.p_fake_on_fakes += softmax_with_fake(l).back() / ng;
  }
  for (std::size_t r = 0; r < real_logits.rows(); ++r) {
    const auto l = real_logits.row(r);
    rec.p_fake_on_reals += softmax_with_fake(l).back() / nr;
    if (!real_labels.empty()) rec.b_true_mean += b_coeffs(l).at(real_labels[r]) / nr;
  }
  rec.entropy_real = entropy_real(real_logits);
  rec.regime = classify_regime(rec.p_fake_on_fakes, rec.p_fake_on_reals, thresholds);
  return rec;
}

ProbeRecord probe_step(const Classifier& f, const Tensor& fakes, const Tensor& reals,
                       std::span<const std::size_t> real_labels, std::size_t step,
                       const RegimeThresholds& thresholds) {
  return probe_from_logits(f.logits(fakes), f.logits(reals), real_labels, step, thresholds);
}

void write_probe_header(std::ostream& out) {
  out << "step,l_unsup,a_imax_mean,a_other_mean,b_true_mean,p_fake_on_fakes,p_fake_on_reals,"
         "entropy_real,regime\n";
}

void write_probe_row(std::ostream& out, const ProbeRecord& r) {
  char buf[32];
  out << r.step;
  for (double v : {r.l_unsup, r.a_imax_mean, r.a_other_mean, r.b_true_mean, r.p_fake_on_fakes,
                   r.p_fake_on_reals, r.entropy_real}) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << "," << buf;
  }
  out << "," << fake_regime_name(r.regime) << "\n";
}

}  // namespace mssl
