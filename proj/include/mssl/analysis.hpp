#pragma once

#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mssl/models.hpp"

namespace mssl {

/// a_i(x_g) = p(y = i | x_g) over the k real classes (fake logit pinned to 0).
std::vector<double> a_coeffs(std::span<const double> logits);
/// b_i(x) = p(y = i | x, y <= k) * p(y = k+1 | x).
std::vector<double> b_coeffs(std::span<const double> logits);

/// Class logits (B x k) of a discriminator whose parameters live in `params`.
struct LogitModel {
  std::function<Var(Tape&, Var)> logits;
  const ParamStore* params = nullptr;
};
LogitModel logit_model(const Classifier& f);

struct GradDecomposition {
  std::vector<double> decomposed;  // E_g sum_i a_i grad l_i(x_g) - E_x sum_i b_i grad l_i(x)
  std::vector<double> direct;      // backward() of L_unsup
  /// max_j |decomposed_j - direct_j| / max(|direct|_inf, |decomposed|_inf),
  /// or 0 when both gradients vanish.
  double max_rel_err = 0.0;
};

GradDecomposition unsup_grad_decomposition(const LogitModel& f, const Tensor& fakes,
                                           const Tensor& reals);

/// Mean entropy (nats) of p(y | x, y <= k) over the rows.
double entropy_real(const Tensor& real_logits);
double entropy_real(const Classifier& f, const Tensor& reals);

enum class FakeRegime { weak, strong, moderate };
const char* fake_regime_name(FakeRegime r);

struct RegimeThresholds {
  double weak_fake_on_fakes = 0.99;  // p(k+1 | x_g) above this ...
  double weak_fake_on_reals = 0.01;  // ... and p(k+1 | x) below this
  double strong_lo = 0.35;           // both inside [lo, hi]
  double strong_hi = 0.65;
};

FakeRegime classify_regime(double p_fake_on_fakes, double p_fake_on_reals,
                           const RegimeThresholds& t = {});

struct ProbeRecord {
  std::size_t step = 0;
  double l_unsup = 0.0;
  double a_imax_mean = 0.0;   // E_g a_{i_max}(x_g), i_max = argmax_i l_i(x_g)
  double a_other_mean = 0.0;  // E_g mean over the other k-1 classes of a_i(x_g)
  double b_true_mean = 0.0;   // E_x b_t(x), t the withheld true label
  double p_fake_on_fakes = 0.0;
  double p_fake_on_reals = 0.0;
  double entropy_real = 0.0;
  FakeRegime regime = FakeRegime::moderate;
};

/// All tracked quantities from one evaluation of f on `fakes` and `reals`.
/// `real_labels` are 0-based true labels of the reals.
ProbeRecord probe_step(const Classifier& f, const Tensor& fakes, const Tensor& reals,
                       std::span<const std::size_t> real_labels, std::size_t step,
                       const RegimeThresholds& thresholds = {});
ProbeRecord probe_from_logits(const Tensor& fake_logits, const Tensor& real_logits,
                              std::span<const std::size_t> real_labels, std::size_t step,
                              const RegimeThresholds& thresholds = {});

void write_probe_header(std::ostream& out);
void write_probe_row(std::ostream& out, const ProbeRecord& r);

}  // namespace mssl
