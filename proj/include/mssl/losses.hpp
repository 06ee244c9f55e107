#pragma once

#include <cmath>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "mssl/gradcheck.hpp"
#include "mssl/jacobian.hpp"
#include "mssl/models.hpp"
#include "mssl/tangent.hpp"

namespace mssl {

/// Probabilities entering a log are kept inside [kProbClamp, 1 - kProbClamp].
inline constexpr double kProbClamp = 1e-12;

/// log(sigmoid(a)) clamped to [log 1e-12, log(1 - 1e-12)].
Var clamped_log_sigmoid(Var logit);
/// Clamp a log-probability node to the same range.
Var clamp_log_prob(Var log_prob);

struct LossReport {
  double total = 0.0;
  std::vector<std::pair<std::string, double>> components;
  std::size_t saturations = 0;

  /// Throws std::out_of_range for unknown names.
  double component(const std::string& name) const;
  void set(const std::string& name, double value);
};

/// One line per component: step,name,value.
void write_metrics_header(std::ostream& out);
void write_metrics_rows(std::ostream& out, std::size_t step, const LossReport& report);

// ---- BiGAN family, on realness logits (B x 1) ----

/// -E log f(h(x), x) - E log(1 - f(z, g(z)))
Var bigan_disc_loss(Var real_logits, Var fake_logits);

struct AugmentedWeights {
  double real = 1.0;
  double latent_fake = 0.5;  // (z, g(z))
  double recon_fake = 0.5;   // (h(x), g(h(x)))

  friend bool operator==(const AugmentedWeights&, const AugmentedWeights&) = default;
};

/// -w_r E log f(h(x), x) - w_l E log(1 - f(z, g(z))) - w_c E log(1 - f(h(x), g(h(x)))).
/// With weights (1, 1, 0) this returns bigan_disc_loss bitwise.
Var augmented_bigan_disc_loss(Var real_logits, Var latent_fake_logits, Var recon_fake_logits,
                              const AugmentedWeights& w = {});

/// Squared distance between the per-column means of two feature batches.
Var feature_matching_loss(Var features_a, Var features_b);

// ---- (k+1)-class semi-supervised discriminator, on class logits (B x k) ----

/// -E log p(y | x, y <= k)
Var ssl_sup_loss(Var logits, std::span<const std::size_t> labels);
/// -E_g log p(k+1 | x_g) - E_x log(1 - p(k+1 | x))
Var ssl_unsup_loss(Var real_logits, Var fake_logits);
/// E_g log p(k+1 | x_g), minimized by the generator.
Var regular_gen_loss(Var fake_logits);

/// Plain evaluations used as independent references.
double ssl_unsup_from_probabilities(const Tensor& real_logits, const Tensor& fake_logits);
double ssl_unsup_logit_form(const Tensor& real_logits, const Tensor& fake_logits);

// ---- invariance penalties ----

enum class PenaltyOutput { probabilities, logits };

/// c(x): the renormalized k-class probabilities by default, or raw logits.
TapeFn classifier_output_fn(const Classifier& c, PenaltyOutput output);

struct TangentPropConfig {
  /// Rescale each drawn tangent to unit norm times `step`.
  bool normalize = true;
  double step = 0.1;
};

/// Mean over rows of |c(x + v) - c(x)|^2, with v drawn uniformly from the
/// rows of that example's tangent basis. One draw per row per call.
Var tangentprop_penalty(Tape& tape, const TapeFn& c, const Tensor& x,
                        std::span<const TangentBasis* const> tangents, Rng& rng,
                        const TangentPropConfig& config = {});

/// Mean over rows of |c(x + delta) - c(x)|^2, delta ~ N(0, sigma^2 I).
Var jacnorm_penalty(Tape& tape, const TapeFn& c, const Tensor& x, double sigma, Rng& rng);

/// Mean over rows of |J_x c|_F^2.
double jacnorm_exact(const TapeFn& c, const Tensor& x);

struct SslBatch {
  Tensor labeled_x;
  std::vector<std::size_t> labeled_y;  // 0-based
  Tensor unlabeled_x;
  Tensor fake_x;
  /// Tangents for each unlabeled row; needed when lambda1 > 0.
  std::vector<const TangentBasis*> tangents;
};

struct SslLossConfig {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double sigma = 0.1;
  TangentPropConfig tangent;
  PenaltyOutput output = PenaltyOutput::probabilities;
};

struct SslLoss {
  Var total;
  LossReport report;  // components sup, unsup, tangent, jacnorm
};

/// L_sup + L_unsup + lambda1 * tangent + lambda2 * jacnorm, penalties on the
/// unlabeled rows. Zero weights skip the penalty and its random draws.
SslLoss final_ssl_loss(Tape& tape, const Classifier& f, const SslBatch& batch,
                       const SslLossConfig& config, Rng& rng);

/// Gradient checks of every loss with respect to its inputs and the
/// parameters of a small classifier.
std::vector<GradCheckCase> loss_gradcheck_cases();

/// Gradient checks of the model-level objectives (final SSL loss, BiGAN and
/// augmented losses through a dual discriminator, feature matching) with
/// respect to model parameters, redrawn for every probe.
std::vector<GradCheckResult> model_loss_gradchecks(const GradCheckOptions& options, Rng rng);

}  // namespace mssl
