#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mssl/analysis.hpp"
#include "mssl/data.hpp"
#include "mssl/losses.hpp"
#include "mssl/models.hpp"
#include "mssl/optim.hpp"
#include "mssl/serialize.hpp"
#include "mssl/tangent.hpp"

namespace mssl {

/// A loss became NaN or infinite; the run stops after saving a checkpoint.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TrainVariant { decoupled, bigan, aug_bigan, fm_gan_ssl, regular_gan_ssl, supervised_only };

const char* train_variant_name(TrainVariant v);
/// Accepts '-' or '_' as separator.
TrainVariant parse_train_variant(const std::string& name);
bool is_gan_variant(TrainVariant v);

struct TrainConfig {
  TrainVariant variant = TrainVariant::aug_bigan;
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  AdamConfig adam;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double sigma = 0.1;
  /// Length of each TangentProp displacement.
  double tangent_step = 0.1;
  std::size_t d_p = 1;
  TangentSource tangent_source = TangentSource::projector_composed;
  std::uint64_t seed = 0;

  std::size_t latent_dim = 8;
  std::size_t hidden_width = 64;
  std::size_t hidden_layers = 2;
  bool weight_norm = true;
  FeatureTag feature_layer = FeatureTag::trunk_penultimate;
  AugmentedWeights aug_weights;
  /// Decoupled variant: epochs of the encoder phase (0 = same as epochs).
  std::size_t encoder_epochs = 0;
  /// SSL: no generator updates from this step on (0 = never).
  std::size_t freeze_generator_step = 0;
  /// SSL: probe every this many steps (0 = once per epoch).
  std::size_t probe_every = 0;
  std::size_t probe_size = 256;
  /// GAN: held-out reconstruction error every this many steps (0 = once per epoch).
  std::size_t eval_every = 0;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Every field, defaults expanded.
Json config_to_json(const TrainConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
TrainConfig config_from_json(const Json& j);

std::size_t steps_per_epoch(std::size_t pool_size, std::size_t batch_size);

/// Row ids used for unsupervised training: labeled and unlabeled, never test.
std::vector<std::size_t> training_pool(const Dataset& ds);

// ---- encoder-training variants ----

struct GanModels {
  Mlp generator;  // z (d) -> x (D)
  Mlp encoder;    // x (D) -> z (d)
  DualDiscriminator discriminator;
};

GanModels make_gan_models(const TrainConfig& cfg, std::size_t data_dim, std::size_t num_classes);

/// Mean over rows of |x - g(h(x))|.
double reconstruction_error(const GanModels& m, const Tensor& x);

/// Alternating 1:1 discriminator / generator-encoder updates. The
/// discriminator minimizes the BiGAN or augmented objective on realness
/// logits; g and h minimize feature matching at `feature_layer`. The
/// decoupled variant first trains g against a discriminator whose z input is
/// zero, then freezes g and f and trains h on |z - h(g(z))|^2.
class GanTrainer {
 public:
  enum class Phase { adversarial, encoder };

  GanTrainer(const TrainConfig& cfg, const Dataset& ds);

  std::size_t step() const { return step_; }
  std::size_t total_steps() const { return adversarial_steps_ + encoder_steps_; }
  bool done() const { return step_ >= total_steps(); }
  Phase phase() const { return step_ < adversarial_steps_ ? Phase::adversarial : Phase::encoder; }

  /// One update. Throws NumericalError, leaving the state untouched, when a
  /// loss is not finite.
  LossReport advance();

  const GanModels& models() const { return models_; }
  const TrainConfig& config() const { return cfg_; }

  Json state_json() const;
  void save_models(const std::filesystem::path& dir) const;
  /// Restores a state written by state_json() / save_models().
  void load(const std::filesystem::path& dir, const Json& state);

 private:
  LossReport adversarial_step();
  LossReport encoder_step();
  Tensor sample_batch();
  Tensor sample_latent(std::size_t rows);

  TrainConfig cfg_;
  const Dataset* ds_;
  std::vector<std::size_t> pool_;
  GanModels models_;
  AdamState adam_g_, adam_h_, adam_d_;
  Rng rng_;
  std::size_t step_ = 0;
  std::size_t adversarial_steps_ = 0;
  std::size_t encoder_steps_ = 0;
};

// ---- supervised oracle for class preservation ----

struct OracleConfig {
  std::vector<std::size_t> hidden = {64, 64};
  std::size_t steps = 1500;
  std::size_t batch_size = 64;
  AdamConfig adam{1e-3, 0.9, 0.999, 1e-8};
  std::uint64_t seed = 0;
};

/// Classifier trained on the true labels of rows `ids`.
Classifier train_oracle(const Dataset& ds, std::span<const std::size_t> ids,
                        const OracleConfig& cfg);
/// Fraction of rows whose argmax over the k real logits differs from the label.
double classification_error(const Classifier& c, const Tensor& x,
                            std::span<const std::size_t> labels);
/// Oracle error on the reconstructions g(h(x)).
double class_preservation_error(const Classifier& oracle, const GanModels& m, const Tensor& x,
                                std::span<const std::size_t> labels);

// ---- semi-supervised training ----

struct SslModels {
  Classifier classifier;  // (k+1)-class discriminator
  Mlp generator;
};

SslModels make_ssl_models(const TrainConfig& cfg, std::size_t data_dim, std::size_t num_classes);

/// Tangents at every row of the dataset from the requested source. The
/// encoder and projector sources need `gan`, the projector one also `pair`.
std::vector<TangentBasis> dataset_tangents(const Dataset& ds, TangentSource source,
                                           std::size_t d_p, const GanModels* gan,
                                           const ProjectorPair* pair);

/// Classifier trained on the final semi-supervised loss against its own
/// generator (feature matching on the classifier's last hidden layer, or the
/// regular log p(k+1 | g(z)) objective). `tangents` is indexed by dataset row
/// and is required when lambda1 > 0.
class SslTrainer {
 public:
  SslTrainer(const TrainConfig& cfg, const Dataset& ds, std::vector<TangentBasis> tangents);

  std::size_t step() const { return step_; }
  std::size_t total_steps() const { return total_steps_; }
  bool done() const { return step_ >= total_steps_; }
  bool probe_due() const;

  LossReport advance();
  ProbeRecord probe() const;
  double test_error() const;
  bool generator_frozen() const;

  const SslModels& models() const { return models_; }
  const TrainConfig& config() const { return cfg_; }

  Json state_json() const;
  void save_models(const std::filesystem::path& dir) const;
  void load(const std::filesystem::path& dir, const Json& state);

 private:
  TrainConfig cfg_;
  const Dataset* ds_;
  std::vector<TangentBasis> tangents_;
  SslModels models_;
  AdamState adam_c_, adam_g_;
  Rng rng_;
  std::size_t step_ = 0;
  std::size_t total_steps_ = 0;
  Tensor probe_z_, probe_x_;
  std::vector<std::size_t> probe_labels_;
};

// ---- runs with checkpoint directories ----

struct RunOptions {
  /// Empty: keep everything in memory.
  std::filesystem::path out_dir;
  /// Write a checkpoint every this many steps (0 = only at the end).
  std::size_t checkpoint_every = 0;
  /// Continue from the checkpoint in out_dir.
  bool resume = false;
  /// Stop after this many steps in this invocation (0 = run to the end).
  std::size_t max_steps = 0;
};

struct GanRunResult {
  GanModels models;
  std::vector<std::pair<std::size_t, double>> recon_trace;  // (step, held-out error)
  std::size_t steps = 0;
  bool finished = false;
};

/// Held-out evaluation rows for GAN runs: the test split, or the whole
/// dataset when there is none.
std::vector<std::size_t> evaluation_rows(const Dataset& ds);

GanRunResult train_encoder_variant(const TrainConfig& cfg, const Dataset& ds,
                                   const RunOptions& options = {});

struct SslRunResult {
  SslModels models;
  std::vector<ProbeRecord> probes;
  double test_error = 0.0;
  std::size_t steps = 0;
  bool finished = false;
};

SslRunResult train_ssl(const TrainConfig& cfg, const Dataset& ds,
                       std::vector<TangentBasis> tangents, const RunOptions& options = {});

}  // namespace mssl
