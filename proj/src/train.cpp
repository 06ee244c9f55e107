#include "mssl/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace mssl {

namespace {

std::vector<std::size_t> hidden_sizes(const TrainConfig& cfg) {
  return std::vector<std::size_t>(cfg.hidden_layers, cfg.hidden_width);
}

std::uint64_t model_seed(const TrainConfig& cfg, const char* tag) {
  return Rng(cfg.seed).split("models").split(tag).next();
}

MlpSpec mlp_spec(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out,
                 bool weight_norm, std::uint64_t seed) {
  std::vector<std::size_t> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return MlpSpec{sizes, Activation::elu, Activation::identity, weight_norm, seed};
}

Tensor normal_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Tensor t({rows, cols});
  for (auto& v : t.storage()) v = rng.normal();
  return t;
}

void require_finite(double value, const char* what, std::size_t step) {
  if (!std::isfinite(value)) {
    throw NumericalError(std::string(what) + " is not finite at step " + std::to_string(step + 1));
  }
}

/// Row-wise mean squared Euclidean distance.
Var mean_sq_dist(Var a, Var b) { return mean_all(sum_cols(square(sub(a, b)))); }

std::size_t file_size_or_zero(const std::filesystem::path& p) {
  std::error_code ec;
  const auto n = std::filesystem::file_size(p, ec);
  return ec ? 0 : static_cast<std::size_t>(n);
}

/// Append-only CSV stream whose length is recorded in checkpoints so a
/// resumed run can cut it back to the checkpointed step.
class CsvStream {
 public:
  void open(const std::filesystem::path& path, bool resume, std::size_t resume_bytes,
            void (*header)(std::ostream&)) {
    path_ = path;
    if (resume) {
      if (file_size_or_zero(path) < resume_bytes) {
        throw IoError("'" + path.string() + "' is shorter than its checkpoint cursor");
      }
      std::filesystem::resize_file(path, resume_bytes);
      out_.open(path, std::ios::binary | std::ios::app);
    } else {
      out_.open(path, std::ios::binary | std::ios::trunc);
      if (out_) header(out_);
    }
    if (!out_) throw IoError("cannot open '" + path.string() + "' for writing");
  }
  bool active() const { return out_.is_open(); }
  std::ostream& stream() { return out_; }
  std::size_t flush() {
    out_.flush();
    if (!out_) throw IoError("write failed for '" + path_.string() + "'");
    return file_size_or_zero(path_);
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

void write_recon_header(std::ostream& out) { write_metrics_header(out); }

void check_resume_config(const std::filesystem::path& dir, const TrainConfig& cfg) {
  const TrainConfig saved = config_from_json(read_json(dir / "config.json"));
  if (!(saved == cfg)) {
    throw std::invalid_argument("resume: configuration differs from '" +
                                (dir / "config.json").string() + "'");
  }
}

}  // namespace

const char* train_variant_name(TrainVariant v) {
  switch (v) {
    case TrainVariant::decoupled: return "decoupled";
    case TrainVariant::bigan: return "bigan";
    case TrainVariant::aug_bigan: return "aug-bigan";
    case TrainVariant::fm_gan_ssl: return "fm-gan-ssl";
    case TrainVariant::regular_gan_ssl: return "regular-gan-ssl";
    case TrainVariant::supervised_only: return "supervised-only";
  }
  return "?";
}

TrainVariant parse_train_variant(const std::string& name) {
  std::string n = name;
  std::replace(n.begin(), n.end(), '_', '-');
  for (auto v : {TrainVariant::decoupled, TrainVariant::bigan, TrainVariant::aug_bigan,
                 TrainVariant::fm_gan_ssl, TrainVariant::regular_gan_ssl,
                 TrainVariant::supervised_only}) {
    if (n == train_variant_name(v)) return v;
  }
  throw std::invalid_argument("unknown variant '" + name +
                              "' (expected decoupled, bigan, aug-bigan, fm-gan-ssl, "
                              "regular-gan-ssl, supervised-only)");
}

bool is_gan_variant(TrainVariant v) {
  return v == TrainVariant::decoupled || v == TrainVariant::bigan || v == TrainVariant::aug_bigan;
}

void TrainConfig::validate() const {
  const auto fail = [](const std::string& m) { throw std::invalid_argument("train config: " + m); };
  if (epochs == 0) fail("epochs must be positive");
  if (batch_size == 0) fail("batch_size must be positive");
  if (!(adam.lr > 0.0) || !(adam.epsilon > 0.0)) fail("adam lr and epsilon must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    fail("adam betas must lie in [0, 1)");
  }
  if (lambda1 < 0.0 || lambda2 < 0.0) fail("lambda1 and lambda2 must be >= 0");
  if (!(sigma > 0.0)) fail("sigma must be positive");
  if (!(tangent_step > 0.0)) fail("tangent_step must be positive");
  if (latent_dim == 0 || hidden_width == 0 || hidden_layers == 0) {
    fail("latent_dim, hidden_width and hidden_layers must be positive");
  }
  if (d_p == 0) fail("d_p must be positive");
  if (probe_size == 0) fail("probe_size must be positive");
}

Json config_to_json(const TrainConfig& c) {
  return Json{{"variant", train_variant_name(c.variant)},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"adam", adam_config_to_json(c.adam)},
              {"lambda1", c.lambda1},
              {"lambda2", c.lambda2},
              {"sigma", c.sigma},
              {"tangent_step", c.tangent_step},
              {"d_p", c.d_p},
              {"tangent_source", tangent_source_name(c.tangent_source)},
              {"seed", c.seed},
              {"latent_dim", c.latent_dim},
              {"hidden_width", c.hidden_width},
              {"hidden_layers", c.hidden_layers},
              {"weight_norm", c.weight_norm},
              {"feature_layer", feature_tag_name(c.feature_layer)},
              {"aug_weights",
               Json{{"real", c.aug_weights.real},
                    {"latent_fake", c.aug_weights.latent_fake},
                    {"recon_fake", c.aug_weights.recon_fake}}},
              {"encoder_epochs", c.encoder_epochs},
              {"freeze_generator_step", c.freeze_generator_step},
              {"probe_every", c.probe_every},
              {"probe_size", c.probe_size},
              {"eval_every", c.eval_every}};
}

TrainConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("train config: expected a JSON object");
  const Json defaults = config_to_json(TrainConfig{});
  for (const auto& [key, _] : j.items()) {
    if (!defaults.contains(key)) throw std::invalid_argument("train config: unknown key '" + key + "'");
  }
  TrainConfig c;
  try {
    if (j.contains("variant")) c.variant = parse_train_variant(j["variant"].get<std::string>());
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    if (j.contains("adam")) c.adam = adam_config_from_json(j["adam"]);
    c.lambda1 = j.value("lambda1", c.lambda1);
    c.lambda2 = j.value("lambda2", c.lambda2);
    c.sigma = j.value("sigma", c.sigma);
    c.tangent_step = j.value("tangent_step", c.tangent_step);
    c.d_p = j.value("d_p", c.d_p);
    if (j.contains("tangent_source")) {
      c.tangent_source = parse_tangent_source(j["tangent_source"].get<std::string>());
    }
    c.seed = j.value("seed", c.seed);
    c.latent_dim = j.value("latent_dim", c.latent_dim);
    c.hidden_width = j.value("hidden_width", c.hidden_width);
    c.hidden_layers = j.value("hidden_layers", c.hidden_layers);
    c.weight_norm = j.value("weight_norm", c.weight_norm);
    if (j.contains("feature_layer")) {
      c.feature_layer = parse_feature_tag(j["feature_layer"].get<std::string>());
    }
    if (j.contains("aug_weights")) {
      const Json& w = j["aug_weights"];
      c.aug_weights.real = w.value("real", c.aug_weights.real);
      c.aug_weights.latent_fake = w.value("latent_fake", c.aug_weights.latent_fake);
      c.aug_weights.recon_fake = w.value("recon_fake", c.aug_weights.recon_fake);
    }
    c.encoder_epochs = j.value("encoder_epochs", c.encoder_epochs);
    c.freeze_generator_step = j.value("freeze_generator_step", c.freeze_generator_step);
    c.probe_every = j.value("probe_every", c.probe_every);
    c.probe_size = j.value("probe_size", c.probe_size);
    c.eval_every = j.value("eval_every", c.eval_every);
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

std::size_t steps_per_epoch(std::size_t pool_size, std::size_t batch_size) {
  return std::max<std::size_t>(1, (pool_size + batch_size - 1) / batch_size);
}

std::vector<std::size_t> training_pool(const Dataset& ds) {
  std::vector<std::size_t> pool = ds.split.labeled;
  pool.insert(pool.end(), ds.split.unlabeled.begin(), ds.split.unlabeled.end());
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<std::size_t> evaluation_rows(const Dataset& ds) {
  if (!ds.split.test.empty()) return ds.split.test;
  std::vector<std::size_t> all(ds.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return all;
}

// ---- encoder-training variants ----

GanModels make_gan_models(const TrainConfig& cfg, std::size_t data_dim, std::size_t num_classes) {
  const auto hidden = hidden_sizes(cfg);
  GanModels m;
  m.generator = Mlp(mlp_spec(cfg.latent_dim, hidden, data_dim, cfg.weight_norm,
                             model_seed(cfg, "generator")));
  m.encoder = Mlp(mlp_spec(data_dim, hidden, cfg.latent_dim, cfg.weight_norm,
                           model_seed(cfg, "encoder")));
  DualDiscriminatorSpec ds;
  ds.latent_dim = cfg.latent_dim;
  ds.data_dim = data_dim;
  ds.num_classes = std::max<std::size_t>(1, num_classes);
  ds.z_hidden = {cfg.hidden_width};
  ds.x_hidden = hidden;
  ds.trunk_hidden = {cfg.hidden_width};
  ds.weight_norm = cfg.weight_norm;
  ds.seed = model_seed(cfg, "discriminator");
  m.discriminator = DualDiscriminator(ds);
  return m;
}

double reconstruction_error(const GanModels& m, const Tensor& x) {
  if (x.rows() == 0) throw std::invalid_argument("reconstruction_error: empty batch");
  const Tensor r = m.generator(m.encoder(x));
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double d = x(i, j) - r(i, j);
      s += d * d;
    }
    total += std::sqrt(s);
  }
  return total / static_cast<double>(x.rows());
}

GanTrainer::GanTrainer(const TrainConfig& cfg, const Dataset& ds)
    : cfg_(cfg), ds_(&ds), pool_(training_pool(ds)), rng_(Rng(cfg.seed).split("gan-train")) {
  cfg_.validate();
  if (!is_gan_variant(cfg_.variant)) {
    throw std::invalid_argument(std::string("gan training: variant '") +
                                train_variant_name(cfg_.variant) + "' is not an encoder variant");
  }
  if (pool_.empty()) throw std::invalid_argument("gan training: no training rows");
  models_ = make_gan_models(cfg_, ds.dim(), ds.num_classes);
  const std::size_t spe = steps_per_epoch(pool_.size(), cfg_.batch_size);
  adversarial_steps_ = cfg_.epochs * spe;
  if (cfg_.variant == TrainVariant::decoupled) {
    encoder_steps_ = (cfg_.encoder_epochs ? cfg_.encoder_epochs : cfg_.epochs) * spe;
  }
}

Tensor GanTrainer::sample_batch() {
  Tensor x({cfg_.batch_size, ds_->dim()});
  for (std::size_t r = 0; r < cfg_.batch_size; ++r) {
    const auto src = ds_->x.row(pool_[rng_.below(pool_.size())]);
    std::copy(src.begin(), src.end(), x.row(r).begin());
  }
  return x;
}

Tensor GanTrainer::sample_latent(std::size_t rows) {
  return normal_matrix(rng_, rows, cfg_.latent_dim);
}

LossReport GanTrainer::advance() {
  if (done()) throw std::logic_error("gan training: already finished");
  const GanModels models_before = models_;
  const AdamState g0 = adam_g_, h0 = adam_h_, d0 = adam_d_;
  const Rng rng0 = rng_;
  try {
    LossReport r = phase() == Phase::adversarial ? adversarial_step() : encoder_step();
    ++step_;
    return r;
  } catch (const NumericalError&) {
    models_ = models_before;
    adam_g_ = g0;
    adam_h_ = h0;
    adam_d_ = d0;
    rng_ = rng0;
    throw;
  }
}

LossReport GanTrainer::adversarial_step() {
  const Tensor x = sample_batch();
  const Tensor z = sample_latent(cfg_.batch_size);
  const bool decoupled = cfg_.variant == TrainVariant::decoupled;
  const Tensor zero_z({cfg_.batch_size, cfg_.latent_dim});
  auto& g = models_.generator;
  auto& h = models_.encoder;
  auto& f = models_.discriminator;
  LossReport report;

  // Discriminator update with g and h fixed.
  {
    Tape tape;
    tape.freeze(g.params());
    tape.freeze(h.params());
    Var X = tape.constant(x), Z = tape.constant(z);
    Var gz = g.forward(tape, Z);
    Var loss;
    if (decoupled) {
      Var Z0 = tape.constant(zero_z);
      loss = bigan_disc_loss(f.forward(tape, Z0, X).realness_logit,
                             f.forward(tape, Z0, gz).realness_logit);
    } else {
      Var hx = h.forward(tape, X);
      Var real = f.forward(tape, hx, X).realness_logit;
      Var fake = f.forward(tape, Z, gz).realness_logit;
      if (cfg_.variant == TrainVariant::aug_bigan) {
        Var recon = f.forward(tape, hx, g.forward(tape, hx)).realness_logit;
        loss = augmented_bigan_disc_loss(real, fake, recon, cfg_.aug_weights);
      } else {
        loss = bigan_disc_loss(real, fake);
      }
    }
    require_finite(loss.value()[0], "discriminator loss", step_);
    tape.backward(loss);
    adam_step(f.params(), tape.gradient(f.params()), adam_d_, cfg_.adam);
    report.set("disc", loss.value()[0]);
    report.saturations += tape.saturation_count();
  }

  // Feature matching for g (and h) against the updated discriminator.
  {
    Tape tape;
    tape.freeze(f.params());
    if (decoupled) tape.freeze(h.params());
    Var X = tape.constant(x), Z = tape.constant(z);
    Var gz = g.forward(tape, Z);
    Var real, fake;
    if (decoupled) {
      Var Z0 = tape.constant(zero_z);
      real = f.feature_layer(tape, Z0, X, cfg_.feature_layer);
      fake = f.feature_layer(tape, Z0, gz, cfg_.feature_layer);
    } else {
      real = f.feature_layer(tape, h.forward(tape, X), X, cfg_.feature_layer);
      fake = f.feature_layer(tape, Z, gz, cfg_.feature_layer);
    }
    Var loss = feature_matching_loss(real, fake);
    require_finite(loss.value()[0], "feature matching loss", step_);
    tape.backward(loss);
    adam_step(g.params(), tape.gradient(g.params()), adam_g_, cfg_.adam);
    if (!decoupled) adam_step(h.params(), tape.gradient(h.params()), adam_h_, cfg_.adam);
    report.set("fm", loss.value()[0]);
  }
  report.total = report.component("disc") + report.component("fm");
  return report;
}

LossReport GanTrainer::encoder_step() {
  const Tensor z = sample_latent(cfg_.batch_size);
  auto& g = models_.generator;
  auto& h = models_.encoder;
  Tape tape;
  tape.freeze(g.params());
  Var Z = tape.constant(z);
  Var loss = mean_sq_dist(h.forward(tape, g.forward(tape, Z)), Z);
  require_finite(loss.value()[0], "latent reconstruction loss", step_);
  tape.backward(loss);
  adam_step(h.params(), tape.gradient(h.params()), adam_h_, cfg_.adam);
  LossReport report;
  report.set("latent_recon", loss.value()[0]);
  report.total = loss.value()[0];
  return report;
}

Json GanTrainer::state_json() const {
  return Json{{"step", step_},
              {"rng", rng_to_json(rng_)},
              {"adam_generator", adam_state_to_json(adam_g_)},
              {"adam_encoder", adam_state_to_json(adam_h_)},
              {"adam_discriminator", adam_state_to_json(adam_d_)}};
}

void GanTrainer::save_models(const std::filesystem::path& dir) const {
  write_json(dir / "generator.json", model_to_json(models_.generator));
  write_json(dir / "encoder.json", model_to_json(models_.encoder));
  write_json(dir / "discriminator.json", model_to_json(models_.discriminator));
}

void GanTrainer::load(const std::filesystem::path& dir, const Json& state) {
  GanModels m;
  m.generator = mlp_from_json(read_json(dir / "generator.json"));
  m.encoder = mlp_from_json(read_json(dir / "encoder.json"));
  m.discriminator = discriminator_from_json(read_json(dir / "discriminator.json"));
  if (!(m.generator.spec() == models_.generator.spec()) ||
      !(m.encoder.spec() == models_.encoder.spec()) ||
      !(m.discriminator.spec() == models_.discriminator.spec())) {
    throw IoError("checkpoint models in '" + dir.string() + "' do not match the configuration");
  }
  try {
    step_ = state.at("step").get<std::size_t>();
    rng_ = rng_from_json(state.at("rng"));
    adam_g_ = adam_state_from_json(state.at("adam_generator"));
    adam_h_ = adam_state_from_json(state.at("adam_encoder"));
    adam_d_ = adam_state_from_json(state.at("adam_discriminator"));
  } catch (const Json::exception& e) {
    throw IoError("checkpoint state in '" + dir.string() + "': " + e.what());
  }
  models_ = std::move(m);
}

// ---- oracle ----

Classifier train_oracle(const Dataset& ds, std::span<const std::size_t> ids,
                        const OracleConfig& cfg) {
  if (ds.labels.empty() || ids.empty()) throw std::invalid_argument("train_oracle: no labeled rows");
  Classifier c(ClassifierSpec{ds.dim(), ds.num_classes, cfg.hidden, true, cfg.seed});
  Rng rng = Rng(cfg.seed).split("oracle-batches");
  AdamState state;
  std::vector<std::size_t> batch(std::min(cfg.batch_size, ids.size()));
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    for (auto& b : batch) b = ids[rng.below(ids.size())];
    Tape tape;
    Var loss = ssl_sup_loss(c.logits(tape, tape.constant(ds.rows(batch))), ds.labels_of(batch));
    tape.backward(loss);
    adam_step(c.params(), tape.gradient(c.params()), state, cfg.adam);
  }
  return c;
}

double classification_error(const Classifier& c, const Tensor& x,
                            std::span<const std::size_t> labels) {
  if (x.rows() == 0 || labels.size() != x.rows()) {
    throw std::invalid_argument("classification_error: need one label per row");
  }
  const Tensor l = c.logits(x);
  std::size_t wrong = 0;
  for (std::size_t r = 0; r < l.rows(); ++r) {
    const auto row = l.row(r);
    const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best != labels[r]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(l.rows());
}

double class_preservation_error(const Classifier& oracle, const GanModels& m, const Tensor& x,
                                std::span<const std::size_t> labels) {
  return classification_error(oracle, m.generator(m.encoder(x)), labels);
}

// ---- semi-supervised training ----

SslModels make_ssl_models(const TrainConfig& cfg, std::size_t data_dim, std::size_t num_classes) {
  const auto hidden = hidden_sizes(cfg);
  SslModels m;
  m.classifier = Classifier(ClassifierSpec{data_dim, std::max<std::size_t>(1, num_classes), hidden,
                                           cfg.weight_norm, model_seed(cfg, "classifier")});
  m.generator = Mlp(mlp_spec(cfg.latent_dim, hidden, data_dim, cfg.weight_norm,
                             model_seed(cfg, "ssl-generator")));
  return m;
}

std::vector<TangentBasis> dataset_tangents(const Dataset& ds, TangentSource source,
                                           std::size_t d_p, const GanModels* gan,
                                           const ProjectorPair* pair) {
  std::vector<TangentBasis> out;
  out.reserve(ds.size());
  switch (source) {
    case TangentSource::ground_truth:
      if (!ds.chart) {
        throw std::invalid_argument("ground-truth tangents need a dataset generated from a chart");
      }
      for (std::size_t i = 0; i < ds.size(); ++i) out.push_back(ds.ground_truth_tangents(i));
      return out;
    case TangentSource::encoder_svd:
    case TangentSource::generator_svd: {
      if (!gan) throw std::invalid_argument("svd tangents need trained encoder/generator models");
      const TapeFn enc = gan->encoder.as_fn(), gen = gan->generator.as_fn();
      for (std::size_t i = 0; i < ds.size(); ++i) {
        const Tensor x = ds.x.row_copy(i);
        TangentBasis b = source == TangentSource::encoder_svd
                             ? encoder_tangents(enc, x, d_p)
                             : generator_tangents(gen, gan->encoder(x), d_p);
        b.base_point = x;
        out.push_back(std::move(b));
      }
      return out;
    }
    case TangentSource::projector_composed:
      if (!gan || !pair) {
        throw std::invalid_argument("projector tangents need trained encoder and projector models");
      }
      return composed_tangents(*pair, gan->encoder.as_fn(), ds.x, source);
  }
  return out;
}

SslTrainer::SslTrainer(const TrainConfig& cfg, const Dataset& ds,
                       std::vector<TangentBasis> tangents)
    : cfg_(cfg), ds_(&ds), tangents_(std::move(tangents)), rng_(Rng(cfg.seed).split("ssl-train")) {
  cfg_.validate();
  if (is_gan_variant(cfg_.variant)) {
    throw std::invalid_argument(std::string("ssl training: variant '") +
                                train_variant_name(cfg_.variant) + "' is an encoder variant");
  }
  if (ds.labels.empty()) throw std::invalid_argument("ssl training: dataset has no labels");
  if (ds.split.labeled.empty()) throw std::invalid_argument("ssl training: no labeled rows");
  const bool supervised = cfg_.variant == TrainVariant::supervised_only;
  if (!supervised && ds.split.unlabeled.empty()) {
    throw std::invalid_argument("ssl training: no unlabeled rows");
  }
  if (!supervised && cfg_.lambda1 > 0.0 && tangents_.size() != ds.size()) {
    throw std::invalid_argument("ssl training: lambda1 > 0 requires tangents for every row (got " +
                                std::to_string(tangents_.size()) + " for " +
                                std::to_string(ds.size()) + " rows)");
  }
  for (const auto& t : tangents_) {
    if (t.count() == 0 || t.ambient_dim() != ds.dim()) {
      throw DimensionError("ssl training: tangent basis does not match the data dimension");
    }
  }
  models_ = make_ssl_models(cfg_, ds.dim(), ds.num_classes);
  const std::size_t pool = supervised ? ds.split.labeled.size() : ds.split.unlabeled.size();
  total_steps_ = cfg_.epochs * steps_per_epoch(pool, cfg_.batch_size);

  Rng probe_rng = Rng(cfg_.seed).split("probe");
  probe_z_ = normal_matrix(probe_rng, cfg_.probe_size, cfg_.latent_dim);
  const auto& reals = supervised ? ds.split.labeled : ds.split.unlabeled;
  std::vector<std::size_t> ids(reals.begin(),
                               reals.begin() + static_cast<std::ptrdiff_t>(
                                                   std::min(cfg_.probe_size, reals.size())));
  probe_x_ = ds.rows(ids);
  probe_labels_ = ds.labels_of(ids);
}

bool SslTrainer::generator_frozen() const {
  return cfg_.variant == TrainVariant::supervised_only ||
         (cfg_.freeze_generator_step > 0 && step_ >= cfg_.freeze_generator_step);
}

bool SslTrainer::probe_due() const {
  const std::size_t pool = cfg_.variant == TrainVariant::supervised_only
                               ? ds_->split.labeled.size()
                               : ds_->split.unlabeled.size();
  const std::size_t every =
      cfg_.probe_every ? cfg_.probe_every : steps_per_epoch(pool, cfg_.batch_size);
  return step_ % every == 0 || done();
}

LossReport SslTrainer::advance() {
  if (done()) throw std::logic_error("ssl training: already finished");
  const bool supervised = cfg_.variant == TrainVariant::supervised_only;
  const auto& labeled = ds_->split.labeled;
  const auto& unlabeled = ds_->split.unlabeled;
  const std::size_t b = cfg_.batch_size;
  const Rng rng0 = rng_;
  const bool freeze_g = generator_frozen();

  SslBatch batch;
  std::vector<std::size_t> lab_ids;
  if (labeled.size() <= b) {
    lab_ids = labeled;
  } else {
    lab_ids.resize(b);
    for (auto& id : lab_ids) id = labeled[rng_.below(labeled.size())];
  }
  batch.labeled_x = ds_->rows(lab_ids);
  batch.labeled_y = ds_->labels_of(lab_ids);
  Tensor z;
  if (!supervised) {
    std::vector<std::size_t> ids(b);
    for (auto& id : ids) id = unlabeled[rng_.below(unlabeled.size())];
    batch.unlabeled_x = ds_->rows(ids);
    if (cfg_.lambda1 > 0.0) {
      for (std::size_t id : ids) batch.tangents.push_back(&tangents_[id]);
    }
    z = normal_matrix(rng_, b, cfg_.latent_dim);
    batch.fake_x = models_.generator(z);
  }

  SslLossConfig loss_cfg;
  loss_cfg.lambda1 = supervised ? 0.0 : cfg_.lambda1;
  loss_cfg.lambda2 = supervised ? 0.0 : cfg_.lambda2;
  loss_cfg.sigma = cfg_.sigma;
  loss_cfg.tangent.step = cfg_.tangent_step;

  auto& c = models_.classifier;
  auto& g = models_.generator;
  LossReport report;
  std::vector<double> grad_c, grad_g;
  {
    Tape tape;
    SslLoss loss = final_ssl_loss(tape, c, batch, loss_cfg, rng_);
    if (!std::isfinite(loss.report.total)) {
      rng_ = rng0;
      require_finite(loss.report.total, "classifier loss", step_);
    }
    tape.backward(loss.total);
    grad_c = tape.gradient(c.params());
    report = loss.report;
  }
  double gen = 0.0;
  if (!supervised) {
    // The generator is scored against the classifier before its update.
    Tape tape;
    tape.freeze(c.params());
    Var gz = g.forward(tape, tape.constant(z));
    Var loss = cfg_.variant == TrainVariant::fm_gan_ssl
                   ? feature_matching_loss(c.forward(tape, tape.constant(batch.unlabeled_x)).features,
                                           c.forward(tape, gz).features)
                   : regular_gen_loss(c.logits(tape, gz));
    gen = loss.value()[0];
    if (!std::isfinite(gen)) {
      rng_ = rng0;
      require_finite(gen, "generator loss", step_);
    }
    if (!freeze_g) {
      tape.backward(loss);
      grad_g = tape.gradient(g.params());
    }
    report.set("gen", gen);
    report.total += gen;
    report.saturations += tape.saturation_count();
  }
  adam_step(c.params(), grad_c, adam_c_, cfg_.adam);
  if (!grad_g.empty()) adam_step(g.params(), grad_g, adam_g_, cfg_.adam);
  ++step_;
  return report;
}

ProbeRecord SslTrainer::probe() const {
  return probe_step(models_.classifier, models_.generator(probe_z_), probe_x_, probe_labels_, step_);
}

double SslTrainer::test_error() const {
  const auto& ids = ds_->split.test.empty() ? ds_->split.unlabeled : ds_->split.test;
  return classification_error(models_.classifier, ds_->rows(ids), ds_->labels_of(ids));
}

Json SslTrainer::state_json() const {
  return Json{{"step", step_},
              {"rng", rng_to_json(rng_)},
              {"adam_classifier", adam_state_to_json(adam_c_)},
              {"adam_generator", adam_state_to_json(adam_g_)}};
}

void SslTrainer::save_models(const std::filesystem::path& dir) const {
  write_json(dir / "classifier.json", model_to_json(models_.classifier));
  write_json(dir / "generator.json", model_to_json(models_.generator));
}

void SslTrainer::load(const std::filesystem::path& dir, const Json& state) {
  SslModels m;
  m.classifier = classifier_from_json(read_json(dir / "classifier.json"));
  m.generator = mlp_from_json(read_json(dir / "generator.json"));
  if (!(m.classifier.spec() == models_.classifier.spec()) ||
      !(m.generator.spec() == models_.generator.spec())) {
    throw IoError("checkpoint models in '" + dir.string() + "' do not match the configuration");
  }
  try {
    step_ = state.at("step").get<std::size_t>();
    rng_ = rng_from_json(state.at("rng"));
    adam_c_ = adam_state_from_json(state.at("adam_classifier"));
    adam_g_ = adam_state_from_json(state.at("adam_generator"));
  } catch (const Json::exception& e) {
    throw IoError("checkpoint state in '" + dir.string() + "': " + e.what());
  }
  models_ = std::move(m);
}

// ---- runs ----

GanRunResult train_encoder_variant(const TrainConfig& cfg, const Dataset& ds,
                                   const RunOptions& options) {
  GanTrainer trainer(cfg, ds);
  const bool to_disk = !options.out_dir.empty();
  const auto& dir = options.out_dir;
  CsvStream metrics;
  if (to_disk) {
    if (options.resume) {
      check_resume_config(dir, trainer.config());
      const Json state = read_json(dir / "state.json");
      trainer.load(dir, state);
      metrics.open(dir / "metrics.csv", true, state.at("metrics_bytes").get<std::size_t>(),
                   write_recon_header);
    } else {
      std::filesystem::create_directories(dir);
      write_json(dir / "config.json", config_to_json(trainer.config()));
      metrics.open(dir / "metrics.csv", false, 0, write_recon_header);
    }
  } else if (options.resume) {
    throw std::invalid_argument("resume needs an output directory");
  }

  GanRunResult result;
  const auto eval_ids = evaluation_rows(ds);
  const Tensor x_eval = ds.rows(eval_ids);
  const std::size_t every =
      cfg.eval_every ? cfg.eval_every : steps_per_epoch(training_pool(ds).size(), cfg.batch_size);
  const auto evaluate = [&] {
    const double e = reconstruction_error(trainer.models(), x_eval);
    result.recon_trace.emplace_back(trainer.step(), e);
    if (metrics.active()) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", e);
      metrics.stream() << trainer.step() << ",recon_heldout," << buf << "\n";
    }
  };
  const auto checkpoint = [&] {
    if (!to_disk) return;
    Json state = trainer.state_json();
    state["metrics_bytes"] = metrics.flush();
    trainer.save_models(dir);
    write_json(dir / "state.json", state);
  };

  if (trainer.step() == 0) evaluate();
  std::size_t ran = 0;
  while (!trainer.done() && (options.max_steps == 0 || ran < options.max_steps)) {
    LossReport r;
    try {
      r = trainer.advance();
    } catch (const NumericalError&) {
      checkpoint();
      throw;
    }
    ++ran;
    if (metrics.active()) write_metrics_rows(metrics.stream(), trainer.step(), r);
    if (trainer.step() % every == 0 || trainer.done()) evaluate();
    if (options.checkpoint_every && trainer.step() % options.checkpoint_every == 0) checkpoint();
  }
  checkpoint();
  result.models = trainer.models();
  result.steps = trainer.step();
  result.finished = trainer.done();
  return result;
}

SslRunResult train_ssl(const TrainConfig& cfg, const Dataset& ds,
                       std::vector<TangentBasis> tangents, const RunOptions& options) {
  SslTrainer trainer(cfg, ds, std::move(tangents));
  const bool to_disk = !options.out_dir.empty();
  const auto& dir = options.out_dir;
  CsvStream metrics, probes;
  if (to_disk) {
    if (options.resume) {
      check_resume_config(dir, trainer.config());
      const Json state = read_json(dir / "state.json");
      trainer.load(dir, state);
      metrics.open(dir / "metrics.csv", true, state.at("metrics_bytes").get<std::size_t>(),
                   write_metrics_header);
      probes.open(dir / "probes.csv", true, state.at("probes_bytes").get<std::size_t>(),
                  write_probe_header);
    } else {
      std::filesystem::create_directories(dir);
      write_json(dir / "config.json", config_to_json(trainer.config()));
      metrics.open(dir / "metrics.csv", false, 0, write_metrics_header);
      probes.open(dir / "probes.csv", false, 0, write_probe_header);
    }
  } else if (options.resume) {
    throw std::invalid_argument("resume needs an output directory");
  }

  SslRunResult result;
  const auto record_probe = [&] {
    const ProbeRecord p = trainer.probe();
    result.probes.push_back(p);
    if (probes.active()) write_probe_row(probes.stream(), p);
  };
  const auto checkpoint = [&] {
    if (!to_disk) return;
    Json state = trainer.state_json();
    state["metrics_bytes"] = metrics.flush();
    state["probes_bytes"] = probes.flush();
    trainer.save_models(dir);
    write_json(dir / "state.json", state);
  };

  if (trainer.step() == 0) record_probe();
  std::size_t ran = 0;
  while (!trainer.done() && (options.max_steps == 0 || ran < options.max_steps)) {
    LossReport r;
    try {
      r = trainer.advance();
    } catch (const NumericalError&) {
      checkpoint();
      throw;
    }
    ++ran;
    if (metrics.active()) write_metrics_rows(metrics.stream(), trainer.step(), r);
    if (trainer.probe_due()) record_probe();
    if (options.checkpoint_every && trainer.step() % options.checkpoint_every == 0) checkpoint();
  }
  result.test_error = trainer.test_error();
  checkpoint();
  if (to_disk && trainer.done()) {
    write_json(dir / "result.json", Json{{"test_error", result.test_error},
                                         {"steps", trainer.step()},
                                         {"variant", train_variant_name(cfg.variant)}});
  }
  result.models = trainer.models();
  result.steps = trainer.step();
  result.finished = trainer.done();
  return result;
}

}  // namespace mssl
