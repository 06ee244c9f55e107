#include "mssl/models.hpp"

#include <cmath>

namespace mssl {

namespace {

Var activate(Var x, Activation a) {
  switch (a) {
    case Activation::identity: return x;
    case Activation::elu: return elu(x);
    case Activation::tanh: return tanh(x);
  }
  return x;
}

std::vector<std::size_t> concat_sizes(std::size_t first, const std::vector<std::size_t>& rest,
                                      std::size_t last = 0) {
  std::vector<std::size_t> sizes{first};
  sizes.insert(sizes.end(), rest.begin(), rest.end());
  if (last) sizes.push_back(last);
  return sizes;
}

}  // namespace

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::elu: return "elu";
    case Activation::tanh: return "tanh";
  }
  return "?";
}

Activation parse_activation(const std::string& name) {
  if (name == "identity") return Activation::identity;
  if (name == "elu") return Activation::elu;
  if (name == "tanh") return Activation::tanh;
  throw SpecError("unknown activation '" + name + "'");
}

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) throw SpecError("mlp spec: need at least input and output sizes");
  for (std::size_t i = 0; i < layer_sizes.size(); ++i) {
    if (layer_sizes[i] == 0) {
      throw SpecError("mlp spec: layer " + std::to_string(i) + " has zero width");
    }
  }
}

MlpBlock MlpBlock::create(ParamStore& store, const std::string& prefix, const MlpSpec& spec,
                          Rng& rng) {
  spec.validate();
  MlpBlock block;
  block.spec_ = spec;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    const std::size_t fan_in = spec.layer_sizes[l];
    const std::size_t fan_out = spec.layer_sizes[l + 1];
    const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
    Tensor w({fan_out, fan_in});
    for (auto& v : w.storage()) v = rng.uniform(-bound, bound);
    const std::string name = prefix + "layer" + std::to_string(l);
    Layer layer;
    if (spec.weight_norm) {
      Tensor s({fan_out});
      for (std::size_t i = 0; i < fan_out; ++i) {
        double n2 = 0.0;
        for (std::size_t j = 0; j < fan_in; ++j) n2 += w(i, j) * w(i, j);
        s[i] = std::sqrt(n2);
      }
      layer.weight = store.add(name + ".v", std::move(w));
      layer.scale = store.add(name + ".s", std::move(s));
    } else {
      layer.weight = store.add(name + ".w", std::move(w));
    }
    layer.bias = store.add(name + ".b", Tensor({fan_out}));
    block.layers_.push_back(layer);
  }
  return block;
}

Var MlpBlock::layer_out(Tape& tape, const ParamStore& store, Var x, std::size_t i) const {
  const Layer& layer = layers_[i];
  Var w = spec_.weight_norm
              ? weight_norm(tape.param(store, layer.weight), tape.param(store, layer.scale))
              : tape.param(store, layer.weight);
  Var y = affine(x, w, tape.param(store, layer.bias));
  const bool last = i + 1 == layers_.size();
  return activate(y, last ? spec_.output : spec_.hidden);
}

Var MlpBlock::forward(Tape& tape, const ParamStore& store, Var x) const {
  if (x.cols() != input_dim()) {
    throw DimensionError("mlp: input has " + std::to_string(x.cols()) + " columns, expected " +
                         std::to_string(input_dim()));
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) x = layer_out(tape, store, x, i);
  return x;
}

std::vector<Var> MlpBlock::activations(Tape& tape, const ParamStore& store, Var x) const {
  if (x.cols() != input_dim()) {
    throw DimensionError("mlp: input has " + std::to_string(x.cols()) + " columns, expected " +
                         std::to_string(input_dim()));
  }
  std::vector<Var> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layer_out(tape, store, x, i);
    out.push_back(x);
  }
  return out;
}

Tensor MlpBlock::effective_weight(const ParamStore& store, std::size_t layer) const {
  const Layer& l = layers_.at(layer);
  if (!spec_.weight_norm) return store[l.weight].value;
  Tape tape;
  tape.freeze(store);
  return weight_norm(tape.param(store, l.weight), tape.param(store, l.scale)).value();
}

Mlp::Mlp(MlpSpec spec) {
  Rng rng(spec.seed);
  block_ = MlpBlock::create(params_, "", spec, rng);
}

Tensor Mlp::operator()(const Tensor& x) const {
  Tape tape;
  tape.freeze(params_);
  Tensor in({x.rows(), x.cols()}, x.storage());
  return forward(tape, tape.constant(std::move(in))).value();
}

TapeFn Mlp::as_fn() const {
  return [this](Tape& tape, Var x) {
    tape.freeze(params_);
    return forward(tape, x);
  };
}

const char* feature_tag_name(FeatureTag tag) {
  switch (tag) {
    case FeatureTag::x_pipeline_last: return "x-pipeline-last";
    case FeatureTag::z_pipeline_last: return "z-pipeline-last";
    case FeatureTag::trunk_penultimate: return "trunk-penultimate";
  }
  return "?";
}

FeatureTag parse_feature_tag(const std::string& name) {
  if (name == "x-pipeline-last") return FeatureTag::x_pipeline_last;
  if (name == "z-pipeline-last") return FeatureTag::z_pipeline_last;
  if (name == "trunk-penultimate") return FeatureTag::trunk_penultimate;
  throw SpecError("unknown feature layer tag '" + name + "'");
}

DualDiscriminator::DualDiscriminator(DualDiscriminatorSpec spec) : spec_(std::move(spec)) {
  if (spec_.z_hidden.empty() || spec_.x_hidden.empty() || spec_.trunk_hidden.empty()) {
    throw SpecError("dual discriminator: every pipeline needs at least one layer");
  }
  if (spec_.num_classes == 0) throw SpecError("dual discriminator: num_classes must be >= 1");
  Rng rng(spec_.seed);
  const auto pipe = [&](std::vector<std::size_t> sizes, Activation out) {
    return MlpSpec{std::move(sizes), Activation::elu, out, spec_.weight_norm, spec_.seed};
  };
  z_pipe_ = MlpBlock::create(params_, "z.", pipe(concat_sizes(spec_.latent_dim, spec_.z_hidden),
                                                 Activation::elu),
                             rng);
  x_pipe_ = MlpBlock::create(params_, "x.", pipe(concat_sizes(spec_.data_dim, spec_.x_hidden),
                                                 Activation::elu),
                             rng);
  const std::size_t joint = spec_.z_hidden.back() + spec_.x_hidden.back();
  trunk_ = MlpBlock::create(params_, "trunk.",
                            pipe(concat_sizes(joint, spec_.trunk_hidden), Activation::elu), rng);
  realness_head_ = MlpBlock::create(
      params_, "real.", pipe({spec_.trunk_hidden.back(), 1}, Activation::identity), rng);
  class_head_ = MlpBlock::create(
      params_, "cls.", pipe({spec_.x_hidden.back(), spec_.num_classes}, Activation::identity),
      rng);
}

DiscriminatorOutput DualDiscriminator::forward(Tape& tape, Var z, Var x) const {
  if (z.rows() != x.rows()) throw DimensionError("dual discriminator: z and x batch differ");
  DiscriminatorOutput out;
  out.features_fz = z_pipe_.forward(tape, params_, z);
  out.features_fx = x_pipe_.forward(tape, params_, x);
  out.trunk = trunk_.forward(tape, params_, concat_cols(out.features_fz, out.features_fx));
  out.realness_logit = realness_head_.forward(tape, params_, out.trunk);
  out.realness = sigmoid(out.realness_logit);
  out.class_logits = class_head_.forward(tape, params_, out.features_fx);
  return out;
}

Var DualDiscriminator::x_features(Tape& tape, Var x) const {
  return x_pipe_.forward(tape, params_, x);
}

Var DualDiscriminator::class_logits(Tape& tape, Var x) const {
  return class_head_.forward(tape, params_, x_features(tape, x));
}

Var DualDiscriminator::feature_layer(Tape& tape, Var z, Var x, FeatureTag tag) const {
  switch (tag) {
    case FeatureTag::x_pipeline_last: return x_features(tape, x);
    case FeatureTag::z_pipeline_last: return z_pipe_.forward(tape, params_, z);
    case FeatureTag::trunk_penultimate: {
      Var joint = concat_cols(z_pipe_.forward(tape, params_, z), x_features(tape, x));
      return trunk_.forward(tape, params_, joint);
    }
  }
  throw SpecError("dual discriminator: unknown feature tag");
}

std::size_t DualDiscriminator::feature_dim(FeatureTag tag) const {
  switch (tag) {
    case FeatureTag::x_pipeline_last: return spec_.x_hidden.back();
    case FeatureTag::z_pipeline_last: return spec_.z_hidden.back();
    case FeatureTag::trunk_penultimate: return spec_.trunk_hidden.back();
  }
  return 0;
}

Classifier::Classifier(ClassifierSpec spec) : spec_(std::move(spec)) {
  if (spec_.hidden.empty()) throw SpecError("classifier: need at least one hidden layer");
  if (spec_.num_classes == 0) throw SpecError("classifier: num_classes must be >= 1");
  Rng rng(spec_.seed);
  body_ = MlpBlock::create(params_, "body.",
                           MlpSpec{concat_sizes(spec_.data_dim, spec_.hidden), Activation::elu,
                                   Activation::elu, spec_.weight_norm, spec_.seed},
                           rng);
  head_ = MlpBlock::create(params_, "head.",
                           MlpSpec{{spec_.hidden.back(), spec_.num_classes}, Activation::elu,
                                   Activation::identity, spec_.weight_norm, spec_.seed},
                           rng);
}

ClassifierOutput Classifier::forward(Tape& tape, Var x) const {
  ClassifierOutput out;
  out.features = body_.forward(tape, params_, x);
  out.logits = head_.forward(tape, params_, out.features);
  return out;
}

Tensor Classifier::logits(const Tensor& x) const {
  Tape tape;
  tape.freeze(params_);
  Tensor in({x.rows(), x.cols()}, x.storage());
  return logits(tape, tape.constant(std::move(in))).value();
}

ProjectorPair::ProjectorPair(ProjectorSpec spec) : spec_(spec) {
  if (spec_.bottleneck_dim == 0 || spec_.latent_dim == 0) {
    throw SpecError("projector: zero-width layer");
  }
  Rng rng(spec_.seed);
  p_ = MlpBlock::create(params_, "p.",
                        MlpSpec{{spec_.latent_dim, spec_.bottleneck_dim}, Activation::tanh,
                                Activation::tanh, spec_.weight_norm, spec_.seed},
                        rng);
  pbar_ = MlpBlock::create(params_, "pbar.",
                           MlpSpec{{spec_.bottleneck_dim, spec_.latent_dim}, Activation::tanh,
                                   Activation::identity, spec_.weight_norm, spec_.seed},
                           rng);
}

}  // namespace mssl
