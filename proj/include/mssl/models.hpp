#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mssl/jacobian.hpp"
#include "mssl/param_store.hpp"
#include "mssl/rng.hpp"
#include "mssl/tape.hpp"

namespace mssl {

class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Activation { identity, elu, tanh };

const char* activation_name(Activation a);
Activation parse_activation(const std::string& name);

struct MlpSpec {
  std::vector<std::size_t> layer_sizes;
  Activation hidden = Activation::elu;
  /// Applied after the last layer.
  Activation output = Activation::identity;
  bool weight_norm = true;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

/// A stack of affine layers living inside a ParamStore under a name prefix.
/// Holds parameter indices only, so it stays valid when the store is copied.
class MlpBlock {
 public:
  MlpBlock() = default;
  /// Appends freshly initialized parameters to `store`: directions from
  /// U(-sqrt(3/fan_in), sqrt(3/fan_in)), scales equal to the drawn row norms
  /// (so the initial effective weight is the draw itself), biases zero.
  static MlpBlock create(ParamStore& store, const std::string& prefix, const MlpSpec& spec,
                         Rng& rng);

  Var forward(Tape& tape, const ParamStore& store, Var x) const;
  /// Post-activation output of every layer, last entry equals forward().
  std::vector<Var> activations(Tape& tape, const ParamStore& store, Var x) const;

  std::size_t num_layers() const { return layers_.size(); }
  std::size_t input_dim() const { return spec_.layer_sizes.front(); }
  std::size_t output_dim() const { return spec_.layer_sizes.back(); }
  const MlpSpec& spec() const { return spec_; }

  /// Effective weight matrix of layer i (after weight normalization).
  Tensor effective_weight(const ParamStore& store, std::size_t layer) const;

 private:
  struct Layer {
    std::size_t weight = 0;  // v when weight-normalized, W otherwise
    std::size_t scale = 0;
    std::size_t bias = 0;
  };
  Var layer_out(Tape& tape, const ParamStore& store, Var x, std::size_t i) const;

  MlpSpec spec_;
  std::vector<Layer> layers_;
};

/// Standalone MLP: generator g, encoder h, oracle classifiers.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(MlpSpec spec);

  Var forward(Tape& tape, Var x) const { return block_.forward(tape, params_, x); }
  std::vector<Var> activations(Tape& tape, Var x) const {
    return block_.activations(tape, params_, x);
  }
  Tensor operator()(const Tensor& x) const;
  TapeFn as_fn() const;

  const MlpSpec& spec() const { return block_.spec(); }
  std::size_t input_dim() const { return block_.input_dim(); }
  std::size_t output_dim() const { return block_.output_dim(); }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  const MlpBlock& block() const { return block_; }

 private:
  ParamStore params_;
  MlpBlock block_;
};

enum class FeatureTag { x_pipeline_last, z_pipeline_last, trunk_penultimate };

const char* feature_tag_name(FeatureTag tag);
FeatureTag parse_feature_tag(const std::string& name);

struct DualDiscriminatorSpec {
  std::size_t latent_dim = 8;
  std::size_t data_dim = 20;
  std::size_t num_classes = 2;
  std::vector<std::size_t> z_hidden = {64};
  std::vector<std::size_t> x_hidden = {64, 64};
  std::vector<std::size_t> trunk_hidden = {64};
  bool weight_norm = true;
  std::uint64_t seed = 0;

  friend bool operator==(const DualDiscriminatorSpec&, const DualDiscriminatorSpec&) = default;
};

struct DiscriminatorOutput {
  Var realness_logit;  // B x 1
  Var realness;        // sigmoid(realness_logit), in (0, 1)
  Var class_logits;    // B x k, the fake logit is the implicit k+1'th zero
  Var features_fx;     // f^X_{-1}(x)
  Var features_fz;
  Var trunk;           // last trunk layer, input of the realness head
};

/// Joint discriminator f(z, x): separate ELU pipelines for z and x whose
/// outputs are concatenated into a shared trunk ending in a realness logit.
/// The class head reads the x-pipeline features only, so class logits are a
/// function of x alone.
class DualDiscriminator {
 public:
  DualDiscriminator() = default;
  explicit DualDiscriminator(DualDiscriminatorSpec spec);

  DiscriminatorOutput forward(Tape& tape, Var z, Var x) const;
  Var x_features(Tape& tape, Var x) const;
  Var class_logits(Tape& tape, Var x) const;
  Var feature_layer(Tape& tape, Var z, Var x, FeatureTag tag) const;
  std::size_t feature_dim(FeatureTag tag) const;

  const DualDiscriminatorSpec& spec() const { return spec_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

 private:
  DualDiscriminatorSpec spec_;
  ParamStore params_;
  MlpBlock z_pipe_, x_pipe_, trunk_, realness_head_, class_head_;
};

struct ClassifierSpec {
  std::size_t data_dim = 20;
  std::size_t num_classes = 2;
  std::vector<std::size_t> hidden = {64, 64};
  bool weight_norm = true;
  std::uint64_t seed = 0;

  friend bool operator==(const ClassifierSpec&, const ClassifierSpec&) = default;
};

struct ClassifierOutput {
  Var logits;    // B x k
  Var features;  // last hidden layer (feature-matching layer)
};

/// x-only (k+1)-class discriminator used as the semi-supervised classifier.
class Classifier {
 public:
  Classifier() = default;
  explicit Classifier(ClassifierSpec spec);

  ClassifierOutput forward(Tape& tape, Var x) const;
  Var logits(Tape& tape, Var x) const { return forward(tape, x).logits; }
  Tensor logits(const Tensor& x) const;

  const ClassifierSpec& spec() const { return spec_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

 private:
  ClassifierSpec spec_;
  ParamStore params_;
  MlpBlock body_, head_;
};

struct ProjectorSpec {
  std::size_t latent_dim = 8;
  std::size_t bottleneck_dim = 4;
  bool weight_norm = true;
  std::uint64_t seed = 0;

  friend bool operator==(const ProjectorSpec&, const ProjectorSpec&) = default;
};

/// p: R^d -> R^{d_p} and pbar: R^{d_p} -> R^d realized as one two-layer net
/// with a tanh hidden layer of width d_p; p is the hidden layer.
class ProjectorPair {
 public:
  ProjectorPair() = default;
  explicit ProjectorPair(ProjectorSpec spec);

  Var project(Tape& tape, Var u) const { return p_.forward(tape, params_, u); }
  Var lift(Tape& tape, Var q) const { return pbar_.forward(tape, params_, q); }
  Var roundtrip(Tape& tape, Var u) const { return lift(tape, project(tape, u)); }

  const ProjectorSpec& spec() const { return spec_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  const MlpBlock& p_block() const { return p_; }
  const MlpBlock& pbar_block() const { return pbar_; }

 private:
  ProjectorSpec spec_;
  ParamStore params_;
  MlpBlock p_, pbar_;
};

}  // namespace mssl
