#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mssl/jacobian.hpp"
#include "mssl/models.hpp"
#include "mssl/optim.hpp"
#include "mssl/subspace.hpp"

namespace mssl {

enum class TangentSource { encoder_svd, generator_svd, projector_composed, ground_truth };

const char* tangent_source_name(TangentSource s);
TangentSource parse_tangent_source(const std::string& name);

/// Estimated tangent directions at a base point: rows of `directions`
/// (r x D), each of unit Euclidean norm.
struct TangentBasis {
  Tensor base_point;
  Tensor directions;
  TangentSource source = TangentSource::ground_truth;

  std::size_t count() const { return directions.rows(); }
  std::size_t ambient_dim() const { return directions.cols(); }
};

/// Orthonormal basis spanning the tangent rows.
Subspace tangent_subspace(const TangentBasis& basis);

/// Smooth parametrization of a ground-truth manifold. Points are indexed by
/// an intrinsic coordinate vector and a discrete component (e.g. which circle).
class GroundTruthChart {
 public:
  virtual ~GroundTruthChart() = default;
  virtual std::size_t intrinsic_dim() const = 0;
  virtual std::size_t ambient_dim() const = 0;
  /// 1 x D
  virtual Tensor point(std::span<const double> t, std::size_t component) const = 0;
  /// D x intrinsic_dim, analytic
  virtual Tensor jacobian(std::span<const double> t, std::size_t component) const = 0;
};

/// Top-d_p right singular vectors of J_x h. If J_x h has numerical rank below
/// d_p, only the available rank is returned and a warning is printed.
TangentBasis encoder_tangents(const TapeFn& encoder, const Tensor& x, std::size_t d_p);

/// Top-d_p left singular vectors of J_z g, based at g(z).
TangentBasis generator_tangents(const TapeFn& generator, const Tensor& z, std::size_t d_p);

/// || J_{g(z)} h  J_z g - I_d ||_F
double lemma1_identity(const TapeFn& generator, const TapeFn& encoder, const Tensor& z);

/// Rows of J_x (p o h), normalized.
TangentBasis composed_tangents(const ProjectorPair& pair, const TapeFn& encoder, const Tensor& x);
/// Same for every row of `points`, sharing one batched tape.
std::vector<TangentBasis> composed_tangents(const ProjectorPair& pair, const TapeFn& encoder,
                                            const Tensor& points, TangentSource tag);

/// Orthonormalized columns of the analytic chart Jacobian.
TangentBasis ground_truth_tangents(const GroundTruthChart& chart, std::span<const double> t,
                                   std::size_t component);

class TangentFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// CSV with header point,source,row,t1..tD: one line per tangent direction,
/// grouped by base point index 0..P-1. Values use 17 significant digits.
void save_tangents_csv(std::span<const TangentBasis> bases, const std::filesystem::path& path);
/// Base points are not stored and come back empty.
std::vector<TangentBasis> load_tangents_csv(const std::filesystem::path& path);

enum class FeatureNorm { l1, l2 };

struct ProjectorTrainConfig {
  std::size_t steps = 2000;
  std::size_t batch_size = 64;
  AdamConfig adam{1e-3, 0.9, 0.999, 1e-8};
  /// Norm of the discriminator-feature term; the pixel term is always L1.
  FeatureNorm feature_norm = FeatureNorm::l2;
  std::uint64_t seed = 0;
  /// Record the full-data objective every this many steps and after the last
  /// one (0 = never).
  std::size_t record_every = 100;
};

struct ProjectorTrainResult {
  std::vector<std::pair<std::size_t, double>> curve;
};

/// E_x [ |g(h(x)) - g(pbar(p(h(x))))|_1 + |fX(g(h(x))) - fX(g(pbar(p(h(x)))))| ]
double projector_objective(const ProjectorPair& pair, const Mlp& generator, const Mlp& encoder,
                           const DualDiscriminator& discriminator, const Tensor& data,
                           FeatureNorm norm);

/// Fits (p, pbar) with g, h and f held fixed.
ProjectorTrainResult train_projector(ProjectorPair& pair, const Mlp& generator,
                                     const Mlp& encoder, const DualDiscriminator& discriminator,
                                     const Tensor& data, const ProjectorTrainConfig& config);

}  // namespace mssl
