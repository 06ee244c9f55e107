#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "mssl/tangent.hpp"
#include "mssl/tensor.hpp"

namespace mssl {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ManifoldKind { circle_pair, two_arcs, swiss_embed };

const char* manifold_kind_name(ManifoldKind kind);
ManifoldKind parse_manifold_kind(const std::string& name);

/// Two concentric circles (radius 1 and 2) or two interleaved half circles
/// in a plane, or a swiss roll in a 3-space, rotated into R^D by a random
/// orthogonal frame. Component = class.
class EmbeddedChart final : public GroundTruthChart {
 public:
  EmbeddedChart(ManifoldKind kind, std::size_t ambient_dim, std::uint64_t seed);

  std::size_t intrinsic_dim() const override;
  std::size_t ambient_dim() const override { return ambient_dim_; }
  Tensor point(std::span<const double> t, std::size_t component) const override;
  Tensor jacobian(std::span<const double> t, std::size_t component) const override;

  ManifoldKind kind() const { return kind_; }
  std::size_t num_components() const { return 2; }
  /// Coordinates before embedding (2 or 3 of them).
  std::vector<double> planar(std::span<const double> t, std::size_t component) const;
  /// Map a planar/3-space vector through the embedding frame.
  Tensor embed(std::span<const double> local) const;

 private:
  ManifoldKind kind_;
  std::size_t ambient_dim_;
  Tensor frame_;  // D x 3, orthonormal columns
};

struct Split {
  std::vector<std::size_t> labeled;
  std::vector<std::size_t> unlabeled;
  std::vector<std::size_t> test;
};

struct DatasetManifest {
  std::string kind;  // manifold kind or "csv"
  std::size_t dim = 0;
  std::size_t n = 0;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::size_t num_classes = 0;
  std::size_t n_labeled = 0;
  std::size_t n_unlabeled = 0;
  std::size_t n_test = 0;
  std::uint64_t split_seed = 0;
  double test_fraction = 0.0;
};

struct Dataset {
  Tensor x;                         // N x D
  std::vector<std::size_t> labels;  // 0-based; empty when unlabeled
  std::size_t num_classes = 0;
  std::shared_ptr<const EmbeddedChart> chart;
  Tensor intrinsic;                     // N x intrinsic_dim when chart is set
  std::vector<std::size_t> components;  // chart component per point
  Split split;
  DatasetManifest manifest;

  std::size_t size() const { return x.rows(); }
  std::size_t dim() const { return x.cols(); }
  Tensor rows(std::span<const std::size_t> ids) const;
  std::vector<std::size_t> labels_of(std::span<const std::size_t> ids) const;
  TangentBasis ground_truth_tangents(std::size_t id) const;
};

/// Noise default 0.01. Requires D >= 3 and N >= 10.
Dataset make_embedded_manifold(ManifoldKind kind, std::size_t dim, std::size_t n,
                               double noise_sigma, std::uint64_t seed);

/// Random test subset of round(N * test_fraction) points, then a stratified
/// labeled subset of size n_labeled from the rest (class counts differ by at
/// most one); everything else is unlabeled.
void split_semi_supervised(Dataset& ds, std::size_t n_labeled, std::uint64_t seed,
                           double test_fraction = 0.2);

/// Header x1..xD[,label]; labels are written 1..k. Values use 17 significant
/// digits so a save/load round trip is exact.
void save_csv(const Dataset& ds, const std::filesystem::path& path);
Dataset load_csv(const std::filesystem::path& path);

std::string manifest_json(const DatasetManifest& m);

/// Writes data.csv and manifest.json into `dir`.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
/// Reads a directory written by save_dataset (or a CSV file with an optional
/// manifest.json beside it). Chart-generated data is regenerated from the
/// manifest and checked against the CSV, which restores the chart; the
/// recorded split is re-applied.
Dataset load_dataset(const std::filesystem::path& path);
DatasetManifest parse_manifest_json(const std::string& text);

}  // namespace mssl
