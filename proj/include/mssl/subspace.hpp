#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mssl/rng.hpp"

namespace mssl {

class RankDeficientError : public std::invalid_argument {
 public:
  RankDeficientError(std::size_t deficient, std::size_t columns);
  std::size_t deficient_columns() const { return deficient_; }

 private:
  std::size_t deficient_;
};

/// Orthonormal basis (D x r, columns) of a linear subspace of R^D.
class Subspace {
 public:
  /// QR orthonormalization of the columns of `raw`. Columns must be linearly
  /// independent: smallest singular value > rel_tol * largest.
  static Subspace orthonormalize(const Eigen::MatrixXd& raw, double rel_tol = 1e-12);
  /// Wrap a basis that is already orthonormal (checked to 1e-10).
  static Subspace from_orthonormal(Eigen::MatrixXd basis);

  const Eigen::MatrixXd& basis() const { return basis_; }
  std::size_t ambient_dim() const { return static_cast<std::size_t>(basis_.rows()); }
  std::size_t rank() const { return static_cast<std::size_t>(basis_.cols()); }

 private:
  explicit Subspace(Eigen::MatrixXd basis) : basis_(std::move(basis)) {}
  Eigen::MatrixXd basis_;
};

/// Principal angles in radians, ascending, min(r1, r2) of them:
/// theta_i = arccos(sigma_i(Q1^T Q2)) with sigma clamped to [0, 1].
std::vector<double> principal_angles(const Subspace& a, const Subspace& b);

/// Grassmannian geodesic distance sqrt(sum theta_i^2), theta in radians.
/// Requires equal ranks.
double geodesic_distance(const Subspace& a, const Subspace& b);

enum class RandomSubspaceKind {
  /// i.i.d. N(0, 1) entries: rotation-invariant (Haar) subspaces.
  gaussian,
  /// i.i.d. U[0, 1] entries, i.e. random nonnegative "images". All such
  /// subspaces lie close to the all-ones direction, which is what produces a
  /// small first principal angle between two independent draws.
  uniform01,
};

const char* random_subspace_kind_name(RandomSubspaceKind kind);

Subspace random_subspace(std::size_t ambient_dim, std::size_t rank, Rng& rng,
                         RandomSubspaceKind kind);

struct SubspaceComparison {
  std::vector<double> angles_deg;
  double geodesic = 0.0;
};

SubspaceComparison compare(const Subspace& a, const Subspace& b);

/// Mean angles (degrees) and mean geodesic distance over `samples`
/// independent pairs of random subspaces.
SubspaceComparison average_random_comparison(std::size_t ambient_dim, std::size_t rank,
                                             std::size_t samples, RandomSubspaceKind kind,
                                             Rng rng);

double degrees(double radians);

}  // namespace mssl
