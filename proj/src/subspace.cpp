#include "mssl/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mssl/linalg.hpp"

namespace mssl {

RankDeficientError::RankDeficientError(std::size_t deficient, std::size_t columns)
    : std::invalid_argument("rank-deficient basis: " + std::to_string(deficient) + " of " +
                            std::to_string(columns) + " columns are linearly dependent"),
      deficient_(deficient) {}

Subspace Subspace::orthonormalize(const Eigen::MatrixXd& raw, double rel_tol) {
  const Eigen::Index r = raw.cols();
  if (r == 0) throw RankDeficientError(0, 0);
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(raw).singularValues();
  const double cutoff = rel_tol * sv(0);
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  if (rank < static_cast<std::size_t>(r)) {
    throw RankDeficientError(static_cast<std::size_t>(r) - rank, static_cast<std::size_t>(r));
  }

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(raw.rows(), r);
  // Sign convention: positive diagonal of R.
  const Eigen::MatrixXd rm = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < r; ++j) {
    if (rm(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return Subspace(std::move(q));
}

Subspace Subspace::from_orthonormal(Eigen::MatrixXd basis) {
  const Eigen::MatrixXd gram = basis.transpose() * basis;
  const double err = (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  if (err > 1e-10) {
    throw std::invalid_argument("subspace: basis is not orthonormal (max deviation " +
                                std::to_string(err) + ")");
  }
  return Subspace(std::move(basis));
}

std::vector<double> principal_angles(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim()) {
    throw std::invalid_argument("principal_angles: ambient dimensions " +
                                std::to_string(a.ambient_dim()) + " and " +
                                std::to_string(b.ambient_dim()) + " differ");
  }
  // wide has rank >= narrow; both routes yield rank(narrow) values.
  const Eigen::MatrixXd& wide = a.rank() >= b.rank() ? a.basis() : b.basis();
  const Eigen::MatrixXd& narrow = a.rank() >= b.rank() ? b.basis() : a.basis();
  const Eigen::MatrixXd cross = wide.transpose() * narrow;
  const Eigen::MatrixXd residual = narrow - wide * cross;
  // Descending cosines and, after reversal, ascending sines.
  const Eigen::VectorXd cosines = Eigen::JacobiSVD<Eigen::MatrixXd>(cross).singularValues();
  Eigen::VectorXd sines = Eigen::JacobiSVD<Eigen::MatrixXd>(residual).singularValues();
  sines.reverseInPlace();

  // acos loses precision near 0 and asin near pi/2, so each angle takes the
  // well-conditioned route.
  std::vector<double> angles(static_cast<std::size_t>(cosines.size()));
  for (Eigen::Index i = 0; i < cosines.size(); ++i) {
    const double c = std::clamp(cosines(i), 0.0, 1.0);
    const double s = std::clamp(sines(i), 0.0, 1.0);
    angles[static_cast<std::size_t>(i)] = c * c >= 0.5 ? std::asin(s) : std::acos(c);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

double geodesic_distance(const Subspace& a, const Subspace& b) {
  if (a.rank() != b.rank()) {
    throw std::invalid_argument("geodesic_distance: ranks " + std::to_string(a.rank()) +
                                " and " + std::to_string(b.rank()) + " differ");
  }
  double s = 0.0;
  for (double t : principal_angles(a, b)) s += t * t;
  return std::sqrt(s);
}

const char* random_subspace_kind_name(RandomSubspaceKind kind) {
  return kind == RandomSubspaceKind::gaussian ? "gaussian" : "uniform01";
}

Subspace random_subspace(std::size_t ambient_dim, std::size_t rank, Rng& rng,
                         RandomSubspaceKind kind) {
  Eigen::MatrixXd raw(ambient_dim, rank);
  // Column-major fill: column j is the j-th random vector.
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
      raw(i, j) = kind == RandomSubspaceKind::gaussian ? rng.normal() : rng.uniform();
    }
  }
  return Subspace::orthonormalize(raw);
}

double degrees(double radians) { return radians * 180.0 / std::numbers::pi; }

SubspaceComparison compare(const Subspace& a, const Subspace& b) {
  SubspaceComparison c;
  const auto angles = principal_angles(a, b);
  double s = 0.0;
  for (double t : angles) {
    c.angles_deg.push_back(degrees(t));
    s += t * t;
  }
  c.geodesic = std::sqrt(s);
  return c;
}

SubspaceComparison average_random_comparison(std::size_t ambient_dim, std::size_t rank,
                                             std::size_t samples, RandomSubspaceKind kind,
                                             Rng rng) {
  SubspaceComparison mean;
  mean.angles_deg.assign(rank, 0.0);
  for (std::size_t s = 0; s < samples; ++s) {
    const Subspace a = random_subspace(ambient_dim, rank, rng, kind);
    const Subspace b = random_subspace(ambient_dim, rank, rng, kind);
    const auto c = compare(a, b);
    for (std::size_t i = 0; i < rank; ++i) mean.angles_deg[i] += c.angles_deg[i];
    mean.geodesic += c.geodesic;
  }
  for (auto& a : mean.angles_deg) a /= static_cast<double>(samples);
  mean.geodesic /= static_cast<double>(samples);
  return mean;
}

}  // namespace mssl
