#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mssl/subspace.hpp"

using namespace mssl;
using Eigen::MatrixXd;

namespace {

MatrixXd gaussian(std::size_t r, std::size_t c, Rng& rng) {
  MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.normal();
  return m;
}

MatrixXd random_orthogonal(std::size_t n, Rng& rng) {
  return Subspace::orthonormalize(gaussian(n, n, rng)).basis();
}

MatrixXd columns(std::initializer_list<std::initializer_list<double>> cols) {
  const auto d = static_cast<Eigen::Index>(cols.begin()->size());
  MatrixXd m(d, static_cast<Eigen::Index>(cols.size()));
  Eigen::Index j = 0;
  for (const auto& c : cols) {
    Eigen::Index i = 0;
    for (double v : c) m(i++, j) = v;
    ++j;
  }
  return m;
}

}  // namespace

TEST_CASE("orthonormalize examples") {
  SUBCASE("already orthonormal stays the same up to sign") {
    Rng rng(3);
    const MatrixXd q = Subspace::orthonormalize(gaussian(6, 3, rng)).basis();
    const MatrixXd again = Subspace::orthonormalize(q).basis();
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      const double sign = q.col(j).dot(again.col(j)) < 0 ? -1.0 : 1.0;
      CHECK((q.col(j) - sign * again.col(j)).norm() < 1e-12);
    }
  }
  SUBCASE("(1,0),(1,1) spans the plane") {
    const Subspace s = Subspace::orthonormalize(columns({{1, 0}, {1, 1}}));
    CHECK(s.rank() == 2);
    CHECK((s.basis().transpose() * s.basis() - MatrixXd::Identity(2, 2)).norm() < 1e-14);
    CHECK(std::abs(std::abs(s.basis().determinant()) - 1.0) < 1e-14);
  }
  SUBCASE("scaling leaves the subspace unchanged") {
    Rng rng(4);
    const MatrixXd raw = gaussian(10, 4, rng);
    const Subspace a = Subspace::orthonormalize(raw);
    const Subspace b = Subspace::orthonormalize(7.5 * raw);
    for (double t : principal_angles(a, b)) CHECK(t < 1e-10);
  }
  SUBCASE("rank deficiency names the dependent column count") {
    MatrixXd raw = columns({{1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {2, 0, 0}});
    try {
      (void)Subspace::orthonormalize(raw);
      FAIL("expected RankDeficientError");
    } catch (const RankDeficientError& e) {
      CHECK(e.deficient_columns() == 2);
      CHECK(std::string(e.what()).find('2') != std::string::npos);
    }
  }
}

TEST_CASE("principal angle examples") {
  SUBCASE("identical subspaces") {
    Rng rng(5);
    const Subspace s = Subspace::orthonormalize(gaussian(12, 5, rng));
    for (double t : principal_angles(s, s)) CHECK(t < 1e-10);
    CHECK(geodesic_distance(s, s) < 1e-9);
  }
  SUBCASE("span(e1,e2) vs span(e1,e3)") {
    const Subspace a = Subspace::orthonormalize(columns({{1, 0, 0}, {0, 1, 0}}));
    const Subspace b = Subspace::orthonormalize(columns({{1, 0, 0}, {0, 0, 1}}));
    const auto angles = principal_angles(a, b);
    REQUIRE(angles.size() == 2);
    CHECK(degrees(angles[0]) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(degrees(angles[1]) == doctest::Approx(90.0).epsilon(1e-12));
    CHECK(geodesic_distance(a, b) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-12));
  }
  SUBCASE("tiny angles are resolved") {
    const double eps = 1e-9;
    const Subspace a = Subspace::orthonormalize(columns({{1, 0}}));
    const Subspace b = Subspace::orthonormalize(columns({{std::cos(eps), std::sin(eps)}}));
    CHECK(principal_angles(a, b)[0] == doctest::Approx(eps).epsilon(1e-6));
  }
  SUBCASE("ambient mismatch") {
    const Subspace a = Subspace::orthonormalize(columns({{1, 0, 0}}));
    const Subspace b = Subspace::orthonormalize(columns({{1, 0}}));
    CHECK_THROWS_AS(principal_angles(a, b), std::invalid_argument);
  }
  SUBCASE("rank mismatch for geodesic") {
    const Subspace a = Subspace::orthonormalize(columns({{1, 0, 0}}));
    const Subspace b = Subspace::orthonormalize(columns({{1, 0, 0}, {0, 1, 0}}));
    CHECK(principal_angles(a, b).size() == 1);
    CHECK_THROWS_AS(geodesic_distance(a, b), std::invalid_argument);
  }
}

TEST_CASE("geodesic matches the published random-pair angle row") {
  // First angle 14 deg is 0.244 rad; the other nine are 83..89 deg.
  const double rest[] = {83, 85, 86, 87, 87, 88, 88, 88, 89};
  double s = 0.244 * 0.244;
  for (double a : rest) {
    const double r = a * std::numbers::pi / 180.0;
    s += r * r;
  }
  CHECK(std::sqrt(s) == doctest::Approx(4.55).epsilon(0.005));
}

TEST_CASE("property: symmetry") {
  Rng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 4 + rng.below(10);
    const Subspace a = Subspace::orthonormalize(gaussian(d, 1 + rng.below(3), rng));
    const Subspace b = Subspace::orthonormalize(gaussian(d, 1 + rng.below(3), rng));
    const auto ab = principal_angles(a, b);
    const auto ba = principal_angles(b, a);
    REQUIRE(ab.size() == ba.size());
    for (std::size_t i = 0; i < ab.size(); ++i) CHECK(std::abs(ab[i] - ba[i]) < 1e-12);
  }
}

TEST_CASE("property: orthogonal invariance") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 5 + rng.below(8);
    const MatrixXd qa = Subspace::orthonormalize(gaussian(d, 3, rng)).basis();
    const MatrixXd qb = Subspace::orthonormalize(gaussian(d, 3, rng)).basis();
    const MatrixXd r = random_orthogonal(d, rng);
    const auto before = principal_angles(Subspace::from_orthonormal(qa), Subspace::from_orthonormal(qb));
    const auto after = principal_angles(Subspace::orthonormalize(r * qa), Subspace::orthonormalize(r * qb));
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(std::abs(before[i] - after[i]) < 1e-10);
  }
}

TEST_CASE("property: triangle inequality") {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 4 + rng.below(8);
    const std::size_t r = 1 + rng.below(3);
    const Subspace a = Subspace::orthonormalize(gaussian(d, r, rng));
    const Subspace b = Subspace::orthonormalize(gaussian(d, r, rng));
    const Subspace c = Subspace::orthonormalize(gaussian(d, r, rng));
    CHECK(geodesic_distance(a, c) <= geodesic_distance(a, b) + geodesic_distance(b, c) + 1e-9);
  }
}

TEST_CASE("property: containment bounds angles from below by the enclosing ones") {
  // S1 inside E: the i-th angle of (S1, S2) is at least the i-th angle of (E, S2).
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 8 + rng.below(6);
    const MatrixXd e = Subspace::orthonormalize(gaussian(d, 4, rng)).basis();
    const Subspace s1 = Subspace::orthonormalize(e * gaussian(4, 2, rng));
    const Subspace enclosing = Subspace::from_orthonormal(e);
    const Subspace s2 = Subspace::orthonormalize(gaussian(d, 2, rng));
    const auto inner = principal_angles(s1, s2);
    const auto outer = principal_angles(enclosing, s2);
    for (std::size_t i = 0; i < inner.size(); ++i) CHECK(inner[i] >= outer[i] - 1e-12);
  }
}

TEST_CASE("random subspaces are orthonormal and seed-deterministic") {
  for (auto kind : {RandomSubspaceKind::gaussian, RandomSubspaceKind::uniform01}) {
    Rng r1(21), r2(21);
    const Subspace a = random_subspace(50, 5, r1, kind);
    const Subspace b = random_subspace(50, 5, r2, kind);
    CHECK((a.basis().transpose() * a.basis() - MatrixXd::Identity(5, 5)).norm() < 1e-10);
    CHECK(a.basis() == b.basis());
  }
}

TEST_CASE("nonnegative random subspaces share a small first angle") {
  const auto cmp = average_random_comparison(300, 5, 5, RandomSubspaceKind::uniform01, Rng(2));
  REQUIRE(cmp.angles_deg.size() == 5);
  CHECK(cmp.angles_deg[0] < 30.0);
  CHECK(cmp.angles_deg[4] > 80.0);
  const auto haar = average_random_comparison(300, 5, 5, RandomSubspaceKind::gaussian, Rng(2));
  CHECK(haar.angles_deg[0] > 60.0);
}
