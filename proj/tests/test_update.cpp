#include <doctest.h>

#include <Eigen/Dense>
#include <limits>

#include "sp2opt/factored_hessian.hpp"
#include "sp2opt/rng.hpp"

using namespace sp2opt;

namespace {

Eigen::MatrixXd random_symmetric(int p, Rng& rng) {
  Eigen::MatrixXd M(p, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < p; ++i) M(i, j) = rng.normal();
  return 0.5 * (M + M.transpose());
}

}  // namespace

TEST_CASE("rank-one update of the identity") {
  auto F = FactoredHessian::identity(2);
  Eigen::VectorXd z(2);
  z << 1.0, 1.0;
  F.rank_one_update(1.0, z);
  Eigen::MatrixXd want(2, 2);
  want << 2.0, 1.0, 1.0, 2.0;
  CHECK((F.reconstruct() - want).norm() <= 1e-14);
  CHECK(F.inertia().positive == 2);
}

TEST_CASE("vanishing pivot merges into a 2x2 block") {
  Eigen::MatrixXd A(2, 2);
  A << -1.0, 0.0, 0.0, 1.0;
  auto F = FactoredHessian::factorize(A);
  Eigen::VectorXd z(2);
  z << 1.0, 1.0;
  // A + z z^T = [[0, 1], [1, 2]]: the (0,0) pivot is exactly zero, so the
  // sweep must escape through the merged 2x2 pivot without repermuting.
  const auto perm_before = F.perm();
  F.rank_one_update(1.0, z);
  Eigen::MatrixXd want(2, 2);
  want << 0.0, 1.0, 1.0, 2.0;
  CHECK((F.reconstruct() - want).norm() <= 1e-14);
  REQUIRE(F.core().blocks().size() == 1);
  CHECK(F.core().blocks()[0].size == 2);
  CHECK(F.perm() == perm_before);
  const Inertia n = F.inertia();
  CHECK(n.positive == 1);
  CHECK(n.negative == 1);
}

TEST_CASE("update to an exactly singular matrix is refused") {
  auto F = FactoredHessian::identity(1);
  Eigen::VectorXd z(1);
  z << 1.0;
  CHECK_THROWS_AS(F.rank_one_update(-1.0, z), SingularUpdateError);
}

TEST_CASE("updated() leaves the original untouched") {
  // Positive definite base and positive sigma: the sweep cannot refuse, so
  // the test isolates the copy semantics.
  Rng rng(5);
  Eigen::MatrixXd M(6, 6);
  for (int j = 0; j < 6; ++j)
    for (int i = 0; i < 6; ++i) M(i, j) = rng.normal();
  const Eigen::MatrixXd A =
      M * M.transpose() + 3.0 * Eigen::MatrixXd::Identity(6, 6);
  const auto F = FactoredHessian::factorize(A);
  const Eigen::VectorXd z = rng.normal_vector(6);
  const auto G = F.updated(0.7, z);
  CHECK((F.reconstruct() - A).norm() <= 1e-12 * A.norm());
  CHECK((G.reconstruct() - (A + 0.7 * z * z.transpose())).norm() <=
        1e-10 * A.norm());
}

TEST_CASE("zero vector and zero sigma are no-ops") {
  Rng rng(9);
  const Eigen::MatrixXd A = random_symmetric(4, rng);
  auto F = FactoredHessian::factorize(A);
  const Eigen::MatrixXd before = F.reconstruct();
  F.rank_one_update(0.0, rng.normal_vector(4));
  F.rank_one_update(1.0, Eigen::VectorXd::Zero(4));
  CHECK((F.reconstruct() - before).norm() == 0.0);
}

TEST_CASE("random update sequences stay accurate and bounded") {
  Rng rng(77);
  for (int p = 2; p <= 10; p += 2) {
    for (int rep = 0; rep < 6; ++rep) {
      Eigen::MatrixXd A = random_symmetric(p, rng);
      auto F = FactoredHessian::factorize(A);
      const auto perm_before = F.perm();
      int applied = 0;
      for (int t = 0; t < 12; ++t) {
        const double sigma = (t % 2 == 0 ? 1.0 : -1.0) * (0.1 + rng.uniform());
        const Eigen::VectorXd z = rng.normal_vector(p);
        // A refused update corrupts the sweep, so work on a copy the way
        // step() does and keep the old factor on failure.
        FactoredHessian next = F;
        try {
          next.rank_one_update(sigma, z);
        } catch (const SingularUpdateError&) {
          continue;
        }
        F = std::move(next);
        A += sigma * z * z.transpose();
        ++applied;

        const double rel =
            (F.reconstruct() - A).norm() / std::max(1.0, A.norm());
        CHECK(rel <= 1e-10);
        CHECK(F.max_abs_entry() <=
              FactoredHessian::kEntryBound + FactoredHessian::kEntryTol);
        CHECK(F.perm() == perm_before);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
        int pos = 0, neg = 0;
        double lmin = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < p; ++i) {
          (es.eigenvalues()[i] > 0 ? pos : neg) += 1;
          lmin = std::min(lmin, std::abs(es.eigenvalues()[i]));
        }
        if (lmin > 1e-8 * A.norm()) {  // sign counts are unambiguous
          const Inertia n = F.inertia();
          CHECK(n.positive == pos);
          CHECK(n.negative == neg);
        }
      }
      CHECK(applied > 0);
    }
  }
}

TEST_CASE("scale_core scales the reconstruction") {
  Rng rng(13);
  const Eigen::MatrixXd A = random_symmetric(5, rng);
  auto F = FactoredHessian::factorize(A);
  F.scale_core(0.25);
  CHECK((F.reconstruct() - 0.25 * A).norm() <= 1e-12 * A.norm());
}
