#pragma once

#include <Eigen/Core>
#include <vector>

#include "sp2opt/block_diagonal.hpp"
#include "sp2opt/errors.hpp"

namespace sp2opt {

struct Inertia {
  int positive = 0;
  int negative = 0;
  int zero = 0;
};

// Symmetric indefinite factorization P A P^T = L B L^T with unit
// lower-triangular L and block-diagonal B (1x1/2x2 blocks). P is stored as a
// permutation vector: (P x)_i = x[perm[i]].
//
// Factorization uses complete (Bunch-Parlett) pivoting, which bounds every
// off-diagonal entry of L by 1/(1 - rho), rho = (1 + sqrt(17))/8, i.e. by
// 2.7808. Rank-one updates keep the permutation fixed and preserve the same
// bound by construction: a candidate pivot whose multipliers would breach it
// is merged with its 1x1 neighbor into a 2x2 pivot, and anything else throws
// SingularUpdateError so the caller can redraw.
class FactoredHessian {
 public:
  // Entry bound guaranteed by complete pivoting; updates enforce it too.
  static constexpr double kEntryBound = 2.7808;
  static constexpr double kEntryTol = 1e-9;
  // Relative pivot floor for updates (scaled by the update's magnitude).
  static constexpr double kPivotTol = 1e-12;

  FactoredHessian() = default;

  // P = L = I, B = diag(value): the factored form of value*I.
  static FactoredHessian identity(int p, double value = 1.0);

  // O(p^3) complete-pivoting factorization. A must be symmetric to 1e-12
  // relative; exactly singular inputs yield zero 1x1 blocks.
  static FactoredHessian factorize(const Eigen::MatrixXd& A);

  int dim() const { return static_cast<int>(perm_.size()); }

  // In-place A <- A + sigma*z*z^T keeping P fixed, O(p^2).
  void rank_one_update(double sigma, const Eigen::VectorXd& z);

  // Value-semantics variant of rank_one_update.
  FactoredHessian updated(double sigma, const Eigen::VectorXd& z) const;

  // B <- t*B, the factored form of A <- t*A.
  void scale_core(double t);

  // A x in O(p^2).
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

  // Dense A = P^T L B L^T P; diagnostic/test use.
  Eigen::MatrixXd reconstruct() const;

  // Sylvester inertia read off the blocks.
  Inertia inertia() const;

  // max |L_ij| over strict lower entries.
  double max_abs_entry() const;

  const std::vector<int>& perm() const { return perm_; }
  const Eigen::MatrixXd& lower() const { return L_; }
  const BlockDiagonal& core() const { return core_; }
  BlockDiagonal& core() { return core_; }

 private:
  std::vector<int> perm_;  // row i of PAP^T is row perm_[i] of A
  Eigen::MatrixXd L_;      // unit lower triangular, zeros stored above
  BlockDiagonal core_;     // B
};

}  // namespace sp2opt
