#pragma once

#include <Eigen/Core>
#include <vector>

#include "sp2opt/factored_hessian.hpp"

namespace sp2opt {

// tau_k = max(floor, scale * p * max_j |lambda_j|).
struct StabilityThreshold {
  double floor = 1e-4;
  double scale = 1e-4;
};

// Closed-form eigendecomposition of the block-diagonal core: per 2x2 block a
// Jacobi rotation Q = [[c, s], [-s, c]] with block = Q diag(l0, l1) Q^T; 1x1
// blocks pass through. Rotations are kept in block order.
struct BlockSpectrum {
  struct Rotation {
    int start = 0;
    int size = 1;
    double c = 1.0;
    double s = 0.0;
  };
  std::vector<Rotation> rotations;
  Eigen::VectorXd values;  // eigenvalue per index
};

BlockSpectrum block_eigen(const BlockDiagonal& core);

double compute_tau(const Eigen::VectorXd& values,
                   const StabilityThreshold& cfg = {});

// lambda-bar_j = max(tau, |lambda_j|); positive eigenvalues >= tau pass
// through bit-identically (the fast path relies on this).
Eigen::VectorXd threshold_eigenvalues(const Eigen::VectorXd& values,
                                      double tau);

struct Preconditioner {
  BlockSpectrum spectrum;
  Eigen::VectorXd clamped;  // thresholded eigenvalues
  double tau = 0.0;
  // True iff clamped == values bitwise: preconditioning is the identity and
  // the preconditioned matrix IS the current factorization.
  bool identity_pass = false;
};

Preconditioner make_preconditioner(const FactoredHessian& F,
                                   const StabilityThreshold& cfg = {});

// Solves (P^T L Q Lambda-bar Q^T L^T P) d = g in O(p^2).
Eigen::VectorXd descent_direction(const FactoredHessian& F,
                                  const Preconditioner& pc,
                                  const Eigen::VectorXd& g);

// (P^T L Q Lambda-bar Q^T L^T P) x, O(p^2); residual checks and dense tests.
Eigen::VectorXd preconditioned_apply(const FactoredHessian& F,
                                     const Preconditioner& pc,
                                     const Eigen::VectorXd& x);

// Dense preconditioned matrix. On the identity pass this reuses the untouched
// core so the result is bit-identical to F.reconstruct().
Eigen::MatrixXd reconstruct_preconditioned(const FactoredHessian& F,
                                           const Preconditioner& pc);

}  // namespace sp2opt
