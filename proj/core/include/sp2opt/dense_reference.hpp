#pragma once

#include <Eigen/Core>

#include "sp2opt/errors.hpp"
#include "sp2opt/optimizer.hpp"
#include "sp2opt/precondition.hpp"

namespace sp2opt {

enum class DensePrecondKind {
  QuadraticSqrt,   // f_k(H) = (H H + delta_k I)^{1/2}
  DiagonalShift,   // f_k(H) = H + delta_k I (provided for completeness)
};

struct DenseConfig {
  DensePrecondKind kind = DensePrecondKind::QuadraticSqrt;
  double delta0 = 1e-4;  // delta_k = delta0 * exp(-k)
};

// Symmetric square root via dense eigendecomposition. Throws NotPsdError when
// an eigenvalue is below -1e-10 (relative to max(1, |lambda_max|)); tiny
// negative rounding is clamped to zero.
Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& A);

// (1/2)(x y^T + y x^T)
Eigen::MatrixXd sym_outer(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// O(p^3) dense Hessian-estimate recursion: the correctness oracle for the
// factored path and the slow baseline for runtime-ratio studies.
class DenseReference {
 public:
  explicit DenseReference(int p, double h0_diag = 1.0, DenseConfig cfg = {});
  explicit DenseReference(Eigen::MatrixXd H, DenseConfig cfg = {});

  const Eigen::MatrixXd& hessian() const { return H_; }
  int dim() const { return static_cast<int>(H_.rows()); }

  // H <- (1-w) H + w Hhat; symmetry is re-enforced after every update.
  void blend(double wk, const Eigen::MatrixXd& h_hat);

  // H <- t H + b (u~ u~^T - v~ v~^T): dense mirror of the factored update.
  void apply_terms(double t, double b, const Eigen::VectorXd& u_tilde,
                   const Eigen::VectorXd& v_tilde);

  // H <- t H + w Hhat (the blend with an explicit decay factor, used when the
  // factored path floors t; with t = 1 - w it is exactly blend()).
  void blend_scaled(double t, double wk, const Eigen::MatrixXd& h_hat);

  Eigen::MatrixXd preconditioned(long k) const;

  // Eigenvalue-threshold map lambda -> max(tau, |lambda|) applied to the full
  // spectrum of H; the dense counterpart of the factored preconditioner. Sets
  // *clamped when any eigenvalue was altered.
  Eigen::MatrixXd preconditioned_threshold(const StabilityThreshold& cfg,
                                           bool* clamped = nullptr) const;

  static Eigen::VectorXd solve(const Eigen::MatrixXd& M,
                               const Eigen::VectorXd& g);

 private:
  Eigen::MatrixXd H_;
  DenseConfig cfg_;
};

// One full original-algorithm iteration (loss variants) from an externally
// supplied draw and measurement set, so paired runs can share the random
// stream with the efficient path.
struct DenseRunState {
  long k = 0;
  Eigen::VectorXd theta;
  DenseReference hessian;
  double optimal_weight_denom = 0.0;
  long blocked_total = 0;

  explicit DenseRunState(int p, double h0_diag = 1.0)
      : theta(Eigen::VectorXd::Zero(p)), hessian(p, h0_diag) {}
};

void dense_step_with(DenseRunState& state, Variant v, const GainSchedule& gains,
                     const StepPolicy& policy, const PerturbationDraw& draw,
                     const MeasurementSet& m);

}  // namespace sp2opt
