#include "sp2opt/dense_reference.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <utility>

namespace sp2opt {

namespace {

void symmetrize(Eigen::MatrixXd& M) {
  Eigen::MatrixXd sym = 0.5 * (M + M.transpose());
  M = std::move(sym);
}

}  // namespace

Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) {
    throw NotPsdError("symmetric eigendecomposition did not converge");
  }
  Eigen::VectorXd lam = es.eigenvalues();
  const double lmax = lam.size() > 0 ? lam.cwiseAbs().maxCoeff() : 0.0;
  const double tol = -1e-10 * std::max(1.0, lmax);
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam[i] < tol) {
      throw NotPsdError("matrix square root requested for indefinite matrix");
    }
    lam[i] = std::sqrt(std::max(0.0, lam[i]));
  }
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd sym_outer(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return 0.5 * (x * y.transpose() + y * x.transpose());
}

DenseReference::DenseReference(int p, double h0_diag, DenseConfig cfg)
    : H_(Eigen::MatrixXd::Identity(p, p) * h0_diag), cfg_(cfg) {
  if (p <= 0) throw DimensionError("dense reference dimension must be positive");
}

DenseReference::DenseReference(Eigen::MatrixXd H, DenseConfig cfg)
    : H_(std::move(H)), cfg_(cfg) {
  if (H_.rows() == 0 || H_.rows() != H_.cols()) {
    throw DimensionError("dense reference requires a square matrix");
  }
}

void DenseReference::blend(double wk, const Eigen::MatrixXd& h_hat) {
  blend_scaled(1.0 - wk, wk, h_hat);
}

void DenseReference::blend_scaled(double t, double wk,
                                  const Eigen::MatrixXd& h_hat) {
  if (h_hat.rows() != H_.rows() || h_hat.cols() != H_.cols()) {
    throw DimensionError("dense blend dimension mismatch");
  }
  H_ = t * H_ + wk * h_hat;
  symmetrize(H_);
}

void DenseReference::apply_terms(double t, double b,
                                 const Eigen::VectorXd& u_tilde,
                                 const Eigen::VectorXd& v_tilde) {
  if (u_tilde.size() != H_.rows() || v_tilde.size() != H_.rows()) {
    throw DimensionError("dense update dimension mismatch");
  }
  H_ *= t;
  if (b != 0.0) {
    H_.selfadjointView<Eigen::Lower>().rankUpdate(u_tilde, b);
    H_.selfadjointView<Eigen::Lower>().rankUpdate(v_tilde, -b);
    H_ = H_.selfadjointView<Eigen::Lower>();
  }
  symmetrize(H_);
}

Eigen::MatrixXd DenseReference::preconditioned(long k) const {
  const double delta = cfg_.delta0 * std::exp(-static_cast<double>(k));
  switch (cfg_.kind) {
    case DensePrecondKind::QuadraticSqrt: {
      Eigen::MatrixXd m2 = H_ * H_;
      symmetrize(m2);
      m2.diagonal().array() += delta;
      return matrix_sqrt_psd(m2);
    }
    case DensePrecondKind::DiagonalShift: {
      Eigen::MatrixXd shifted = H_;
      shifted.diagonal().array() += delta;
      return shifted;
    }
  }
  throw ConfigError("unknown dense preconditioner kind");
}

Eigen::MatrixXd DenseReference::preconditioned_threshold(
    const StabilityThreshold& cfg, bool* clamped) const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H_);
  if (es.info() != Eigen::Success) {
    throw NotPsdError("symmetric eigendecomposition did not converge");
  }
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double tau = compute_tau(lam, cfg);
  const Eigen::VectorXd lbar = threshold_eigenvalues(lam, tau);
  if (clamped != nullptr) {
    *clamped = false;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      if (lbar[i] != lam[i]) {
        *clamped = true;
        break;
      }
    }
  }
  return es.eigenvectors() * lbar.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::VectorXd DenseReference::solve(const Eigen::MatrixXd& M,
                                      const Eigen::VectorXd& g) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
  if (ldlt.info() != Eigen::Success) {
    throw SingularUpdateError("dense preconditioner factorization failed");
  }
  return ldlt.solve(g);
}

void dense_step_with(DenseRunState& state, Variant v, const GainSchedule& gains,
                     const StepPolicy& policy, const PerturbationDraw& draw,
                     const MeasurementSet& m) {
  const long k = state.k;
  const double ak = gains.a_k(k);
  const double ck = gains.c_k(k);
  const double ctk = gains.c_tilde_k(k);
  const double wk = weight_for_iteration(gains.rule, gains.w, k, ck, ctk,
                                         state.optimal_weight_denom);

  const Eigen::MatrixXd& H = state.hessian.hessian();
  UpdateTerms terms = update_terms_with(
      v, m, ck, ctk, wk, draw,
      [&H](const Eigen::VectorXd& x) -> Eigen::VectorXd { return H * x; });

  const double t_eff = std::max(terms.t, policy.t_floor);
  state.hessian.apply_terms(t_eff, terms.skip ? 0.0 : terms.b, terms.u_tilde,
                            terms.v_tilde);

  const Eigen::VectorXd g = gradient_estimate(v, m, ck, draw);
  const Eigen::MatrixXd precond = state.hessian.preconditioned(k);
  const Eigen::VectorXd d = DenseReference::solve(precond, g);

  const double step_norm = ak * d.norm();
  if (policy.blocking_threshold > 0.0 &&
      step_norm > policy.blocking_threshold) {
    ++state.blocked_total;
  } else {
    state.theta -= ak * d;
  }
  ++state.k;
}

}  // namespace sp2opt
