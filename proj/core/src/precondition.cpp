#include "sp2opt/precondition.hpp"

#include <cmath>

namespace sp2opt {
namespace {

// Apply Q^T (transpose = true) or Q (false) of the rotation list in place.
void apply_rotations(const BlockSpectrum& sp, Eigen::VectorXd& x,
                     bool transpose) {
  for (const BlockSpectrum::Rotation& r : sp.rotations) {
    if (r.size != 2) continue;
    const double x0 = x[r.start];
    const double x1 = x[r.start + 1];
    if (transpose) {
      x[r.start] = r.c * x0 - r.s * x1;
      x[r.start + 1] = r.s * x0 + r.c * x1;
    } else {
      x[r.start] = r.c * x0 + r.s * x1;
      x[r.start + 1] = -r.s * x0 + r.c * x1;
    }
  }
}

Eigen::VectorXd permute(const std::vector<int>& perm,
                        const Eigen::VectorXd& x) {
  Eigen::VectorXd y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    y[i] = x[perm[static_cast<size_t>(i)]];
  }
  return y;
}

Eigen::VectorXd unpermute(const std::vector<int>& perm,
                          const Eigen::VectorXd& x) {
  Eigen::VectorXd y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    y[perm[static_cast<size_t>(i)]] = x[i];
  }
  return y;
}

}  // namespace

BlockSpectrum block_eigen(const BlockDiagonal& core) {
  BlockSpectrum sp;
  sp.values.resize(core.dim());
  sp.rotations.reserve(core.blocks().size());
  for (const BlockDiagonal::Block& blk : core.blocks()) {
    if (blk.size == 1) {
      sp.rotations.push_back({blk.start, 1, 1.0, 0.0});
      sp.values[blk.start] = blk.a;
      continue;
    }
    if (blk.b == 0.0) {
      sp.rotations.push_back({blk.start, 2, 1.0, 0.0});
      sp.values[blk.start] = blk.a;
      sp.values[blk.start + 1] = blk.d;
      continue;
    }
    // Jacobi rotation zeroing the off-diagonal: with theta = (d-a)/(2b) and
    // tan = sign(theta)/(|theta| + sqrt(1+theta^2)), Q^T M Q =
    // diag(a - tan*b, d + tan*b).
    const double theta = (blk.d - blk.a) / (2.0 * blk.b);
    const double tan =
        std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(1.0, theta));
    const double c = 1.0 / std::hypot(1.0, tan);
    const double s = tan * c;
    sp.rotations.push_back({blk.start, 2, c, s});
    sp.values[blk.start] = blk.a - tan * blk.b;
    sp.values[blk.start + 1] = blk.d + tan * blk.b;
  }
  return sp;
}

double compute_tau(const Eigen::VectorXd& values,
                   const StabilityThreshold& cfg) {
  const double p = static_cast<double>(values.size());
  const double lmax = values.size() > 0 ? values.cwiseAbs().maxCoeff() : 0.0;
  const double tau = std::max(cfg.floor, cfg.scale * p * lmax);
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw ThresholdError("compute_tau: threshold must be positive and finite");
  }
  return tau;
}

Eigen::VectorXd threshold_eigenvalues(const Eigen::VectorXd& values,
                                      double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw ThresholdError("threshold_eigenvalues: tau must be positive");
  }
  Eigen::VectorXd out(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    out[i] = std::max(tau, std::abs(values[i]));
  }
  return out;
}

Preconditioner make_preconditioner(const FactoredHessian& F,
                                   const StabilityThreshold& cfg) {
  Preconditioner pc;
  pc.spectrum = block_eigen(F.core());
  pc.tau = compute_tau(pc.spectrum.values, cfg);
  pc.clamped = threshold_eigenvalues(pc.spectrum.values, pc.tau);
  pc.identity_pass = true;
  for (Eigen::Index i = 0; i < pc.clamped.size(); ++i) {
    if (pc.clamped[i] != pc.spectrum.values[i]) {
      pc.identity_pass = false;
      break;
    }
  }
  return pc;
}

Eigen::VectorXd descent_direction(const FactoredHessian& F,
                                  const Preconditioner& pc,
                                  const Eigen::VectorXd& g) {
  if (g.size() != F.dim()) throw DimensionError("descent_direction: size");
  Eigen::VectorXd x = permute(F.perm(), g);
  F.lower().triangularView<Eigen::Lower>().solveInPlace(x);
  apply_rotations(pc.spectrum, x, /*transpose=*/true);
  x.array() /= pc.clamped.array();
  apply_rotations(pc.spectrum, x, /*transpose=*/false);
  F.lower().transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return unpermute(F.perm(), x);
}

Eigen::VectorXd preconditioned_apply(const FactoredHessian& F,
                                     const Preconditioner& pc,
                                     const Eigen::VectorXd& x) {
  if (x.size() != F.dim()) throw DimensionError("preconditioned_apply: size");
  Eigen::VectorXd y = permute(F.perm(), x);
  y = F.lower().transpose().triangularView<Eigen::Upper>() * y;
  apply_rotations(pc.spectrum, y, /*transpose=*/true);
  y.array() *= pc.clamped.array();
  apply_rotations(pc.spectrum, y, /*transpose=*/false);
  y = F.lower().triangularView<Eigen::Lower>() * y;
  return unpermute(F.perm(), y);
}

Eigen::MatrixXd reconstruct_preconditioned(const FactoredHessian& F,
                                           const Preconditioner& pc) {
  if (pc.identity_pass) return F.reconstruct();
  const int p = F.dim();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(p, p);
  for (const BlockSpectrum::Rotation& r : pc.spectrum.rotations) {
    if (r.size == 1) {
      D(r.start, r.start) = pc.clamped[r.start];
    } else {
      const double l0 = pc.clamped[r.start];
      const double l1 = pc.clamped[r.start + 1];
      const double c = r.c, s = r.s;
      D(r.start, r.start) = c * c * l0 + s * s * l1;
      D(r.start + 1, r.start + 1) = s * s * l0 + c * c * l1;
      const double off = c * s * (l1 - l0);
      D(r.start + 1, r.start) = off;
      D(r.start, r.start + 1) = off;
    }
  }
  Eigen::MatrixXd M = F.lower() * D * F.lower().transpose();
  Eigen::MatrixXd R(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      R(F.perm()[static_cast<size_t>(i)], F.perm()[static_cast<size_t>(j)]) =
          M(i, j);
    }
  }
  return R;
}

}  // namespace sp2opt
