#pragma once

#include "sp2opt/dense_reference.hpp"
#include "sp2opt/optimizer.hpp"
#include "sp2opt/trace.hpp"

namespace sp2opt {

// Dense equation-form update H <- t H + w Hhat with Hhat rebuilt from the raw
// measurements of one accepted iteration (the pre-factored form of the
// recursion). Feedback terms for the enhanced variants use the mirror's own
// state, so the replay is a genuinely independent arithmetic route.
void mirror_equation_update(DenseReference& mirror, Variant v,
                            const PerturbationDraw& draw,
                            const MeasurementSet& m, double ck, double ctk,
                            double wk, double t_eff);

struct MirrorResult {
  long iterations = 0;
  long redraws = 0;
  // max over k of ||reconstruct(H_k) - dense H_k||_F / max(1, ||dense||_F)
  double max_relative_deviation = 0.0;
  Trace trace;
  IterationState state;
};

// Runs the factored optimizer while replaying every accepted iteration
// through the dense equation-form recursion on a shared stream; both routes
// therefore see identical perturbations and measurement noise.
MirrorResult run_with_dense_mirror(const RunConfig& config, LossOracle* loss,
                                   GradientOracle* grad);

struct ShadowAgreement {
  long iterations = 0;
  long fast_path_iterations = 0;  // efficient preconditioner was the identity
  long compared = 0;              // both routes took the identity pass
  double max_theta_deviation = 0.0;    // relative, over compared iterations
  double max_hessian_deviation = 0.0;  // relative Frobenius, same set
  Trace trace;
  IterationState state;
};

// Runs the factored optimizer; at every fast-path iteration the same accepted
// measurements are replayed through one dense original-algorithm step taken
// from the identical pre-step state (theta and reconstructed Hessian), and the
// resulting iterates are compared. This checks the exact-coincidence claim
// wherever the identity pass is active, without accumulating trajectory
// divergence from non-fast-path iterations.
ShadowAgreement run_with_shadow_pairing(const RunConfig& config,
                                        LossOracle* loss,
                                        GradientOracle* grad);

}  // namespace sp2opt
