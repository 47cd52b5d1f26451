#include "sp2opt/paired_run.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace sp2opt {

namespace {

Eigen::VectorXd zeros_or(const RunConfig& config) {
  if (config.theta0.size() > 0) {
    if (config.theta0.size() != config.p) {
      throw ConfigError("paired run: theta0 dimension mismatch");
    }
    return config.theta0;
  }
  return Eigen::VectorXd::Zero(config.p);
}

struct TraceHelper {
  LossOracle* loss;
  GradientOracle* grad;
  std::optional<Eigen::VectorXd> star;

  TraceHelper(LossOracle* l, GradientOracle* g) : loss(l), grad(g) {
    if (loss != nullptr) {
      star = loss->minimizer();
    } else if (grad != nullptr) {
      star = grad->minimizer();
    }
  }

  long calls() const {
    long n = 0;
    if (loss != nullptr) n += loss->calls();
    if (grad != nullptr) n += grad->calls();
    return n;
  }

  void record(Trace& trace, long k, const Eigen::VectorXd& theta, long redraws,
              int blocked) const {
    TraceRecord r;
    r.k = k;
    std::optional<double> ell;
    if (loss != nullptr) {
      ell = loss->true_loss(theta);
    } else if (grad != nullptr) {
      ell = grad->true_loss(theta);
    }
    r.loss = ell.has_value() ? *ell : std::nan("");
    r.theta_norm = theta.norm();
    r.dist_to_opt = star.has_value() ? (theta - *star).norm() : std::nan("");
    r.measurements = calls();
    r.redraws = redraws;
    r.blocked = blocked;
    trace.records.push_back(r);
  }
};

double relative_gap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace

void mirror_equation_update(DenseReference& mirror, Variant v,
                            const PerturbationDraw& draw,
                            const MeasurementSet& m, double ck, double ctk,
                            double wk, double t_eff) {
  const Eigen::VectorXd v_inv = draw.delta.cwiseInverse();
  switch (v) {
    case Variant::TwoSpsa: {
      const Eigen::VectorXd g_plus =
          one_sided_gradient(m.y_plus_tilde, m.y_plus, ctk, draw.delta_tilde);
      const Eigen::VectorXd g_minus =
          one_sided_gradient(m.y_minus_tilde, m.y_minus, ctk, draw.delta_tilde);
      const Eigen::VectorXd q = delta_G(g_plus, g_minus) / (2.0 * ck);
      mirror.blend_scaled(t_eff, wk, sym_outer(q, v_inv));
      break;
    }
    case Variant::E2Spsa: {
      const double dy =
          (m.y_plus_tilde - m.y_plus) - (m.y_minus_tilde - m.y_minus);
      const double coeff = dy / (2.0 * ck * ctk) -
                           draw.delta.dot(mirror.hessian() * draw.delta_tilde);
      mirror.blend_scaled(
          t_eff, wk,
          coeff * sym_outer(draw.delta_tilde.cwiseInverse(), v_inv));
      break;
    }
    case Variant::TwoSg: {
      const Eigen::VectorXd q = delta_G(m.g_plus, m.g_minus) / (2.0 * ck);
      mirror.blend_scaled(t_eff, wk, sym_outer(q, v_inv));
      break;
    }
    case Variant::E2Sg: {
      const Eigen::VectorXd q = delta_G(m.g_plus, m.g_minus) / (2.0 * ck) -
                                mirror.hessian() * draw.delta;
      mirror.blend_scaled(t_eff, wk, sym_outer(q, v_inv));
      break;
    }
  }
}

MirrorResult run_with_dense_mirror(const RunConfig& config, LossOracle* loss,
                                   GradientOracle* grad) {
  if (config.p <= 0) throw ConfigError("paired run: p must be positive");
  MirrorResult out;
  IterationState& st = out.state;
  st.theta = zeros_or(config);
  st.hessian = FactoredHessian::identity(config.p, config.h0_diag);
  DenseReference mirror(config.p, config.h0_diag);
  Rng rng(config.seed);
  TraceHelper helper(loss, grad);

  StepHooks hooks;
  hooks.on_accept = [&](const PerturbationDraw& draw, const MeasurementSet& m,
                        const UpdateTerms&, double t_eff, double wk) {
    const long k = st.k;
    mirror_equation_update(mirror, config.variant, draw, m, config.gains.c_k(k),
                           config.gains.c_tilde_k(k), wk, t_eff);
  };

  helper.record(out.trace, 0, st.theta, 0, 0);
  const long budget = planned_iterations(config);
  for (long i = 0; i < budget; ++i) {
    const StepInfo info = step(st, config.variant, config.gains, loss, grad,
                               config.policy, rng, &hooks);
    const double dev = relative_gap(st.hessian.reconstruct(), mirror.hessian());
    out.max_relative_deviation = std::max(out.max_relative_deviation, dev);
    helper.record(out.trace, st.k, st.theta, st.redraws_total,
                  info.blocked ? 1 : 0);
  }
  out.iterations = budget;
  out.redraws = st.redraws_total;
  return out;
}

ShadowAgreement run_with_shadow_pairing(const RunConfig& config,
                                        LossOracle* loss,
                                        GradientOracle* grad) {
  if (config.p <= 0) throw ConfigError("paired run: p must be positive");
  ShadowAgreement out;
  IterationState& st = out.state;
  st.theta = zeros_or(config);
  st.hessian = FactoredHessian::identity(config.p, config.h0_diag);
  Rng rng(config.seed);
  TraceHelper helper(loss, grad);

  struct Accepted {
    PerturbationDraw draw;
    MeasurementSet m;
    double t_eff = 1.0;
    double w_k = 0.0;
  } accepted;
  StepHooks hooks;
  hooks.on_accept = [&](const PerturbationDraw& draw, const MeasurementSet& m,
                        const UpdateTerms&, double t_eff, double wk) {
    accepted = {draw, m, t_eff, wk};
  };

  helper.record(out.trace, 0, st.theta, 0, 0);
  const long budget = planned_iterations(config);
  for (long i = 0; i < budget; ++i) {
    const long k = st.k;
    const Eigen::VectorXd theta_before = st.theta;
    const Eigen::MatrixXd hessian_before = st.hessian.reconstruct();

    const StepInfo info = step(st, config.variant, config.gains, loss, grad,
                               config.policy, rng, &hooks);
    helper.record(out.trace, st.k, st.theta, st.redraws_total,
                  info.blocked ? 1 : 0);

    if (!info.fast_path) continue;
    ++out.fast_path_iterations;

    // One original-algorithm step from the identical pre-step state.
    DenseReference shadow(hessian_before);
    const double ck = config.gains.c_k(k);
    const double ctk = config.gains.c_tilde_k(k);
    mirror_equation_update(shadow, config.variant, accepted.draw, accepted.m,
                           ck, ctk, accepted.w_k, accepted.t_eff);
    bool clamped = false;
    const Eigen::MatrixXd precond =
        shadow.preconditioned_threshold(config.policy.stability, &clamped);
    if (clamped) continue;  // routes legitimately differ outside the regime
    ++out.compared;

    const Eigen::VectorXd g =
        gradient_estimate(config.variant, accepted.m, ck, accepted.draw);
    const Eigen::VectorXd d = DenseReference::solve(precond, g);
    Eigen::VectorXd theta_shadow = theta_before;
    const double step_norm = config.gains.a_k(k) * d.norm();
    if (!(config.policy.blocking_threshold > 0.0 &&
          step_norm > config.policy.blocking_threshold)) {
      theta_shadow -= config.gains.a_k(k) * d;
    }

    const double theta_dev = (st.theta - theta_shadow).norm() /
                             std::max(1.0, theta_shadow.norm());
    const double hessian_dev =
        relative_gap(st.hessian.reconstruct(), shadow.hessian());
    out.max_theta_deviation = std::max(out.max_theta_deviation, theta_dev);
    out.max_hessian_deviation =
        std::max(out.max_hessian_deviation, hessian_dev);
  }
  out.iterations = budget;
  return out;
}

}  // namespace sp2opt
