#include "sp2opt/optimizer.hpp"

#include <chrono>
#include <cmath>

namespace sp2opt {

bool uses_gradient_oracle(Variant v) {
  return v == Variant::TwoSg || v == Variant::E2Sg;
}

bool is_enhanced(Variant v) {
  return v == Variant::E2Spsa || v == Variant::E2Sg;
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::TwoSpsa: return "2spsa";
    case Variant::E2Spsa: return "e2spsa";
    case Variant::TwoSg: return "2sg";
    case Variant::E2Sg: return "e2sg";
  }
  return "?";
}

MeasurementSet take_measurements(Variant v, LossOracle* loss,
                                 GradientOracle* grad,
                                 const Eigen::VectorXd& theta, double ck,
                                 double ctk, const PerturbationDraw& draw,
                                 Rng& rng) {
  MeasurementSet m;
  if (uses_gradient_oracle(v)) {
    if (grad == nullptr) throw Error("gradient oracle required");
    m.g_center = grad->measure(theta, rng);
    m.g_plus = grad->measure(theta + ck * draw.delta, rng);
    m.g_minus = grad->measure(theta - ck * draw.delta, rng);
  } else {
    if (loss == nullptr) throw Error("loss oracle required");
    const Eigen::VectorXd plus = theta + ck * draw.delta;
    const Eigen::VectorXd minus = theta - ck * draw.delta;
    m.y_plus = loss->measure(plus, rng);
    m.y_minus = loss->measure(minus, rng);
    m.y_plus_tilde = loss->measure(plus + ctk * draw.delta_tilde, rng);
    m.y_minus_tilde = loss->measure(minus + ctk * draw.delta_tilde, rng);
  }
  return m;
}

Eigen::VectorXd spsa_gradient(const MeasurementSet& m, double ck,
                              const PerturbationDraw& draw) {
  const double diff = (m.y_plus - m.y_minus) / (2.0 * ck);
  return diff * draw.delta.cwiseInverse();
}

Eigen::VectorXd one_sided_gradient(double y_shifted, double y_base, double ctk,
                                   const Eigen::VectorXd& delta_tilde) {
  return ((y_shifted - y_base) / ctk) * delta_tilde.cwiseInverse();
}

Eigen::VectorXd delta_G(const Eigen::VectorXd& g_plus,
                        const Eigen::VectorXd& g_minus) {
  if (g_plus.size() != g_minus.size()) {
    throw DimensionError("delta_G: size mismatch");
  }
  return g_plus - g_minus;
}

Eigen::VectorXd gradient_estimate(Variant v, const MeasurementSet& m,
                                  double ck, const PerturbationDraw& draw) {
  if (uses_gradient_oracle(v)) return m.g_center;
  return spsa_gradient(m, ck, draw);
}

void symmetrize_pair(UpdateTerms& terms) {
  const double nu = terms.u.norm();
  const double nv = terms.v.norm();
  if (nu == 0.0 || nv == 0.0) {
    throw ZeroNormError("update pair has a zero-norm vector");
  }
  // u~ = sqrt(|v|/(2|u|)) (u + (|u|/|v|) v), v~ likewise with a minus;
  // then u~ u~^T - v~ v~^T == u v^T + v u^T exactly.
  const double s = std::sqrt(nv / (2.0 * nu));
  const double ratio = nu / nv;
  terms.u_tilde = s * (terms.u + ratio * terms.v);
  terms.v_tilde = s * (terms.u - ratio * terms.v);
}

double weight_for_iteration(WeightRule rule, double w, long k, double ck,
                            double ctk, double& optimal_denom) {
  switch (rule) {
    case WeightRule::Harmonic:
      // The seed estimate counts as one member of the running average, so
      // update k carries weight 1/(k+2) and t_k = (k+1)/(k+2) never collapses
      // the factor core. A seed-discarding first update (weight 1 at k=0)
      // would be rank two, and at large p the entry-bound check then rejects
      // every redraw.
      return 1.0 / (k + 2.0);
    case WeightRule::Power:
      return w / std::pow(k + 1.0, 0.501);
    case WeightRule::OptimalFeedback: {
      const double term = (ck * ctk) * (ck * ctk);
      optimal_denom += term;
      return term / optimal_denom;
    }
  }
  return 0.0;
}

UpdateTerms update_terms(Variant v, const MeasurementSet& m, double ck,
                         double ctk, double wk, const PerturbationDraw& draw,
                         const FactoredHessian& hessian_prev) {
  return update_terms_with(
      v, m, ck, ctk, wk, draw,
      [&hessian_prev](const Eigen::VectorXd& x) { return hessian_prev.apply(x); });
}

UpdateTerms update_terms_with(Variant v, const MeasurementSet& m, double ck,
                              double ctk, double wk,
                              const PerturbationDraw& draw,
                              const ApplyFn& apply_prev) {
  UpdateTerms terms;
  terms.v = draw.delta.cwiseInverse();
  switch (v) {
    case Variant::TwoSpsa: {
      const double dy =
          (m.y_plus_tilde - m.y_plus) - (m.y_minus_tilde - m.y_minus);
      terms.t = 1.0 - wk;
      terms.b = wk * dy / (4.0 * ck * ctk);
      terms.u = draw.delta_tilde.cwiseInverse();
      break;
    }
    case Variant::E2Spsa: {
      const double dy =
          (m.y_plus_tilde - m.y_plus) - (m.y_minus_tilde - m.y_minus);
      const double feedback = draw.delta.dot(apply_prev(draw.delta_tilde));
      terms.t = 1.0;
      terms.b = wk * (dy / (2.0 * ck * ctk) - feedback) / 2.0;
      terms.u = draw.delta_tilde.cwiseInverse();
      break;
    }
    case Variant::TwoSg: {
      terms.t = 1.0 - wk;
      terms.b = wk / (4.0 * ck);
      terms.u = delta_G(m.g_plus, m.g_minus);
      break;
    }
    case Variant::E2Sg: {
      terms.t = 1.0;
      terms.b = wk / 2.0;
      terms.u = delta_G(m.g_plus, m.g_minus) / (2.0 * ck) -
                apply_prev(draw.delta);
      break;
    }
  }
  if (terms.b == 0.0) {
    terms.skip = true;
    terms.u_tilde = Eigen::VectorXd::Zero(draw.delta.size());
    terms.v_tilde = terms.u_tilde;
    return terms;
  }
  symmetrize_pair(terms);
  return terms;
}

StepInfo step(IterationState& state, Variant v, const GainSchedule& gains,
              LossOracle* loss, GradientOracle* grad, const StepPolicy& policy,
              Rng& rng, const StepHooks* hooks) {
  const long k = state.k;
  const int p = static_cast<int>(state.theta.size());
  const double ak = gains.a_k(k);
  const double ck = gains.c_k(k);
  const double ctk = gains.c_tilde_k(k);
  const double wk = weight_for_iteration(gains.rule, gains.w, k, ck, ctk,
                                         state.optimal_weight_denom);

  if (loss != nullptr) loss->begin_iteration(k);
  if (grad != nullptr) grad->begin_iteration(k);

  StepInfo info;
  info.a_k = ak;
  info.w_k = wk;

  Eigen::VectorXd G;
  for (int attempt = 0;; ++attempt) {
    PerturbationDraw draw{rng.rademacher_vector(p), rng.rademacher_vector(p)};
    const MeasurementSet m =
        take_measurements(v, loss, grad, state.theta, ck, ctk, draw, rng);
    try {
      UpdateTerms terms =
          update_terms(v, m, ck, ctk, wk, draw, state.hessian);
      FactoredHessian trial = state.hessian;
      const double t_eff = std::max(terms.t, policy.t_floor);
      trial.scale_core(t_eff);
      if (!terms.skip) {
        trial.rank_one_update(terms.b, terms.u_tilde);
        trial.rank_one_update(-terms.b, terms.v_tilde);
      }
      G = gradient_estimate(v, m, ck, draw);
      state.hessian = std::move(trial);
      info.t = t_eff;
      info.b = terms.b;
      if (hooks != nullptr && hooks->on_accept) {
        hooks->on_accept(draw, m, terms, t_eff, wk);
      }
      break;
    } catch (const SingularUpdateError&) {
      if (attempt >= policy.max_redraws) {
        throw RedrawExhaustedError("update singular after max_redraws");
      }
      ++state.redraws_total;
      ++info.redraws;
    } catch (const ZeroNormError&) {
      if (attempt >= policy.max_redraws) {
        throw RedrawExhaustedError("zero-norm update after max_redraws");
      }
      ++state.redraws_total;
      ++info.redraws;
    }
  }

  const Preconditioner pc =
      make_preconditioner(state.hessian, policy.stability);
  info.tau = pc.tau;
  info.fast_path = pc.identity_pass;
  const Eigen::VectorXd d = descent_direction(state.hessian, pc, G);
  const Eigen::VectorXd theta_next = state.theta - ak * d;
  info.step_norm = ak * d.norm();
  if (policy.blocking_threshold > 0.0 &&
      info.step_norm > policy.blocking_threshold) {
    info.blocked = true;
    ++state.blocked_total;
  } else {
    state.theta = theta_next;
  }
  state.k += 1;
  return info;
}

long planned_iterations(const RunConfig& config) {
  if (config.measurement_budget >= 0) {
    const long per = uses_gradient_oracle(config.variant) ? 3 : 4;
    return config.measurement_budget / per;
  }
  return config.iterations >= 0 ? config.iterations : 0;
}

RunResult run(const RunConfig& config, LossOracle* loss,
              GradientOracle* grad) {
  if (config.p <= 0) throw ConfigError("run: p must be positive");
  RunResult result;
  IterationState& st = result.state;
  st.theta = config.theta0.size() > 0 ? config.theta0
                                      : Eigen::VectorXd::Zero(config.p);
  if (st.theta.size() != config.p) {
    throw ConfigError("run: theta0 dimension mismatch");
  }
  st.hessian = FactoredHessian::identity(config.p, config.h0_diag);
  Rng rng(config.seed);

  const auto oracle_calls = [&]() -> long {
    long n = 0;
    if (loss != nullptr) n += loss->calls();
    if (grad != nullptr) n += grad->calls();
    return n;
  };
  const auto truth = [&](const Eigen::VectorXd& theta)
      -> std::optional<double> {
    if (loss != nullptr) return loss->true_loss(theta);
    if (grad != nullptr) return grad->true_loss(theta);
    return std::nullopt;
  };
  const auto opt_point = [&]() -> std::optional<Eigen::VectorXd> {
    if (loss != nullptr) return loss->minimizer();
    if (grad != nullptr) return grad->minimizer();
    return std::nullopt;
  };

  const std::optional<Eigen::VectorXd> star = opt_point();
  const auto record = [&](long k, long redraws, int blocked, double wall) {
    TraceRecord r;
    r.k = k;
    const std::optional<double> ell = truth(st.theta);
    r.loss = ell.has_value() ? *ell : std::nan("");
    r.theta_norm = st.theta.norm();
    r.dist_to_opt =
        star.has_value() ? (st.theta - *star).norm() : std::nan("");
    r.measurements = oracle_calls();
    r.redraws = redraws;
    r.blocked = blocked;
    r.wall_time_s = config.timing ? wall : 0.0;
    result.trace.records.push_back(r);
  };

  record(0, 0, 0, 0.0);

  const long budget = planned_iterations(config);
  int quiet_steps = 0;
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  for (long i = 0; i < budget; ++i) {
    const StepInfo info =
        step(st, config.variant, config.gains, loss, grad, config.policy, rng);
    const double wall =
        std::chrono::duration<double>(clock::now() - t0).count();
    record(st.k, st.redraws_total, info.blocked ? 1 : 0, wall);
    if (config.stop_tolerance > 0.0) {
      const double moved = info.blocked ? 0.0 : info.step_norm;
      quiet_steps = moved < config.stop_tolerance ? quiet_steps + 1 : 0;
      if (quiet_steps >= config.stop_window) break;
    }
  }
  result.oracle_calls = oracle_calls();
  return result;
}

}  // namespace sp2opt
