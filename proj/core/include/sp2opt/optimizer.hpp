#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>

#include "sp2opt/errors.hpp"
#include "sp2opt/factored_hessian.hpp"
#include "sp2opt/precondition.hpp"
#include "sp2opt/rng.hpp"
#include "sp2opt/trace.hpp"

namespace sp2opt {

// TwoSpsa/E2Spsa estimate from noisy loss values (4 per iteration);
// TwoSg/E2Sg from noisy gradient measurements (3 per iteration). The E
// variants add a feedback term and skip the (1-w) decay of the running
// Hessian estimate.
enum class Variant { TwoSpsa, E2Spsa, TwoSg, E2Sg };

bool uses_gradient_oracle(Variant v);
bool is_enhanced(Variant v);
const char* variant_name(Variant v);

enum class WeightRule { Harmonic, Power, OptimalFeedback };

struct GainSchedule {
  double a = 1.0;
  double A = 100.0;
  double alpha = 0.602;
  double c = 0.05;
  double gamma = 0.101;
  double c_tilde = -1.0;  // <= 0 means same constant as c
  WeightRule rule = WeightRule::Harmonic;
  double w = 0.01;  // power-rule numerator

  double a_k(long k) const { return a / std::pow(A + k + 1.0, alpha); }
  double c_k(long k) const { return c / std::pow(k + 1.0, gamma); }
  double c_tilde_k(long k) const {
    return (c_tilde > 0.0 ? c_tilde : c) / std::pow(k + 1.0, gamma);
  }
};

// Noisy loss oracle y(theta). Call counting is centralized here so the
// measurement-accounting invariants are mechanical.
class LossOracle {
 public:
  virtual ~LossOracle() = default;

  double measure(const Eigen::VectorXd& theta, Rng& rng) {
    ++calls_;
    const double y = do_measure(theta, rng);
    if (!std::isfinite(y)) throw NonFiniteError("loss measurement not finite");
    return y;
  }

  virtual void begin_iteration(long /*k*/) {}
  virtual std::optional<double> true_loss(const Eigen::VectorXd&) const {
    return std::nullopt;
  }
  virtual std::optional<Eigen::VectorXd> minimizer() const {
    return std::nullopt;
  }

  long calls() const { return calls_; }
  void reset_calls() { calls_ = 0; }

 private:
  virtual double do_measure(const Eigen::VectorXd& theta, Rng& rng) = 0;
  long calls_ = 0;
};

// Noisy gradient oracle Y(theta).
class GradientOracle {
 public:
  virtual ~GradientOracle() = default;

  Eigen::VectorXd measure(const Eigen::VectorXd& theta, Rng& rng) {
    ++calls_;
    Eigen::VectorXd g = do_measure(theta, rng);
    if (!g.allFinite()) {
      throw NonFiniteError("gradient measurement not finite");
    }
    return g;
  }

  virtual void begin_iteration(long /*k*/) {}
  virtual std::optional<double> true_loss(const Eigen::VectorXd&) const {
    return std::nullopt;
  }
  virtual std::optional<Eigen::VectorXd> minimizer() const {
    return std::nullopt;
  }

  long calls() const { return calls_; }
  void reset_calls() { calls_ = 0; }

 private:
  virtual Eigen::VectorXd do_measure(const Eigen::VectorXd& theta,
                                     Rng& rng) = 0;
  long calls_ = 0;
};

struct PerturbationDraw {
  Eigen::VectorXd delta;
  Eigen::VectorXd delta_tilde;
};

// One iteration's raw measurements; which fields are filled depends on the
// variant. For loss variants the two y(theta +- c*delta) values are shared
// between the gradient estimate and the one-sided estimates (4 calls total).
struct MeasurementSet {
  double y_plus = 0.0;
  double y_minus = 0.0;
  double y_plus_tilde = 0.0;
  double y_minus_tilde = 0.0;
  Eigen::VectorXd g_center;
  Eigen::VectorXd g_plus;
  Eigen::VectorXd g_minus;
};

MeasurementSet take_measurements(Variant v, LossOracle* loss,
                                 GradientOracle* grad,
                                 const Eigen::VectorXd& theta, double ck,
                                 double ctk, const PerturbationDraw& draw,
                                 Rng& rng);

// G_i = [y(theta + c*delta) - y(theta - c*delta)] / (2*c*delta_i), built from
// already-taken measurements (no oracle calls).
Eigen::VectorXd spsa_gradient(const MeasurementSet& m, double ck,
                              const PerturbationDraw& draw);

// One-sided estimate [y(base + ct*delta_tilde) - y(base)] / (ct*delta_tilde_i)
// from two raw values.
Eigen::VectorXd one_sided_gradient(double y_shifted, double y_base, double ctk,
                                   const Eigen::VectorXd& delta_tilde);

Eigen::VectorXd delta_G(const Eigen::VectorXd& g_plus,
                        const Eigen::VectorXd& g_minus);

Eigen::VectorXd gradient_estimate(Variant v, const MeasurementSet& m,
                                  double ck, const PerturbationDraw& draw);

// Per-iteration Hessian-update coefficients: the estimate recursion is
// H <- t*H + b*(u_tilde u_tilde^T - v_tilde v_tilde^T), where the symmetrized
// pair reproduces b*(u v^T + v u^T) exactly.
struct UpdateTerms {
  double t = 1.0;
  double b = 0.0;
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  Eigen::VectorXd u_tilde;
  Eigen::VectorXd v_tilde;
  bool skip = false;  // b == 0: scale-only iteration
};

// Throws ZeroNormError when b != 0 but ||u|| or ||v|| is zero.
void symmetrize_pair(UpdateTerms& terms);

double weight_for_iteration(WeightRule rule, double w, long k, double ck,
                            double ctk, double& optimal_denom);

UpdateTerms update_terms(Variant v, const MeasurementSet& m, double ck,
                         double ctk, double wk, const PerturbationDraw& draw,
                         const FactoredHessian& hessian_prev);

// Same coefficients with the previous-estimate product supplied generically,
// so a dense recursion can feed back its own state.
using ApplyFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
UpdateTerms update_terms_with(Variant v, const MeasurementSet& m, double ck,
                              double ctk, double wk,
                              const PerturbationDraw& draw,
                              const ApplyFn& apply_prev);

struct StepPolicy {
  double blocking_threshold = 1.0;  // <= 0 disables blocking
  int max_redraws = 10;
  // Floor applied to the core scale t; keeps harmonic weights (t_0 = 0)
  // representable in factored form. The dense mirror must use the same value.
  double t_floor = 1e-8;
  StabilityThreshold stability;
};

struct IterationState {
  long k = 0;
  Eigen::VectorXd theta;
  FactoredHessian hessian;
  double optimal_weight_denom = 0.0;
  long redraws_total = 0;
  long blocked_total = 0;
};

struct StepInfo {
  double a_k = 0.0;
  double w_k = 0.0;
  double t = 1.0;
  double b = 0.0;
  double step_norm = 0.0;
  double tau = 0.0;
  bool blocked = false;
  bool fast_path = false;
  int redraws = 0;
};

// Observation points for paired / mirrored runs. on_accept fires once per
// iteration with the accepted draw, its raw measurements, and the final
// coefficients (t_eff already floored); redrawn attempts are not reported.
struct StepHooks {
  std::function<void(const PerturbationDraw&, const MeasurementSet&,
                     const UpdateTerms&, double t_eff, double w_k)>
      on_accept;
};

StepInfo step(IterationState& state, Variant v, const GainSchedule& gains,
              LossOracle* loss, GradientOracle* grad, const StepPolicy& policy,
              Rng& rng, const StepHooks* hooks = nullptr);

struct RunConfig {
  Variant variant = Variant::TwoSpsa;
  int p = 0;
  std::uint64_t seed = 1;
  long iterations = -1;           // direct iteration budget
  long measurement_budget = -1;   // overrides iterations when >= 0
  GainSchedule gains;
  StepPolicy policy;
  double h0_diag = 1.0;
  Eigen::VectorXd theta0;         // empty => zeros
  double stop_tolerance = 0.0;    // <= 0 disables the consecutive-step stop
  int stop_window = 5;
  bool timing = false;            // fill wall_time_s with real measurements
};

long planned_iterations(const RunConfig& config);

struct RunResult {
  Trace trace;
  IterationState state;
  long oracle_calls = 0;
};

RunResult run(const RunConfig& config, LossOracle* loss, GradientOracle* grad);

}  // namespace sp2opt
