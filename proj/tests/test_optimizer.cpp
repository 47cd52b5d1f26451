#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "sp2opt/optimizer.hpp"
#include "sp2opt/skewed_quartic.hpp"

using namespace sp2opt;

namespace {

struct RecordingLoss final : LossOracle {
  std::vector<Eigen::VectorXd> where;

 private:
  double do_measure(const Eigen::VectorXd& theta, Rng&) override {
    where.push_back(theta);
    return theta.sum();
  }
};

struct RecordingGrad final : GradientOracle {
  std::vector<Eigen::VectorXd> where;

 private:
  Eigen::VectorXd do_measure(const Eigen::VectorXd& theta, Rng&) override {
    where.push_back(theta);
    return theta;
  }
};

struct ConstantGrad final : GradientOracle {
 private:
  Eigen::VectorXd do_measure(const Eigen::VectorXd& theta, Rng&) override {
    return Eigen::VectorXd::Ones(theta.size());
  }
};

PerturbationDraw hand_draw() {
  PerturbationDraw d;
  d.delta.resize(2);
  d.delta << 1.0, -1.0;
  d.delta_tilde.resize(2);
  d.delta_tilde << -1.0, 1.0;
  return d;
}

MeasurementSet hand_losses() {
  MeasurementSet m;
  m.y_plus = 2.0;
  m.y_minus = 1.0;
  m.y_plus_tilde = 2.6;
  m.y_minus_tilde = 1.2;  // dy = (2.6-2.0) - (1.2-1.0) = 0.4
  return m;
}

Eigen::MatrixXd pair_outer(const UpdateTerms& t) {
  return t.b * (t.u * t.v.transpose() + t.v * t.u.transpose());
}

Eigen::MatrixXd tilde_outer(const UpdateTerms& t) {
  return t.b * (t.u_tilde * t.u_tilde.transpose() -
                t.v_tilde * t.v_tilde.transpose());
}

}  // namespace

TEST_CASE("gain sequences") {
  GainSchedule g;
  g.a = 2.0;
  g.A = 10.0;
  g.alpha = 0.5;
  g.c = 0.2;
  g.gamma = 0.25;
  CHECK(g.a_k(3) == doctest::Approx(2.0 / std::sqrt(14.0)));
  CHECK(g.c_k(3) == doctest::Approx(0.2 / std::sqrt(std::sqrt(4.0))));
  CHECK(g.c_tilde_k(3) == g.c_k(3));  // defaults to the same constant
  g.c_tilde = 0.4;
  CHECK(g.c_tilde_k(0) == doctest::Approx(0.4));
}

TEST_CASE("weight rules") {
  double denom = 0.0;
  // Harmonic averaging treats the seed estimate as one member: update k
  // weighs 1/(k+2), so the first update blends seed and sample equally.
  CHECK(weight_for_iteration(WeightRule::Harmonic, 0.0, 0, 1, 1, denom) ==
        doctest::Approx(0.5));
  CHECK(weight_for_iteration(WeightRule::Harmonic, 0.0, 4, 1, 1, denom) ==
        doctest::Approx(1.0 / 6.0));

  CHECK(weight_for_iteration(WeightRule::Power, 0.01, 0, 1, 1, denom) == 0.01);
  CHECK(weight_for_iteration(WeightRule::Power, 0.01, 3, 1, 1, denom) ==
        doctest::Approx(0.01 / std::pow(4.0, 0.501)));

  // Feedback-optimal weights keep a running sum of (c_k ct_k)^2.
  denom = 0.0;
  CHECK(weight_for_iteration(WeightRule::OptimalFeedback, 0.0, 0, 0.1, 0.2,
                             denom) == doctest::Approx(1.0));
  const double t1 = (0.05 * 0.1) * (0.05 * 0.1);
  const double t0 = (0.1 * 0.2) * (0.1 * 0.2);
  CHECK(weight_for_iteration(WeightRule::OptimalFeedback, 0.0, 1, 0.05, 0.1,
                             denom) == doctest::Approx(t1 / (t0 + t1)));
}

TEST_CASE("loss measurements land on the four perturbed points") {
  RecordingLoss oracle;
  Rng rng(1);
  const auto draw = hand_draw();
  Eigen::VectorXd theta(2);
  theta << 10.0, 20.0;
  const double ck = 0.5, ctk = 0.25;
  take_measurements(Variant::TwoSpsa, &oracle, nullptr, theta, ck, ctk, draw,
                    rng);
  REQUIRE(oracle.where.size() == 4);
  CHECK((oracle.where[0] - (theta + ck * draw.delta)).norm() == 0.0);
  CHECK((oracle.where[1] - (theta - ck * draw.delta)).norm() == 0.0);
  CHECK((oracle.where[2] - (theta + ck * draw.delta + ctk * draw.delta_tilde))
            .norm() == 0.0);
  CHECK((oracle.where[3] - (theta - ck * draw.delta + ctk * draw.delta_tilde))
            .norm() == 0.0);
  CHECK(oracle.calls() == 4);
}

TEST_CASE("gradient measurements land on center and both sides") {
  RecordingGrad oracle;
  Rng rng(1);
  const auto draw = hand_draw();
  Eigen::VectorXd theta(2);
  theta << -1.0, 3.0;
  take_measurements(Variant::TwoSg, nullptr, &oracle, theta, 0.5, 0.25, draw,
                    rng);
  REQUIRE(oracle.where.size() == 3);
  CHECK((oracle.where[0] - theta).norm() == 0.0);
  CHECK((oracle.where[1] - (theta + 0.5 * draw.delta)).norm() == 0.0);
  CHECK((oracle.where[2] - (theta - 0.5 * draw.delta)).norm() == 0.0);
  CHECK(oracle.calls() == 3);
}

TEST_CASE("two-sided and one-sided gradient estimates") {
  const auto draw = hand_draw();
  const auto m = hand_losses();
  const Eigen::VectorXd G = spsa_gradient(m, 0.5, draw);
  CHECK(G[0] == doctest::Approx(1.0));   // (2-1)/(2*0.5*1)
  CHECK(G[1] == doctest::Approx(-1.0));  // (2-1)/(2*0.5*(-1))

  const Eigen::VectorXd g1 =
      one_sided_gradient(m.y_plus_tilde, m.y_plus, 0.25, draw.delta_tilde);
  CHECK(g1[0] == doctest::Approx(0.6 / 0.25 * -1.0));
  CHECK(g1[1] == doctest::Approx(0.6 / 0.25));

  Eigen::VectorXd a(2), b(2);
  a << 3.0, 1.0;
  b << 1.0, 4.0;
  const Eigen::VectorXd d = delta_G(a, b);
  CHECK(d[0] == 2.0);
  CHECK(d[1] == -3.0);
}

TEST_CASE("update coefficients per variant") {
  const auto draw = hand_draw();
  auto m = hand_losses();
  const double ck = 0.5, ctk = 0.25, wk = 0.1;
  const auto prev = FactoredHessian::identity(2, 2.0);

  SUBCASE("loss pair, decaying") {
    const auto t = update_terms(Variant::TwoSpsa, m, ck, ctk, wk, draw, prev);
    CHECK(t.t == doctest::Approx(0.9));
    CHECK(t.b == doctest::Approx(0.1 * 0.4 / (4.0 * 0.5 * 0.25)));
    CHECK((t.u - draw.delta_tilde.cwiseInverse()).norm() == 0.0);
    CHECK((t.v - draw.delta.cwiseInverse()).norm() == 0.0);
    CHECK_FALSE(t.skip);
  }

  SUBCASE("loss pair, feedback form") {
    const auto t = update_terms(Variant::E2Spsa, m, ck, ctk, wk, draw, prev);
    CHECK(t.t == 1.0);
    // delta' Hprev delta~ = 2 * (1*-1 + -1*1) = -4
    CHECK(t.b == doctest::Approx(0.1 * (0.4 / (2.0 * 0.5 * 0.25) + 4.0) / 2.0));
  }

  SUBCASE("gradient pair, decaying") {
    m.g_plus = Eigen::Vector2d(1.0, 2.0);
    m.g_minus = Eigen::Vector2d(0.5, 1.0);
    const auto t = update_terms(Variant::TwoSg, m, ck, ctk, wk, draw, prev);
    CHECK(t.t == doctest::Approx(0.9));
    CHECK(t.b == doctest::Approx(0.1 / (4.0 * 0.5)));
    CHECK((t.u - Eigen::Vector2d(0.5, 1.0)).norm() == 0.0);
  }

  SUBCASE("gradient pair, feedback form") {
    m.g_plus = Eigen::Vector2d(1.0, 2.0);
    m.g_minus = Eigen::Vector2d(0.5, 1.0);
    const auto t = update_terms(Variant::E2Sg, m, ck, ctk, wk, draw, prev);
    CHECK(t.t == 1.0);
    CHECK(t.b == doctest::Approx(0.05));
    // deltaG/(2c) - Hprev delta = (0.5,1) - (2,-2)
    CHECK((t.u - Eigen::Vector2d(-1.5, 3.0)).norm() <= 1e-15);
  }

  SUBCASE("zero numerator skips the update") {
    m.y_plus_tilde = m.y_plus;
    m.y_minus_tilde = m.y_minus;
    const auto t = update_terms(Variant::TwoSpsa, m, ck, ctk, wk, draw, prev);
    CHECK(t.skip);
    CHECK(t.b == 0.0);
  }

  SUBCASE("zero-norm measurement direction is an error") {
    m.g_plus = Eigen::Vector2d(1.0, 2.0);
    m.g_minus = m.g_plus;  // deltaG = 0 while b != 0
    CHECK_THROWS_AS(update_terms(Variant::TwoSg, m, ck, ctk, wk, draw, prev),
                    ZeroNormError);
  }
}

TEST_CASE("symmetrized pair reproduces the rank-two form exactly") {
  Rng rng(19);
  for (int rep = 0; rep < 20; ++rep) {
    UpdateTerms t;
    t.b = rng.normal();
    if (t.b == 0.0) t.b = 0.5;
    t.u = rng.normal_vector(6);
    t.v = rng.normal_vector(6);
    symmetrize_pair(t);
    const Eigen::MatrixXd lhs = tilde_outer(t);
    const Eigen::MatrixXd rhs = pair_outer(t);
    CHECK((lhs - rhs).norm() <= 1e-13 * std::max(1.0, rhs.norm()));
  }
}

TEST_CASE("unit first weight hits the scale floor") {
  SkewedQuartic f(3);
  QuarticLossOracle oracle(f, 0.01);
  IterationState st;
  st.theta = Eigen::VectorXd::Ones(3);
  st.hessian = FactoredHessian::identity(3);
  GainSchedule gains;
  // Feedback-optimal weights start at w_0 = 1; on a t = 1 - w variant that
  // zeroes the core scale, which the floor catches.
  gains.rule = WeightRule::OptimalFeedback;
  StepPolicy policy;
  policy.max_redraws = 100;
  Rng rng(4);
  const StepInfo info =
      step(st, Variant::TwoSpsa, gains, &oracle, nullptr, policy, rng);
  CHECK(info.w_k == 1.0);
  CHECK(info.t == policy.t_floor);
}

TEST_CASE("steps are deterministic under a fixed seed") {
  SkewedQuartic f(4);
  const auto run_once = [&]() {
    QuarticLossOracle oracle(f, 0.05);
    IterationState st;
    st.theta = Eigen::VectorXd::Ones(4);
    st.hessian = FactoredHessian::identity(4);
    GainSchedule gains;
    StepPolicy policy;
    Rng rng(99);
    for (int i = 0; i < 10; ++i) {
      step(st, Variant::TwoSpsa, gains, &oracle, nullptr, policy, rng);
    }
    return st.theta;
  };
  const Eigen::VectorXd a = run_once();
  const Eigen::VectorXd b = run_once();
  CHECK((a.array() == b.array()).all());
}

TEST_CASE("oversized steps are blocked and theta is kept") {
  SkewedQuartic f(3);
  QuarticLossOracle oracle(f, 0.01);
  IterationState st;
  st.theta = Eigen::VectorXd::Ones(3);
  st.hessian = FactoredHessian::identity(3);
  GainSchedule gains;
  StepPolicy policy;
  policy.blocking_threshold = 1e-300;
  Rng rng(8);
  const Eigen::VectorXd before = st.theta;
  const StepInfo info =
      step(st, Variant::TwoSpsa, gains, &oracle, nullptr, policy, rng);
  CHECK(info.blocked);
  CHECK(st.blocked_total == 1);
  CHECK((st.theta.array() == before.array()).all());
  CHECK(st.k == 1);
}

TEST_CASE("hopeless updates exhaust their redraws") {
  ConstantGrad oracle;  // deltaG is always zero while b != 0
  IterationState st;
  st.theta = Eigen::VectorXd::Zero(3);
  st.hessian = FactoredHessian::identity(3);
  GainSchedule gains;
  StepPolicy policy;
  policy.max_redraws = 3;
  Rng rng(2);
  CHECK_THROWS_AS(
      step(st, Variant::TwoSg, gains, nullptr, &oracle, policy, rng),
      RedrawExhaustedError);
  CHECK(st.redraws_total == 3);
}

TEST_CASE("iteration budget from measurement budget") {
  RunConfig cfg;
  cfg.variant = Variant::TwoSpsa;
  cfg.measurement_budget = 4000;
  CHECK(planned_iterations(cfg) == 1000);
  cfg.measurement_budget = 4003;
  CHECK(planned_iterations(cfg) == 1000);
  cfg.variant = Variant::TwoSg;
  cfg.measurement_budget = 3000;
  CHECK(planned_iterations(cfg) == 1000);
  cfg.measurement_budget = -1;
  cfg.iterations = 42;
  CHECK(planned_iterations(cfg) == 42);
}

TEST_CASE("run records one row per iteration plus the start") {
  SkewedQuartic f(5);
  QuarticLossOracle oracle(f, 0.05);
  RunConfig cfg;
  cfg.variant = Variant::TwoSpsa;
  cfg.p = 5;
  cfg.seed = 11;
  cfg.iterations = 50;
  cfg.theta0 = Eigen::VectorXd::Ones(5);
  const RunResult res = run(cfg, &oracle, nullptr);
  REQUIRE(res.trace.records.size() == 51);
  CHECK(res.trace.records[0].k == 0);
  CHECK(res.trace.records[0].measurements == 0);
  CHECK(res.trace.records[0].loss ==
        doctest::Approx(f.loss(Eigen::VectorXd::Ones(5))));
  CHECK(res.trace.records.back().measurements == res.oracle_calls);
  CHECK(res.oracle_calls == 4 * (50 + res.state.redraws_total));
}

TEST_CASE("gradient variants consume three measurements per iteration") {
  SkewedQuartic f(4);
  QuarticGradientOracle oracle(f, 0.05);
  RunConfig cfg;
  cfg.variant = Variant::TwoSg;
  cfg.p = 4;
  cfg.seed = 21;
  cfg.iterations = 40;
  cfg.theta0 = Eigen::VectorXd::Ones(4);
  const RunResult res = run(cfg, nullptr, &oracle);
  CHECK(res.oracle_calls == 3 * (40 + res.state.redraws_total));
}

TEST_CASE("quiet-step window stops a run early") {
  SkewedQuartic f(3);
  QuarticLossOracle oracle(f, 0.01);
  RunConfig cfg;
  cfg.variant = Variant::TwoSpsa;
  cfg.p = 3;
  cfg.seed = 5;
  cfg.iterations = 200;
  cfg.theta0 = Eigen::VectorXd::Ones(3);
  cfg.stop_tolerance = 1e9;  // every step counts as quiet
  cfg.stop_window = 5;
  const RunResult res = run(cfg, &oracle, nullptr);
  CHECK(res.trace.records.size() == 6);  // start row + five quiet steps
}

TEST_CASE("non-finite measurements are rejected at the oracle boundary") {
  struct BadLoss final : LossOracle {
   private:
    double do_measure(const Eigen::VectorXd&, Rng&) override {
      return std::nan("");
    }
  } oracle;
  Rng rng(1);
  CHECK_THROWS_AS(oracle.measure(Eigen::VectorXd::Zero(2), rng),
                  NonFiniteError);
}
