#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "sp2opt/dense_reference.hpp"
#include "sp2opt/rng.hpp"

using namespace sp2opt;

TEST_CASE("psd square root round-trips") {
  Rng rng(61);
  Eigen::MatrixXd M(5, 5);
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < 5; ++i) M(i, j) = rng.normal();
  const Eigen::MatrixXd A = M * M.transpose();
  const Eigen::MatrixXd S = matrix_sqrt_psd(A);
  CHECK((S - S.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((S * S - A).norm() <= 1e-10 * std::max(1.0, A.norm()));
}

TEST_CASE("square root of an indefinite matrix is refused") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
  A(0, 0) = -1.0;
  A(1, 1) = 2.0;
  CHECK_THROWS_AS(matrix_sqrt_psd(A), NotPsdError);
}

TEST_CASE("symmetric outer product") {
  Eigen::VectorXd x(2), y(2);
  x << 1.0, 2.0;
  y << 3.0, 4.0;
  const Eigen::MatrixXd S = sym_outer(x, y);
  CHECK(S(0, 0) == 3.0);
  CHECK(S(0, 1) == 5.0);
  CHECK(S(1, 0) == 5.0);
  CHECK(S(1, 1) == 8.0);
}

TEST_CASE("blend and scaled blend") {
  DenseReference ref(2);
  Eigen::MatrixXd h_hat(2, 2);
  h_hat << 2.0, 0.0, 0.0, 4.0;
  ref.blend(0.25, h_hat);
  CHECK(ref.hessian()(0, 0) == doctest::Approx(1.25));
  CHECK(ref.hessian()(1, 1) == doctest::Approx(1.75));

  DenseReference ref2(2);
  ref2.blend_scaled(0.5, 0.25, h_hat);
  CHECK(ref2.hessian()(0, 0) == doctest::Approx(1.0));
  CHECK(ref2.hessian()(1, 1) == doctest::Approx(1.5));
}

TEST_CASE("rank-two terms match the explicit formula") {
  Rng rng(67);
  DenseReference ref(4);
  const Eigen::MatrixXd H0 = ref.hessian();
  const Eigen::VectorXd u = rng.normal_vector(4);
  const Eigen::VectorXd v = rng.normal_vector(4);
  ref.apply_terms(0.9, 0.3, u, v);
  const Eigen::MatrixXd want =
      0.9 * H0 + 0.3 * (u * u.transpose() - v * v.transpose());
  CHECK((ref.hessian() - want).norm() <= 1e-13 * std::max(1.0, want.norm()));
  CHECK((ref.hessian() - ref.hessian().transpose()).norm() == 0.0);
}

TEST_CASE("regularized square-root preconditioner spectrum") {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3, 3);
  H(0, 0) = 2.0;
  H(1, 1) = -0.5;
  H(2, 2) = 0.0;
  DenseConfig cfg;
  const DenseReference ref(H, cfg);
  for (long k : {0L, 3L}) {
    const double delta = cfg.delta0 * std::exp(-static_cast<double>(k));
    const Eigen::MatrixXd M = ref.preconditioned(k);
    for (int i = 0; i < 3; ++i) {
      CHECK(M(i, i) ==
            doctest::Approx(std::sqrt(H(i, i) * H(i, i) + delta)));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("diagonal-shift preconditioner") {
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(2, 2);
  DenseConfig cfg;
  cfg.kind = DensePrecondKind::DiagonalShift;
  const DenseReference ref(H, cfg);
  const Eigen::MatrixXd M = ref.preconditioned(0);
  CHECK(M(0, 0) == doctest::Approx(1.0 + 1e-4));
  CHECK(M(0, 1) == 0.0);
}

TEST_CASE("eigenvalue threshold map on a dense estimate") {
  Rng rng(71);
  Eigen::MatrixXd M(6, 6);
  for (int j = 0; j < 6; ++j)
    for (int i = 0; i < 6; ++i) M(i, j) = rng.normal();
  const Eigen::MatrixXd H = 0.5 * (M + M.transpose());
  const DenseReference ref(H);

  StabilityThreshold cfg;
  bool clamped = false;
  const Eigen::MatrixXd T = ref.preconditioned_threshold(cfg, &clamped);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> in(H), out(T);
  const double tau = compute_tau(in.eigenvalues(), cfg);
  // |.| reorders the spectrum, so sort before comparing against the solver.
  Eigen::VectorXd want = threshold_eigenvalues(in.eigenvalues(), tau);
  std::sort(want.data(), want.data() + want.size());
  Eigen::VectorXd got = out.eigenvalues();
  CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-10);
  // A generic indefinite matrix has negative eigenvalues, so the map acts.
  CHECK(clamped == (in.eigenvalues().minCoeff() < tau));

  // Strongly positive definite input passes through unclamped.
  const DenseReference pd(H * H.transpose() +
                          6.0 * Eigen::MatrixXd::Identity(6, 6));
  bool clamped_pd = true;
  const Eigen::MatrixXd Tpd = pd.preconditioned_threshold(cfg, &clamped_pd);
  CHECK_FALSE(clamped_pd);
  CHECK((Tpd - pd.hessian()).norm() <= 1e-12 * pd.hessian().norm());
}

TEST_CASE("dense solve inverts the system") {
  Rng rng(73);
  Eigen::MatrixXd M(4, 4);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) M(i, j) = rng.normal();
  const Eigen::MatrixXd A =
      M * M.transpose() + Eigen::MatrixXd::Identity(4, 4);
  const Eigen::VectorXd g = rng.normal_vector(4);
  const Eigen::VectorXd x = DenseReference::solve(A, g);
  CHECK((A * x - g).norm() <= 1e-10 * std::max(1.0, g.norm()));
}

TEST_CASE("a full dense iteration follows the written formulas") {
  const int p = 2;
  DenseRunState st(p);
  st.theta << 1.0, -2.0;
  GainSchedule gains;
  gains.rule = WeightRule::Power;
  gains.w = 0.1;
  StepPolicy policy;
  policy.blocking_threshold = 0.0;  // keep the algebra check unconditional

  PerturbationDraw draw;
  draw.delta.resize(p);
  draw.delta << 1.0, -1.0;
  draw.delta_tilde.resize(p);
  draw.delta_tilde << -1.0, 1.0;
  MeasurementSet m;
  m.y_plus = 2.0;
  m.y_minus = 1.0;
  m.y_plus_tilde = 2.6;
  m.y_minus_tilde = 1.2;

  const Eigen::MatrixXd H0 = st.hessian.hessian();
  const Eigen::VectorXd theta0 = st.theta;
  dense_step_with(st, Variant::TwoSpsa, gains, policy, draw, m);
  CHECK(st.k == 1);

  const double ck = gains.c_k(0), ctk = gains.c_tilde_k(0);
  const double wk = 0.1;  // power rule at k = 0
  const double dy = 0.4;
  const double b = wk * dy / (4.0 * ck * ctk);
  const double t_eff = std::max(1.0 - wk, policy.t_floor);
  const Eigen::MatrixXd want_h =
      t_eff * H0 + b * (draw.delta_tilde.cwiseInverse() *
                            draw.delta.cwiseInverse().transpose() +
                        draw.delta.cwiseInverse() *
                            draw.delta_tilde.cwiseInverse().transpose());
  CHECK((st.hessian.hessian() - want_h).norm() <= 1e-12);

  const Eigen::VectorXd G =
      ((m.y_plus - m.y_minus) / (2.0 * ck)) * draw.delta.cwiseInverse();
  Eigen::MatrixXd m2 = want_h * want_h;
  m2.diagonal().array() += 1e-4;
  const Eigen::VectorXd d = DenseReference::solve(matrix_sqrt_psd(m2), G);
  const Eigen::VectorXd want_theta = theta0 - gains.a_k(0) * d;
  CHECK((st.theta - want_theta).norm() <= 1e-10);
}
