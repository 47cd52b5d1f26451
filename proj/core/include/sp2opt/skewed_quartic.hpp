#pragma once

#include <Eigen/Core>

#include "sp2opt/optimizer.hpp"

namespace sp2opt {

// L(theta) = z'z + c3 * sum(z_i^3) + c4 * sum(z_i^4) with z = B theta and
// p*B the upper-triangular all-ones matrix. Minimum 0 at theta = 0. With
// c3 = c4 = 0 this is a strictly convex quadratic (Hessian 2 B'B), which the
// positive-definite fast-path checks rely on.
struct SkewedQuartic {
  int p = 0;
  double c3 = 0.1;
  double c4 = 0.01;

  explicit SkewedQuartic(int p_, double c3_ = 0.1, double c4_ = 0.01);

  // z = B theta via suffix sums, O(p).
  Eigen::VectorXd apply_b(const Eigen::VectorXd& theta) const;
  // B' v via prefix sums, O(p).
  Eigen::VectorXd apply_bt(const Eigen::VectorXd& v) const;

  double loss(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const;

  // Dense forms for oracle tests only.
  Eigen::MatrixXd b_matrix() const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& theta) const;
};

// y(theta) = L(theta) + N(0, sigma^2)
class QuarticLossOracle : public LossOracle {
 public:
  QuarticLossOracle(SkewedQuartic f, double sigma) : f_(f), sigma_(sigma) {}

  std::optional<double> true_loss(const Eigen::VectorXd& theta) const override {
    return f_.loss(theta);
  }
  std::optional<Eigen::VectorXd> minimizer() const override {
    return Eigen::VectorXd::Zero(f_.p);
  }

 private:
  double do_measure(const Eigen::VectorXd& theta, Rng& rng) override {
    return f_.loss(theta) + sigma_ * rng.normal();
  }

  SkewedQuartic f_;
  double sigma_;
};

// Y(theta) = grad L(theta) + N(0, sigma^2 I)
class QuarticGradientOracle : public GradientOracle {
 public:
  QuarticGradientOracle(SkewedQuartic f, double sigma)
      : f_(f), sigma_(sigma) {}

  std::optional<double> true_loss(const Eigen::VectorXd& theta) const override {
    return f_.loss(theta);
  }
  std::optional<Eigen::VectorXd> minimizer() const override {
    return Eigen::VectorXd::Zero(f_.p);
  }

 private:
  Eigen::VectorXd do_measure(const Eigen::VectorXd& theta, Rng& rng) override {
    return f_.gradient(theta) + sigma_ * rng.normal_vector(f_.p);
  }

  SkewedQuartic f_;
  double sigma_;
};

}  // namespace sp2opt
