#pragma once

#include <Eigen/Core>

#include "sp2opt/optimizer.hpp"

namespace sp2opt {

// Single-hidden-layer regression network: in -> hidden (sigmoid) -> 1
// (linear). Parameters live in one flat vector, laid out as
// [hidden weights (unit-major, `in` each), hidden biases, output weights,
// output bias].
struct MlpShape {
  int in = 5;
  int hidden = 150;
};

int mlp_param_count(const MlpShape& s);

struct Mlp {
  MlpShape shape;

  explicit Mlp(MlpShape s = {}) : shape(s) {}

  int param_count() const { return mlp_param_count(shape); }

  double forward(const Eigen::VectorXd& theta, const Eigen::VectorXd& x) const;
  double sample_loss(const Eigen::VectorXd& theta, const Eigen::VectorXd& x,
                     double y) const;
  // d/dtheta (yhat - y)^2 by backprop.
  Eigen::VectorXd sample_gradient(const Eigen::VectorXd& theta,
                                  const Eigen::VectorXd& x, double y) const;
  // Mean squared error over rows of X.
  double empirical_risk(const Eigen::VectorXd& theta, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& y) const;
};

// Stochastic gradient oracle cycling through the training set: iteration k
// works on row k mod n, and every measurement within an iteration reuses that
// sample (the measurement triple of a gradient-based iteration shares it).
class MlpGradientOracle : public GradientOracle {
 public:
  MlpGradientOracle(Mlp net, Eigen::MatrixXd X, Eigen::VectorXd y);

  void begin_iteration(long k) override {
    idx_ = static_cast<Eigen::Index>(k % X_.rows());
  }
  std::optional<double> true_loss(const Eigen::VectorXd& theta) const override {
    return net_.empirical_risk(theta, X_, y_);
  }

  const Mlp& net() const { return net_; }

 private:
  Eigen::VectorXd do_measure(const Eigen::VectorXd& theta, Rng&) override {
    return net_.sample_gradient(theta, X_.row(idx_).transpose(), y_[idx_]);
  }

  Mlp net_;
  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;
  Eigen::Index idx_ = 0;
};

// First-order baselines sharing the decaying-gain schedule a_k.
void sgd_step(Eigen::VectorXd& theta, const Eigen::VectorXd& g, double lr);

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(int p)
      : m(Eigen::VectorXd::Zero(p)), v(Eigen::VectorXd::Zero(p)) {}
};

void adam_step(Eigen::VectorXd& theta, AdamState& state,
               const Eigen::VectorXd& g, double lr);

}  // namespace sp2opt
