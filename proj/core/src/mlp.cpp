#include "sp2opt/mlp.hpp"

#include <cmath>
#include <utility>

namespace sp2opt {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Layout {
  int in;
  int hidden;
  int w_hidden_at(int unit) const { return unit * in; }
  int b_hidden_at(int unit) const { return hidden * in + unit; }
  int w_out_at(int unit) const { return hidden * in + hidden + unit; }
  int b_out_at() const { return hidden * in + 2 * hidden; }
};

}  // namespace

int mlp_param_count(const MlpShape& s) {
  return s.hidden * s.in + 2 * s.hidden + 1;
}

double Mlp::forward(const Eigen::VectorXd& theta,
                    const Eigen::VectorXd& x) const {
  if (theta.size() != param_count()) {
    throw DimensionError("mlp parameter vector has wrong length");
  }
  if (x.size() != shape.in) throw DimensionError("mlp input has wrong length");
  const Layout lay{shape.in, shape.hidden};
  double out = theta[lay.b_out_at()];
  for (int j = 0; j < shape.hidden; ++j) {
    const double pre =
        theta.segment(lay.w_hidden_at(j), shape.in).dot(x) +
        theta[lay.b_hidden_at(j)];
    out += theta[lay.w_out_at(j)] * sigmoid(pre);
  }
  return out;
}

double Mlp::sample_loss(const Eigen::VectorXd& theta, const Eigen::VectorXd& x,
                        double y) const {
  const double e = forward(theta, x) - y;
  return e * e;
}

Eigen::VectorXd Mlp::sample_gradient(const Eigen::VectorXd& theta,
                                     const Eigen::VectorXd& x,
                                     double y) const {
  if (theta.size() != param_count()) {
    throw DimensionError("mlp parameter vector has wrong length");
  }
  if (x.size() != shape.in) throw DimensionError("mlp input has wrong length");
  const Layout lay{shape.in, shape.hidden};

  Eigen::VectorXd h(shape.hidden);
  double yhat = theta[lay.b_out_at()];
  for (int j = 0; j < shape.hidden; ++j) {
    const double pre =
        theta.segment(lay.w_hidden_at(j), shape.in).dot(x) +
        theta[lay.b_hidden_at(j)];
    h[j] = sigmoid(pre);
    yhat += theta[lay.w_out_at(j)] * h[j];
  }

  const double dl = 2.0 * (yhat - y);
  Eigen::VectorXd g(param_count());
  for (int j = 0; j < shape.hidden; ++j) {
    const double dh = dl * theta[lay.w_out_at(j)] * h[j] * (1.0 - h[j]);
    g.segment(lay.w_hidden_at(j), shape.in) = dh * x;
    g[lay.b_hidden_at(j)] = dh;
    g[lay.w_out_at(j)] = dl * h[j];
  }
  g[lay.b_out_at()] = dl;
  return g;
}

double Mlp::empirical_risk(const Eigen::VectorXd& theta,
                           const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& y) const {
  if (X.rows() != y.size()) throw DimensionError("dataset shape mismatch");
  if (X.rows() == 0) throw DimensionError("empty dataset");
  double total = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    total += sample_loss(theta, X.row(i).transpose(), y[i]);
  }
  return total / static_cast<double>(X.rows());
}

MlpGradientOracle::MlpGradientOracle(Mlp net, Eigen::MatrixXd X,
                                     Eigen::VectorXd y)
    : net_(net), X_(std::move(X)), y_(std::move(y)) {
  if (X_.rows() == 0 || X_.rows() != y_.size()) {
    throw DimensionError("training set shape mismatch");
  }
  if (X_.cols() != net_.shape.in) {
    throw DimensionError("training features do not match network input");
  }
}

void sgd_step(Eigen::VectorXd& theta, const Eigen::VectorXd& g, double lr) {
  theta -= lr * g;
}

void adam_step(Eigen::VectorXd& theta, AdamState& s, const Eigen::VectorXd& g,
               double lr) {
  s.t += 1;
  s.m = s.beta1 * s.m + (1.0 - s.beta1) * g;
  s.v = s.beta2 * s.v + (1.0 - s.beta2) * g.cwiseProduct(g);
  const double mc = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double vc = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  theta.array() -=
      lr * (s.m.array() / mc) / ((s.v.array() / vc).sqrt() + s.eps);
}

}  // namespace sp2opt
