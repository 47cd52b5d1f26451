#include "sp2opt/skewed_quartic.hpp"

namespace sp2opt {

SkewedQuartic::SkewedQuartic(int p_, double c3_, double c4_)
    : p(p_), c3(c3_), c4(c4_) {
  if (p <= 0) throw DimensionError("skewed quartic dimension must be positive");
}

Eigen::VectorXd SkewedQuartic::apply_b(const Eigen::VectorXd& theta) const {
  if (theta.size() != p) throw DimensionError("apply_b dimension mismatch");
  Eigen::VectorXd z(p);
  double acc = 0.0;
  for (int i = p - 1; i >= 0; --i) {
    acc += theta[i];
    z[i] = acc / p;
  }
  return z;
}

Eigen::VectorXd SkewedQuartic::apply_bt(const Eigen::VectorXd& v) const {
  if (v.size() != p) throw DimensionError("apply_bt dimension mismatch");
  Eigen::VectorXd out(p);
  double acc = 0.0;
  for (int j = 0; j < p; ++j) {
    acc += v[j];
    out[j] = acc / p;
  }
  return out;
}

double SkewedQuartic::loss(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd z = apply_b(theta);
  const double quad = z.squaredNorm();
  const double cube = z.array().cube().sum();
  const double quart = z.array().square().square().sum();
  return quad + c3 * cube + c4 * quart;
}

Eigen::VectorXd SkewedQuartic::gradient(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd z = apply_b(theta);
  const Eigen::VectorXd inner =
      (2.0 * z.array() + 3.0 * c3 * z.array().square() +
       4.0 * c4 * z.array().cube())
          .matrix();
  return apply_bt(inner);
}

Eigen::MatrixXd SkewedQuartic::b_matrix() const {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = i; j < p; ++j) B(i, j) = 1.0 / p;
  }
  return B;
}

Eigen::MatrixXd SkewedQuartic::hessian(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd z = apply_b(theta);
  const Eigen::VectorXd diag =
      (2.0 + 6.0 * c3 * z.array() + 12.0 * c4 * z.array().square()).matrix();
  const Eigen::MatrixXd B = b_matrix();
  return B.transpose() * diag.asDiagonal() * B;
}

}  // namespace sp2opt
