#include "sp2opt/factored_hessian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sp2opt {
namespace {

// Bunch-Parlett pivot constant: 1x1 pivots need mu0 >= rho*mu1; the resulting
// multiplier bound is 1/(1-rho) = 2.7808.
const double kRho = (1.0 + std::sqrt(17.0)) / 8.0;

}  // namespace

FactoredHessian FactoredHessian::identity(int p, double value) {
  FactoredHessian F;
  F.perm_.resize(static_cast<size_t>(p));
  std::iota(F.perm_.begin(), F.perm_.end(), 0);
  F.L_ = Eigen::MatrixXd::Identity(p, p);
  F.core_ = BlockDiagonal::identity(p, value);
  return F;
}

FactoredHessian FactoredHessian::factorize(const Eigen::MatrixXd& A) {
  const int p = static_cast<int>(A.rows());
  if (A.cols() != p) throw DimensionError("factorize: matrix not square");

  const double amax = p > 0 ? A.cwiseAbs().maxCoeff() : 0.0;
  const double asym =
      p > 0 ? (A - A.transpose()).cwiseAbs().maxCoeff() : 0.0;
  if (asym > 1e-12 * std::max(1.0, amax)) {
    throw NonSymmetricError("factorize: input asymmetry above tolerance");
  }

  Eigen::MatrixXd W = 0.5 * (A + A.transpose());
  FactoredHessian F;
  F.perm_.resize(static_cast<size_t>(p));
  std::iota(F.perm_.begin(), F.perm_.end(), 0);
  F.L_ = Eigen::MatrixXd::Identity(p, p);

  // Elimination writes only the lower triangle; the swaps below move full
  // rows and columns, so the active block must be mirrored back to exactly
  // symmetric after every update.
  const auto mirror_active = [&](int from) {
    for (int j = from; j < p; ++j) {
      W.row(j).tail(p - j - 1) = W.col(j).tail(p - j - 1).transpose();
    }
  };

  // Columns < k of W are dead after elimination; swaps may touch them freely.
  const auto swap_position = [&](int r, int s, int k) {
    if (r == s) return;
    std::swap(F.perm_[static_cast<size_t>(r)], F.perm_[static_cast<size_t>(s)]);
    W.row(r).swap(W.row(s));
    W.col(r).swap(W.col(s));
    if (k > 0) F.L_.row(r).head(k).swap(F.L_.row(s).head(k));
  };

  const double zero_tol = 1e-14 * amax;

  int k = 0;
  while (k < p) {
    double mu0 = -1.0;
    int i0 = k;
    for (int i = k; i < p; ++i) {
      const double v = std::abs(W(i, i));
      if (v > mu0) {
        mu0 = v;
        i0 = i;
      }
    }
    double mu1 = -1.0;
    int i1 = -1, j1 = -1;
    for (int j = k; j < p; ++j) {
      for (int i = j + 1; i < p; ++i) {
        const double v = std::abs(W(i, j));
        if (v > mu1) {
          mu1 = v;
          i1 = i;
          j1 = j;
        }
      }
    }

    if (std::max(mu0, mu1) <= zero_tol) {
      // Remaining active submatrix is numerically zero: emit zero pivots.
      for (int i = k; i < p; ++i) F.core_.push_1x1(0.0);
      break;
    }

    if (mu1 <= 0.0 || mu0 >= kRho * mu1) {
      swap_position(k, i0, k);
      const double d = W(k, k);
      F.core_.push_1x1(d);
      const int n = p - k - 1;
      if (n > 0) {
        const Eigen::VectorXd col = W.col(k).tail(n);
        F.L_.col(k).tail(n) = col / d;
        for (int j = k + 1; j < p; ++j) {
          const double mj = F.L_(j, k);
          if (mj != 0.0) W.col(j).tail(p - j) -= mj * col.tail(p - j);
        }
        mirror_active(k + 1);
      }
      k += 1;
    } else {
      swap_position(k, j1, k);
      if (i1 == k) i1 = j1;  // unreachable (i1 > j1 >= k) but cheap to keep
      swap_position(k + 1, i1, k);
      const double e00 = W(k, k);
      const double e10 = W(k + 1, k);
      const double e11 = W(k + 1, k + 1);
      // Complete pivoting guarantees |det| >= (1-rho^2)*mu1^2 here.
      const double det = e00 * e11 - e10 * e10;
      F.core_.push_2x2(e00, e10, e11);
      const int n = p - k - 2;
      if (n > 0) {
        const Eigen::VectorXd c0 = W.col(k).tail(n);
        const Eigen::VectorXd c1 = W.col(k + 1).tail(n);
        F.L_.col(k).tail(n) = (e11 * c0 - e10 * c1) / det;
        F.L_.col(k + 1).tail(n) = (e00 * c1 - e10 * c0) / det;
        for (int j = k + 2; j < p; ++j) {
          const double m0 = F.L_(j, k);
          const double m1 = F.L_(j, k + 1);
          const int rows = p - j;
          W.col(j).tail(rows) -=
              m0 * c0.tail(rows) + m1 * c1.tail(rows);
        }
        mirror_active(k + 2);
      }
      k += 2;
    }
  }
  return F;
}

void FactoredHessian::rank_one_update(double sigma, const Eigen::VectorXd& z) {
  const int p = dim();
  if (z.size() != p) throw DimensionError("rank_one_update: size");
  if (sigma == 0.0 || p == 0) return;

  // zeta = P z; w solves L w = zeta (column-oriented forward substitution).
  Eigen::VectorXd zeta(p);
  for (int i = 0; i < p; ++i) zeta[i] = z[perm_[static_cast<size_t>(i)]];
  if (zeta.cwiseAbs().maxCoeff() == 0.0) return;

  Eigen::VectorXd w = zeta;
  for (int j = 0; j + 1 < p; ++j) {
    const double wj = w[j];
    if (wj != 0.0) w.tail(p - j - 1) -= wj * L_.col(j).tail(p - j - 1);
  }

  // P A' P^T = L (B + sigma*w*w^T) L^T. The middle matrix is refactored in a
  // single sweep: each block J absorbs alpha*w_J*w_J^T, contributes multiplier
  // column r_J = alpha*B'_J^{-1} w_J below itself, and the trailing rank-one
  // coefficient shrinks to alpha - alpha*(w_J . r_J). L is folded in place via
  // s = sum of not-yet-processed columns L(:,i)*w_i, which starts at L w =
  // zeta and vanishes above the active block, so the unit structure is exact.
  Eigen::VectorXd s = zeta;
  double alpha = sigma;
  const double wmax = w.cwiseAbs().maxCoeff();
  const double scale =
      std::max(core_.max_abs_entry(), std::abs(sigma) * wmax * wmax);
  const double pivot_floor = kPivotTol * scale;
  const double bound = kEntryBound + kEntryTol;

  const std::vector<BlockDiagonal::Block>& in = core_.blocks();
  BlockDiagonal out;

  const auto commit_2x2 = [&](int j, double e00, double e10, double e11,
                              double wj, double wj2) {
    const double det = e00 * e11 - e10 * e10;
    if (!std::isfinite(det) || std::abs(det) < kPivotTol * scale * scale) {
      throw SingularUpdateError("rank_one_update: 2x2 pivot near singular");
    }
    const double r0 = alpha * (e11 * wj - e10 * wj2) / det;
    const double r1 = alpha * (e00 * wj2 - e10 * wj) / det;
    const int n = p - j - 2;
    if (n > 0) {
      const auto stail = s.tail(n);
      for (int i = 0; i < n; ++i) {
        if (std::abs(L_(j + 2 + i, j) + stail[i] * r0) > bound ||
            std::abs(L_(j + 2 + i, j + 1) + stail[i] * r1) > bound) {
          throw SingularUpdateError("rank_one_update: entry bound breached");
        }
      }
      L_.col(j).tail(n) += r0 * stail;
      L_.col(j + 1).tail(n) += r1 * stail;
    }
    out.push_2x2(e00, e10, e11);
    alpha -= alpha * (wj * r0 + wj2 * r1);
  };

  size_t bi = 0;
  while (bi < in.size()) {
    const BlockDiagonal::Block blk = in[bi];
    const int j = blk.start;
    if (blk.size == 1) {
      const double wj = w[j];
      s -= wj * L_.col(j);
      const double beta = blk.a + alpha * wj * wj;
      bool ok = std::isfinite(beta) && std::abs(beta) >= pivot_floor;
      double r = 0.0;
      if (ok && alpha != 0.0 && wj != 0.0) {
        r = alpha * wj / beta;
        const int n = p - j - 1;
        const auto stail = s.tail(n);
        for (int i = 0; i < n && ok; ++i) {
          if (std::abs(L_(j + 1 + i, j) + stail[i] * r) > bound) ok = false;
        }
      }
      if (ok) {
        if (r != 0.0) L_.col(j).tail(p - j - 1) += r * s.tail(p - j - 1);
        out.push_1x1(beta);
        alpha -= alpha * (wj * r);
        ++bi;
        continue;
      }
      // Merge with the next 1x1 block into a 2x2 pivot; the permutation is
      // never changed, so this is the only escape before giving up.
      if (bi + 1 < in.size() && in[bi + 1].size == 1) {
        const BlockDiagonal::Block nxt = in[bi + 1];
        const double wj2 = w[j + 1];
        s -= wj2 * L_.col(j + 1);
        commit_2x2(j, beta, alpha * wj * wj2, nxt.a + alpha * wj2 * wj2, wj,
                   wj2);
        bi += 2;
        continue;
      }
      throw SingularUpdateError("rank_one_update: 1x1 pivot unusable");
    } else {
      const double wj = w[j];
      const double wj2 = w[j + 1];
      s -= wj * L_.col(j) + wj2 * L_.col(j + 1);
      commit_2x2(j, blk.a + alpha * wj * wj, blk.b + alpha * wj * wj2,
                 blk.d + alpha * wj2 * wj2, wj, wj2);
      ++bi;
    }
  }
  core_ = std::move(out);
}

FactoredHessian FactoredHessian::updated(double sigma,
                                         const Eigen::VectorXd& z) const {
  FactoredHessian copy = *this;
  copy.rank_one_update(sigma, z);
  return copy;
}

void FactoredHessian::scale_core(double t) { core_.scale(t); }

Eigen::VectorXd FactoredHessian::apply(const Eigen::VectorXd& x) const {
  const int p = dim();
  if (x.size() != p) throw DimensionError("apply: size");
  Eigen::VectorXd x1(p);
  for (int i = 0; i < p; ++i) x1[i] = x[perm_[static_cast<size_t>(i)]];
  Eigen::VectorXd x2 = L_.transpose().triangularView<Eigen::Upper>() * x1;
  Eigen::VectorXd x3 = core_.multiply(x2);
  Eigen::VectorXd x4 = L_.triangularView<Eigen::Lower>() * x3;
  Eigen::VectorXd y(p);
  for (int i = 0; i < p; ++i) y[perm_[static_cast<size_t>(i)]] = x4[i];
  return y;
}

Eigen::MatrixXd FactoredHessian::reconstruct() const {
  const int p = dim();
  Eigen::MatrixXd M = L_ * core_.dense() * L_.transpose();
  Eigen::MatrixXd R(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      R(perm_[static_cast<size_t>(i)], perm_[static_cast<size_t>(j)]) =
          M(i, j);
    }
  }
  return R;
}

Inertia FactoredHessian::inertia() const {
  Inertia n;
  for (const BlockDiagonal::Block& blk : core_.blocks()) {
    if (blk.size == 1) {
      if (blk.a > 0.0) {
        ++n.positive;
      } else if (blk.a < 0.0) {
        ++n.negative;
      } else {
        ++n.zero;
      }
    } else {
      const double det = blk.a * blk.d - blk.b * blk.b;
      const double tr = blk.a + blk.d;
      if (det < 0.0) {
        ++n.positive;
        ++n.negative;
      } else if (det > 0.0) {
        if (tr > 0.0) {
          n.positive += 2;
        } else {
          n.negative += 2;
        }
      } else {
        ++n.zero;
        if (tr > 0.0) {
          ++n.positive;
        } else if (tr < 0.0) {
          ++n.negative;
        } else {
          ++n.zero;
        }
      }
    }
  }
  return n;
}

double FactoredHessian::max_abs_entry() const {
  const int p = dim();
  double m = 0.0;
  for (int j = 0; j + 1 < p; ++j) {
    m = std::max(m, L_.col(j).tail(p - j - 1).cwiseAbs().maxCoeff());
  }
  return m;
}

}  // namespace sp2opt
