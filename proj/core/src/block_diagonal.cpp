#include "sp2opt/block_diagonal.hpp"

#include <algorithm>
#include <cmath>

namespace sp2opt {

BlockDiagonal BlockDiagonal::identity(int p, double value) {
  BlockDiagonal out;
  out.blocks_.reserve(static_cast<size_t>(p));
  for (int i = 0; i < p; ++i) out.push_1x1(value);
  return out;
}

void BlockDiagonal::push_1x1(double a) {
  blocks_.push_back(Block{dim_, 1, a, 0.0, 0.0});
  dim_ += 1;
}

void BlockDiagonal::push_2x2(double a, double b, double d) {
  blocks_.push_back(Block{dim_, 2, a, b, d});
  dim_ += 2;
}

void BlockDiagonal::scale(double t) {
  for (Block& blk : blocks_) {
    blk.a *= t;
    blk.b *= t;
    blk.d *= t;
  }
}

double BlockDiagonal::max_abs_entry() const {
  double m = 0.0;
  for (const Block& blk : blocks_) {
    m = std::max(m, std::abs(blk.a));
    if (blk.size == 2) {
      m = std::max({m, std::abs(blk.b), std::abs(blk.d)});
    }
  }
  return m;
}

Eigen::VectorXd BlockDiagonal::multiply(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw DimensionError("BlockDiagonal::multiply: size");
  Eigen::VectorXd y(dim_);
  for (const Block& blk : blocks_) {
    if (blk.size == 1) {
      y[blk.start] = blk.a * x[blk.start];
    } else {
      y[blk.start] = blk.a * x[blk.start] + blk.b * x[blk.start + 1];
      y[blk.start + 1] = blk.b * x[blk.start] + blk.d * x[blk.start + 1];
    }
  }
  return y;
}

Eigen::MatrixXd BlockDiagonal::dense() const {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dim_, dim_);
  for (const Block& blk : blocks_) {
    M(blk.start, blk.start) = blk.a;
    if (blk.size == 2) {
      M(blk.start + 1, blk.start) = blk.b;
      M(blk.start, blk.start + 1) = blk.b;
      M(blk.start + 1, blk.start + 1) = blk.d;
    }
  }
  return M;
}

bool BlockDiagonal::well_formed() const {
  int pos = 0;
  for (const Block& blk : blocks_) {
    if (blk.start != pos) return false;
    if (blk.size != 1 && blk.size != 2) return false;
    pos += blk.size;
  }
  return pos == dim_;
}

}  // namespace sp2opt
