#pragma once

#include <Eigen/Core>
#include <vector>

#include "sp2opt/errors.hpp"

namespace sp2opt {

// Symmetric block-diagonal matrix of 1x1 and 2x2 blocks (the middle factor of
// an LBL^T factorization). Blocks tile the index range exactly.
class BlockDiagonal {
 public:
  struct Block {
    int start = 0;
    int size = 1;     // 1 or 2
    double a = 0.0;   // (0,0)
    double b = 0.0;   // (1,0) == (0,1), 2x2 only
    double d = 0.0;   // (1,1), 2x2 only
  };

  BlockDiagonal() = default;

  static BlockDiagonal identity(int p, double value = 1.0);

  int dim() const { return dim_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  std::vector<Block>& blocks() { return blocks_; }

  void push_1x1(double a);
  void push_2x2(double a, double b, double d);

  // B <- t*B
  void scale(double t);

  double max_abs_entry() const;

  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;  // O(p)
  Eigen::MatrixXd dense() const;

  // True if blocks tile [0, dim) contiguously with sizes in {1, 2}.
  bool well_formed() const;

 private:
  std::vector<Block> blocks_;
  int dim_ = 0;
};

}  // namespace sp2opt
