#pragma once

#include <cstdint>
#include <vector>

namespace sp2opt {

struct ScalingPoint {
  int p = 0;
  double efficient_s = 0.0;  // median per-iteration seconds, factored route
  double dense_s = 0.0;      // same, dense original-algorithm route
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

SlopeFit fit_linear(const std::vector<double>& x, const std::vector<double>& y);
// Least squares on (ln x, ln y); slope is the growth exponent.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct ScalingStudy {
  std::vector<ScalingPoint> points;
  SlopeFit efficient;      // log-log
  SlopeFit dense;          // log-log
  SlopeFit ratio;          // dense/efficient vs p, linear
  bool ratio_monotone = false;
};

// Times full optimizer iterations of both routes on the quartic stream at
// each dimension (one untimed warmup iteration, then `iters` timed ones;
// the per-iteration figure is the median).
ScalingStudy run_scaling_study(const std::vector<int>& dims, int iters,
                               std::uint64_t seed);

}  // namespace sp2opt
