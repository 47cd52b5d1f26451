#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

#include "sp2opt/errors.hpp"

namespace sp2opt {

// NACA-0012 self-noise table: five inputs (frequency Hz, angle of attack deg,
// chord m, free-stream velocity m/s, suction-side displacement thickness m)
// and the scaled sound pressure level in dB.
struct AirfoilData {
  Eigen::MatrixXd X;  // n x 5, raw units
  Eigen::VectorXd y;  // n, raw dB
};

// Whitespace-separated 6-column file (the UCI distribution format). Throws
// ParseError with the offending line number on malformed input.
AirfoilData load_airfoil(const std::string& path);

// Stand-in sampler with the real table's ranges and a plausible smooth
// frequency/velocity/geometry response plus measurement noise; lets the
// training study run when the measured table is not on disk.
AirfoilData synthetic_airfoil(int n, std::uint64_t seed);

// All columns are positive, so scaling to (0, 1] divides by the column max.
struct NormalizedData {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::VectorXd x_max;
  double y_max = 1.0;
};

NormalizedData normalize_by_max(const AirfoilData& data);

}  // namespace sp2opt
