#include "sp2opt/airfoil.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "sp2opt/rng.hpp"

namespace sp2opt {

AirfoilData load_airfoil(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file: " + path);
  std::vector<std::array<double, 6>> rows;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    bool blank = true;
    for (char ch : line) {
      if (!std::isspace(static_cast<unsigned char>(ch))) {
        blank = false;
        break;
      }
    }
    if (blank) continue;
    std::istringstream fields(line);
    std::array<double, 6> row{};
    for (int c = 0; c < 6; ++c) {
      if (!(fields >> row[c])) {
        throw ParseError(path + ":" + std::to_string(lineno) +
                         ": expected 6 numeric columns");
      }
    }
    double extra;
    if (fields >> extra) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": more than 6 columns");
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw ParseError(path + ": no data rows");

  AirfoilData data;
  data.X.resize(static_cast<Eigen::Index>(rows.size()), 5);
  data.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (int c = 0; c < 5; ++c) data.X(static_cast<Eigen::Index>(i), c) = rows[i][c];
    data.y[static_cast<Eigen::Index>(i)] = rows[i][5];
  }
  return data;
}

AirfoilData synthetic_airfoil(int n, std::uint64_t seed) {
  if (n <= 0) throw DimensionError("synthetic sample count must be positive");
  static constexpr std::array<double, 6> kChords = {0.0254, 0.0508, 0.1016,
                                                    0.1524, 0.2286, 0.3048};
  static constexpr std::array<double, 4> kVelocities = {31.7, 39.6, 55.5,
                                                        71.3};
  Rng rng(seed);
  AirfoilData data;
  data.X.resize(n, 5);
  data.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const double freq =
        200.0 * std::exp(rng.uniform() * std::log(20000.0 / 200.0));
    const double aoa = 22.2 * rng.uniform();
    const double chord =
        kChords[static_cast<size_t>(rng.uniform() * kChords.size()) %
                kChords.size()];
    const double vel =
        kVelocities[static_cast<size_t>(rng.uniform() * kVelocities.size()) %
                    kVelocities.size()];
    const double disp =
        0.0004 * std::exp(rng.uniform() * std::log(0.0584 / 0.0004));

    const double lf = std::log10(freq / 1000.0);
    double spl = 127.0 - 9.5 * lf - 2.0 * std::pow(std::log10(freq / 2000.0), 2) +
                 12.0 * std::log10(vel / 39.6) - 0.35 * aoa - 40.0 * chord -
                 120.0 * disp + 2.5 * rng.normal();
    spl = std::clamp(spl, 103.0, 141.0);

    data.X(i, 0) = freq;
    data.X(i, 1) = aoa;
    data.X(i, 2) = chord;
    data.X(i, 3) = vel;
    data.X(i, 4) = disp;
    data.y[i] = spl;
  }
  return data;
}

NormalizedData normalize_by_max(const AirfoilData& data) {
  if (data.X.rows() == 0 || data.X.rows() != data.y.size()) {
    throw DimensionError("dataset shape mismatch");
  }
  NormalizedData out;
  out.x_max = data.X.colwise().maxCoeff().transpose();
  for (Eigen::Index c = 0; c < out.x_max.size(); ++c) {
    if (!(out.x_max[c] > 0.0)) {
      throw ParseError("column max must be positive for max-normalization");
    }
  }
  out.y_max = data.y.maxCoeff();
  if (!(out.y_max > 0.0)) {
    throw ParseError("output max must be positive for max-normalization");
  }
  out.X = data.X.array().rowwise() / out.x_max.transpose().array();
  out.y = data.y / out.y_max;
  return out;
}

}  // namespace sp2opt
