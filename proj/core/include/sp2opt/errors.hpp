#pragma once

#include <stdexcept>
#include <string>

namespace sp2opt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// factorize() input is not symmetric within tolerance.
class NonSymmetricError : public Error {
 public:
  using Error::Error;
};

// rank_one_update() could not keep the factorization bounded/nonsingular;
// callers are expected to redraw the perturbation and retry.
class SingularUpdateError : public Error {
 public:
  using Error::Error;
};

// ||u|| or ||v|| vanished while building the symmetrized update pair.
class ZeroNormError : public Error {
 public:
  using Error::Error;
};

// Stability threshold tau must be positive and finite.
class ThresholdError : public Error {
 public:
  using Error::Error;
};

// matrix_sqrt_psd() input had an eigenvalue below -1e-10.
class NotPsdError : public Error {
 public:
  using Error::Error;
};

// An oracle returned NaN/Inf.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// step() exhausted max_redraws consecutive singular updates.
class RedrawExhaustedError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace sp2opt
