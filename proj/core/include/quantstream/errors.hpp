#pragma once

#include <stdexcept>
#include <string>

namespace quantstream {

// Invalid configuration: bad schedule constants, empty grids, out-of-range
// test levels. Raised before any state is touched.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Data that violates an estimator or oracle contract: wrong dimension,
// non-finite values, malformed records.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: covariance matrices that are not positive
// semi-definite beyond tolerance, degenerate bandwidths, quadrature that
// refuses to converge.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem and stream failures in the command line layer.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace quantstream
