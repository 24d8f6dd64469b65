#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "quantstream/errors.hpp"

namespace quantstream {

// Strictly increasing quantile levels, each inside the open interval (0, 1).
// Immutable once built, so estimator dimensions never change underfoot.
class QuantileGrid {
 public:
  explicit QuantileGrid(std::vector<double> levels) : levels_(std::move(levels)) {
    if (levels_.empty()) throw ConfigError("grid: at least one quantile level is required");
    double prev = 0.0;
    for (double tau : levels_) {
      if (!std::isfinite(tau) || !(tau > 0.0) || !(tau < 1.0))
        throw ConfigError("grid: levels must lie strictly inside (0, 1)");
      if (!(tau > prev)) throw ConfigError("grid: levels must be strictly increasing");
      prev = tau;
    }
  }

  const std::vector<double>& levels() const { return levels_; }
  std::size_t size() const { return levels_.size(); }
  double operator[](std::size_t i) const { return levels_[i]; }

  friend bool operator==(const QuantileGrid& a, const QuantileGrid& b) {
    return a.levels_ == b.levels_;
  }

 private:
  std::vector<double> levels_;
};

}  // namespace quantstream
