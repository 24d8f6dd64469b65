#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "quantstream/errors.hpp"

namespace quantstream {

// Piecewise-linear ramp standing in for the indicator 1{x >= 0} in the
// quantile score: 0 below -1, (x + 1) / 2 on [-1, 1), 1 from 1 on.
// Non-decreasing and Lipschitz with constant 1/2.
inline double ramp_score(double x) {
  if (!std::isfinite(x)) throw InputError("ramp_score: input must be finite");
  if (x >= 1.0) return 1.0;
  if (x < -1.0) return 0.0;
  return (x + 1.0) / 2.0;
}

// Ramp with the transition stretched over [-width, width]; Lipschitz
// constant 1 / (2 * width). This is the smoothed score one update uses,
// with width shrinking along the learning-rate schedule.
inline double ramp_score_scaled(double x, double width) {
  if (!(width > 0.0) || !std::isfinite(width))
    throw InputError("ramp_score_scaled: width must be positive and finite");
  return ramp_score(x / width);
}

// Learning-rate law gamma_k = c_gamma * k^(-beta) together with the
// smoothing multiple: update k smooths the score over half-width
// a * gamma_k.
struct ScheduleConfig {
  double c_gamma = 1.0;
  double beta = 0.7;
  double a = 1.0;
};

// Decay exponents from here up to 1 are accepted but flagged: the
// Gaussian approximation behind the critical values degrades and test
// sizes inflate. The cutoff is (1 + sqrt(5)) / 4.
inline constexpr double kBetaStrictUpper = 0.8090169943749475;

// Throws ConfigError on hard violations (c_gamma <= 0, beta outside
// (1/2, 1), a <= 1/2); returns human-readable warnings for soft ones.
std::vector<std::string> validate_schedule(const ScheduleConfig& cfg);

// gamma_k for step k >= 1.
inline double learning_rate(const ScheduleConfig& cfg, std::int64_t k) {
  if (k < 1) throw InputError("learning_rate: step index must be >= 1");
  return cfg.c_gamma * std::pow(static_cast<double>(k), -cfg.beta);
}

// Half-width a * gamma_k of the smoothing window at step k.
inline double smoothing_width(const ScheduleConfig& cfg, std::int64_t k) {
  return cfg.a * learning_rate(cfg, k);
}

}  // namespace quantstream
