#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "quantstream/score.hpp"

namespace quantstream {

// Lower sample quantile: the ceil(n * tau)-th order statistic, i.e. the
// lower endpoint of the set minimizing the empirical quantile loss.
double sample_quantile(const std::vector<double>& data, double tau);

// Fraction of the data <= x.
double empirical_cdf(const std::vector<double>& data, double x);

using CdfFn = std::function<double(double)>;

// Mean of `cdf` over [lo, hi] by adaptive quadrature (absolute tolerance
// `tol` on the mean). This equals the smoothed distribution function the
// update drift sees: averaging the ramp against F over the window.
double window_mean_cdf(const CdfFn& cdf, double lo, double hi, double tol = 1e-10);

// Per-step centered scores along one recorded trajectory, their mean, and
// the linearization residual of the averaged estimate.
struct BahadurTerms {
  std::vector<double> xi;  // each in [-1, 1]
  double xi_bar = 0.0;
  double averaged = 0.0;  // mean of the post-update iterates
  double residual = 0.0;  // averaged - true_quantile - xi_bar / density
};

// trace[k] is the iterate the (k+1)-th observation saw, so trace[0] is the
// initial value and trace.size() == observations.size(). The conditional
// mean of each score given the past is removed using the known cdf, which
// makes the xi sequence a martingale-difference array.
BahadurTerms bahadur_terms(const std::vector<double>& observations,
                           const std::vector<double>& trace, const ScheduleConfig& cfg,
                           double tau, double true_quantile, double density_at_quantile,
                           const CdfFn& cdf);

// Drift linearization error at iterate y against quantile q for step k,
// with its closed-form envelope 2 * a * density_sup * gamma_k +
// density_sup * (y - q)^2. density_sup must dominate both sup|f| and
// sup|f'| of the sampling law.
struct RemainderBound {
  double rho = 0.0;
  double bound = 0.0;
};

RemainderBound remainder_rho(double y, double q, std::int64_t k, const ScheduleConfig& cfg,
                             const CdfFn& cdf, double density_at_quantile,
                             double density_sup);

}  // namespace quantstream
