#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "quantstream/grid.hpp"
#include "quantstream/score.hpp"

namespace quantstream {

// Local-constant conditional quantile estimation at fixed evaluation
// points, uniform kernel, fixed bandwidth.
struct ConditionalConfig {
  std::vector<double> eval_points;
  double bandwidth = 0.2;
  QuantileGrid grid{std::vector<double>{0.5}};
  ScheduleConfig schedule;
  double initial_value = 0.0;
};

// Hard violations throw ConfigError; soft issues come back as warnings.
// In particular: level ordering is guaranteed to survive every update only
// while the kernel weight 1/(2h) stays within 2a, so small bandwidths
// combined with small smoothing multiples are flagged.
std::vector<std::string> validate_conditional(const ConditionalConfig& cfg);

// K(u) = 1/2 on |u| <= 1, else 0.
double uniform_kernel(double u);

// Integral of K^2 for the uniform kernel: 1/2. Appears in the conditional
// statistic's normalization.
double mu2_uniform();

// Streaming estimator of the conditional quantile surface
// (eval point x level). Each observation (x, y) updates every eval point
// whose kernel window contains x, with weight (1/h) K((x_i - x)/h); points
// outside the window keep their iterate but still enter the running
// average. Single writer, like the unconditional estimator.
class ConditionalQuantileEstimator {
 public:
  explicit ConditionalQuantileEstimator(ConditionalConfig cfg);

  void update(double x, double y);

  const Eigen::MatrixXd& raw() const { return raw_; }
  const Eigen::MatrixXd& averaged() const { return averaged_; }
  std::int64_t step() const { return step_; }
  const ConditionalConfig& config() const { return cfg_; }

 private:
  ConditionalConfig cfg_;
  std::int64_t step_ = 0;
  Eigen::MatrixXd raw_;       // eval points x levels
  Eigen::MatrixXd averaged_;  // eval points x levels
};

// max over (i, j) of sqrt(n * h) * sqrt(design_density(i) / mu2_uniform())
// * cond_sparsity(i, j) * |averaged(i, j) - null_surface(i, j)|.
double cond_test_statistic(const Eigen::MatrixXd& averaged,
                           const Eigen::MatrixXd& null_surface,
                           const Eigen::MatrixXd& cond_sparsity,
                           const Eigen::VectorXd& design_density, double bandwidth,
                           std::int64_t n);
double cond_test_statistic(const ConditionalQuantileEstimator& est,
                           const Eigen::MatrixXd& null_surface,
                           const Eigen::MatrixXd& cond_sparsity,
                           const Eigen::VectorXd& design_density);

// Kernel estimates of the regressor density and of the conditional
// density at the surface points (one row of points per eval point).
struct CondDensityEstimate {
  Eigen::VectorXd design_density;  // density of X at each eval point
  Eigen::MatrixXd cond_sparsity;   // f(surface(i, j) | x_i)
  double bandwidth_x = 0.0;
  double bandwidth_y = 0.0;
  int floored = 0;
};

// Gaussian KDE for the regressor density, ratio of a product-kernel joint
// estimate to it for the conditional density. Bandwidths <= 0 select
// Silverman's rule per coordinate. Values are floored like the
// unconditional sparsity estimates.
CondDensityEstimate estimate_cond_densities(
    const std::vector<std::pair<double, double>>& sample,
    const std::vector<double>& eval_points, const Eigen::MatrixXd& surface_points,
    double bandwidth_x = 0.0, double bandwidth_y = 0.0);

}  // namespace quantstream
