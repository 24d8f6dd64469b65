#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "quantstream/distributions.hpp"
#include "quantstream/grid.hpp"
#include "quantstream/sgd_quantile.hpp"

namespace quantstream {

// Covariance of the limiting process between cell (series i, level t) and
// cell (series j, level s).
using CovarianceFn = std::function<double(int i, double t, int j, double s)>;

// Description of the Gaussian process whose sup-norm quantiles calibrate
// the test: grid, number of series, covariance, simulation budget, seed.
struct BridgeSpec {
  QuantileGrid grid{std::vector<double>{0.5}};
  int series_count = 1;
  CovarianceFn covariance;
  std::int64_t replications = 100000;
  std::uint64_t seed = 0;
};

// Brownian-bridge covariance min(s,t) * (1 - max(s,t)); s, t in (0,1).
double bridge_covariance(double t, double s);

// Bridges independent across series: cross-series covariance zero,
// same-series bridge covariance.
BridgeSpec independent_bridges_spec(QuantileGrid grid, int series_count,
                                    std::int64_t replications, std::uint64_t seed);

// Draws the centered Gaussian vector over the (series x grid) cells, cell
// (i, j) at flat index i * grid_size + j. Cholesky-based, falling back to
// an eigendecomposition with negative eigenvalues clipped at zero; refuses
// matrices whose most negative eigenvalue is below -1e-8 times the largest.
class GaussianProcessSampler {
 public:
  explicit GaussianProcessSampler(const BridgeSpec& spec);

  // Deterministic per (seed, replication); replications carry independent
  // substreams, so draws can be evaluated in any order or in parallel.
  Eigen::VectorXd draw(std::int64_t replication) const;

  Eigen::Index dimension() const { return transform_.rows(); }
  const Eigen::MatrixXd& covariance() const { return covariance_; }

 private:
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd transform_;
  std::uint64_t seed_ = 0;
};

// One sup-norm sample max|G| per replication. Requires replications >= 1000.
std::vector<double> simulate_sup_abs(const BridgeSpec& spec);

// Empirical (1 - alpha)-quantile of a sup-norm sample; reusable across
// alpha levels without re-simulating.
double critical_value_from_sample(const std::vector<double>& sup_samples, double alpha);

// simulate_sup_abs + critical_value_from_sample in one call.
double simulate_critical_value(const BridgeSpec& spec, double alpha);

enum class SparsityMode { known, kde };

// Density evaluated at the quantile, per (series, level) cell. These scale
// the statistic and the band widths.
struct SparsityEstimate {
  Eigen::MatrixXd values;  // series x levels, strictly positive
  SparsityMode mode = SparsityMode::known;
  double bandwidth = 0.0;  // kde only
  int floored = 0;         // number of cells clamped at the positivity floor
};

// Density estimates below this are clamped (and counted in `floored`) so
// band widths stay finite; a positive lower density bound is assumed by
// the theory, so a floored cell is a warning sign.
inline constexpr double kSparsityFloor = 1e-6;

// Silverman's rule 1.06 * min(sd, IQR/1.34) * m^(-1/5). When exactly one
// of sd and IQR/1.34 is zero the other is used; throws NumericError when
// the sample has no spread at all.
double silverman_bandwidth(const std::vector<double>& sample);

struct KdeEstimate {
  std::vector<double> values;
  double bandwidth = 0.0;
  int floored = 0;
};

// Gaussian-kernel density estimate at each point, floored at
// kSparsityFloor. bandwidth <= 0 selects Silverman's rule.
KdeEstimate estimate_sparsity_kde(const std::vector<double>& sample,
                                  const std::vector<double>& points,
                                  double bandwidth = 0.0);

// Exact sparsity f(Q(tau)) of a known law, replicated across series.
SparsityEstimate known_sparsity(const Distribution& dist, const QuantileGrid& grid,
                                int series_count);

// KDE sparsity evaluated at points(i, j) from per-series samples.
SparsityEstimate kde_sparsity(const std::vector<std::vector<double>>& samples_per_series,
                              const Eigen::MatrixXd& points, double bandwidth = 0.0);

// max over (i, j) of sqrt(n) * sparsity(i, j) * |averaged(i, j) - null(i, j)|.
double test_statistic(const Eigen::MatrixXd& averaged, std::int64_t n,
                      const Eigen::MatrixXd& null_quantiles,
                      const SparsityEstimate& sparsity);
double test_statistic(const QuantileEstimator& est, const Eigen::MatrixXd& null_quantiles,
                      const SparsityEstimate& sparsity);

struct Band {
  int series = 0;
  double tau = 0.0;
  double lo = 0.0;
  double estimate = 0.0;
  double hi = 0.0;
};

// Simultaneous bands: estimate +- critical_value / (sqrt(n) * sparsity).
std::vector<Band> uniform_bands(const QuantileEstimator& est,
                                const SparsityEstimate& sparsity, double critical_value);

struct InferenceReport {
  double statistic = 0.0;
  double critical_value = 0.0;
  double alpha = 0.0;
  bool reject = false;
  std::vector<Band> bands;
};

// Statistic, simulated critical value, decision, and bands in one shot.
// The spec's grid and series count must match the estimator's layout.
InferenceReport run_test(const QuantileEstimator& est,
                         const Eigen::MatrixXd& null_quantiles,
                         const SparsityEstimate& sparsity, const BridgeSpec& spec,
                         double alpha);

// {statistic, critical_value, alpha, reject, bands: [...]} with doubles
// that survive a JSON round trip exactly.
std::string report_to_json(const InferenceReport& report);

}  // namespace quantstream
