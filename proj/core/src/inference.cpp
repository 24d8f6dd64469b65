#include "quantstream/inference.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "quantstream/errors.hpp"
#include "quantstream/oracle.hpp"
#include "quantstream/rng.hpp"

namespace quantstream {

double bridge_covariance(double t, double s) {
  if (!(t > 0.0) || !(t < 1.0) || !(s > 0.0) || !(s < 1.0))
    throw InputError("bridge_covariance: levels must lie in (0, 1)");
  return std::min(s, t) * (1.0 - std::max(s, t));
}

BridgeSpec independent_bridges_spec(QuantileGrid grid, int series_count,
                                    std::int64_t replications, std::uint64_t seed) {
  BridgeSpec spec{std::move(grid), series_count, nullptr, replications, seed};
  spec.covariance = [](int i, double t, int j, double s) {
    return i == j ? bridge_covariance(t, s) : 0.0;
  };
  return spec;
}

GaussianProcessSampler::GaussianProcessSampler(const BridgeSpec& spec) : seed_(spec.seed) {
  if (spec.series_count < 1) throw ConfigError("bridge: series_count must be >= 1");
  if (!spec.covariance) throw ConfigError("bridge: a covariance function is required");

  const auto m = static_cast<Eigen::Index>(spec.grid.size());
  const Eigen::Index dim = spec.series_count * m;
  const auto& levels = spec.grid.levels();
  covariance_.resize(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const int si = static_cast<int>(r / m);
    const double ti = levels[static_cast<std::size_t>(r % m)];
    for (Eigen::Index c = 0; c < dim; ++c) {
      const int sj = static_cast<int>(c / m);
      const double tj = levels[static_cast<std::size_t>(c % m)];
      covariance_(r, c) = spec.covariance(si, ti, sj, tj);
    }
  }

  const double scale = std::max(covariance_.cwiseAbs().maxCoeff(), 1.0);
  const double asymmetry = (covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > 1e-10 * scale)
    throw NumericError("bridge: covariance function is not symmetric");
  covariance_ = ((covariance_ + covariance_.transpose()) / 2.0).eval();

  Eigen::LLT<Eigen::MatrixXd> llt(covariance_);
  if (llt.info() == Eigen::Success) {
    transform_ = llt.matrixL();
    return;
  }
  // Singular-but-PSD covariances (repeated levels, degenerate user input)
  // land here; clip the rounding-level negative eigenvalues.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance_);
  if (eig.info() != Eigen::Success)
    throw NumericError("bridge: eigendecomposition of the covariance failed");
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double lambda_max = lambda.maxCoeff();
  if (lambda.minCoeff() < -1e-8 * std::max(lambda_max, 0.0))
    throw NumericError("bridge: covariance matrix is not positive semi-definite");
  transform_ =
      eig.eigenvectors() * lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

Eigen::VectorXd GaussianProcessSampler::draw(std::int64_t replication) const {
  auto engine = make_stream(seed_, static_cast<std::uint64_t>(replication));
  std::normal_distribution<double> standard_normal(0.0, 1.0);
  Eigen::VectorXd z(transform_.cols());
  for (Eigen::Index d = 0; d < z.size(); ++d) z[d] = standard_normal(engine);
  return transform_ * z;
}

std::vector<double> simulate_sup_abs(const BridgeSpec& spec) {
  if (spec.replications < 1000)
    throw ConfigError("bridge: at least 1000 replications are required");
  GaussianProcessSampler sampler(spec);
  std::vector<double> maxima(static_cast<std::size_t>(spec.replications));
  for (std::int64_t r = 0; r < spec.replications; ++r)
    maxima[static_cast<std::size_t>(r)] = sampler.draw(r).cwiseAbs().maxCoeff();
  return maxima;
}

double critical_value_from_sample(const std::vector<double>& sup_samples, double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw InputError("critical value: alpha must lie in (0, 1)");
  return sample_quantile(sup_samples, 1.0 - alpha);
}

double simulate_critical_value(const BridgeSpec& spec, double alpha) {
  return critical_value_from_sample(simulate_sup_abs(spec), alpha);
}

double silverman_bandwidth(const std::vector<double>& sample) {
  const auto m = sample.size();
  if (m < 2) throw InputError("silverman_bandwidth: sample must hold at least 2 points");
  double mean = 0.0;
  for (double x : sample) mean += x;
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double x : sample) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(m - 1));
  const double iqr =
      sample_quantile(sample, 0.75) - sample_quantile(sample, 0.25);
  const double spread_a = sd;
  const double spread_b = iqr / 1.34;
  double spread;
  if (spread_a > 0.0 && spread_b > 0.0)
    spread = std::min(spread_a, spread_b);
  else
    spread = std::max(spread_a, spread_b);  // heavy ties can zero one of them
  if (!(spread > 0.0) || !std::isfinite(spread))
    throw NumericError("silverman_bandwidth: zero bandwidth (sample has no spread)");
  return 1.06 * spread * std::pow(static_cast<double>(m), -0.2);
}

KdeEstimate estimate_sparsity_kde(const std::vector<double>& sample,
                                  const std::vector<double>& points, double bandwidth) {
  if (sample.size() < 2)
    throw InputError("estimate_sparsity_kde: sample must hold at least 2 points");
  KdeEstimate out;
  out.bandwidth = bandwidth > 0.0 ? bandwidth : silverman_bandwidth(sample);
  if (!std::isfinite(out.bandwidth) || !(out.bandwidth > 0.0))
    throw NumericError("estimate_sparsity_kde: bandwidth must be positive and finite");

  constexpr double inv_sqrt_2pi = 0.3989422804014327;
  const double inv_h = 1.0 / out.bandwidth;
  const double norm = inv_sqrt_2pi * inv_h / static_cast<double>(sample.size());
  out.values.reserve(points.size());
  for (double q : points) {
    if (!std::isfinite(q))
      throw InputError("estimate_sparsity_kde: evaluation points must be finite");
    double acc = 0.0;
    for (double x : sample) {
      const double u = (q - x) * inv_h;
      acc += std::exp(-0.5 * u * u);
    }
    double value = norm * acc;
    if (value < kSparsityFloor) {
      value = kSparsityFloor;
      ++out.floored;
    }
    out.values.push_back(value);
  }
  return out;
}

SparsityEstimate known_sparsity(const Distribution& dist, const QuantileGrid& grid,
                                int series_count) {
  if (series_count < 1) throw ConfigError("known_sparsity: series_count must be >= 1");
  SparsityEstimate out;
  out.mode = SparsityMode::known;
  out.values.resize(series_count, static_cast<Eigen::Index>(grid.size()));
  for (Eigen::Index j = 0; j < out.values.cols(); ++j) {
    const double f = dist.pdf(dist.quantile(grid[static_cast<std::size_t>(j)]));
    for (Eigen::Index i = 0; i < out.values.rows(); ++i) out.values(i, j) = f;
  }
  return out;
}

SparsityEstimate kde_sparsity(const std::vector<std::vector<double>>& samples_per_series,
                              const Eigen::MatrixXd& points, double bandwidth) {
  if (samples_per_series.size() != static_cast<std::size_t>(points.rows()))
    throw InputError("kde_sparsity: one sample per series is required");
  SparsityEstimate out;
  out.mode = SparsityMode::kde;
  out.values.resize(points.rows(), points.cols());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    std::vector<double> where(points.cols());
    for (Eigen::Index j = 0; j < points.cols(); ++j) where[static_cast<std::size_t>(j)] = points(i, j);
    KdeEstimate kde =
        estimate_sparsity_kde(samples_per_series[static_cast<std::size_t>(i)], where, bandwidth);
    for (Eigen::Index j = 0; j < points.cols(); ++j)
      out.values(i, j) = kde.values[static_cast<std::size_t>(j)];
    out.floored += kde.floored;
    out.bandwidth = kde.bandwidth;  // last series wins; per-series h differs only with auto
  }
  return out;
}

namespace {

void check_sparsity(const SparsityEstimate& sparsity, Eigen::Index rows, Eigen::Index cols) {
  if (sparsity.values.rows() != rows || sparsity.values.cols() != cols)
    throw InputError("sparsity matrix does not match series count x grid size");
  if (!(sparsity.values.minCoeff() > 0.0))
    throw NumericError("sparsity values must be strictly positive");
}

}  // namespace

double test_statistic(const Eigen::MatrixXd& averaged, std::int64_t n,
                      const Eigen::MatrixXd& null_quantiles,
                      const SparsityEstimate& sparsity) {
  if (n < 1) throw InputError("test_statistic: at least one observation is required");
  if (null_quantiles.rows() != averaged.rows() || null_quantiles.cols() != averaged.cols())
    throw InputError("test_statistic: null quantile matrix does not match estimates");
  check_sparsity(sparsity, averaged.rows(), averaged.cols());
  const double root_n = std::sqrt(static_cast<double>(n));
  double stat = 0.0;
  for (Eigen::Index i = 0; i < averaged.rows(); ++i)
    for (Eigen::Index j = 0; j < averaged.cols(); ++j)
      stat = std::max(stat, root_n * sparsity.values(i, j) *
                                std::abs(averaged(i, j) - null_quantiles(i, j)));
  return stat;
}

double test_statistic(const QuantileEstimator& est, const Eigen::MatrixXd& null_quantiles,
                      const SparsityEstimate& sparsity) {
  return test_statistic(est.averaged(), est.step(), null_quantiles, sparsity);
}

std::vector<Band> uniform_bands(const QuantileEstimator& est,
                                const SparsityEstimate& sparsity, double critical_value) {
  if (est.step() < 1) throw InputError("uniform_bands: at least one observation is required");
  if (!(critical_value >= 0.0) || !std::isfinite(critical_value))
    throw InputError("uniform_bands: critical value must be finite and non-negative");
  const Eigen::MatrixXd& averaged = est.averaged();
  check_sparsity(sparsity, averaged.rows(), averaged.cols());
  const double root_n = std::sqrt(static_cast<double>(est.step()));
  std::vector<Band> bands;
  bands.reserve(static_cast<std::size_t>(averaged.size()));
  for (Eigen::Index i = 0; i < averaged.rows(); ++i) {
    for (Eigen::Index j = 0; j < averaged.cols(); ++j) {
      const double halfwidth = critical_value / (root_n * sparsity.values(i, j));
      const double center = averaged(i, j);
      bands.push_back(Band{static_cast<int>(i), est.grid()[static_cast<std::size_t>(j)],
                           center - halfwidth, center, center + halfwidth});
    }
  }
  return bands;
}

InferenceReport run_test(const QuantileEstimator& est,
                         const Eigen::MatrixXd& null_quantiles,
                         const SparsityEstimate& sparsity, const BridgeSpec& spec,
                         double alpha) {
  if (!(spec.grid == est.grid()) || spec.series_count != est.series_count())
    throw InputError("run_test: bridge spec does not match the estimator layout");
  InferenceReport report;
  report.alpha = alpha;
  report.statistic = test_statistic(est, null_quantiles, sparsity);
  report.critical_value = simulate_critical_value(spec, alpha);
  report.reject = report.statistic > report.critical_value;
  report.bands = uniform_bands(est, sparsity, report.critical_value);
  return report;
}

}  // namespace quantstream
