#include "quantstream/conditional.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "quantstream/errors.hpp"
#include "quantstream/inference.hpp"
#include "quantstream/sgd_quantile.hpp"

namespace quantstream {

double uniform_kernel(double u) { return std::abs(u) <= 1.0 ? 0.5 : 0.0; }

double mu2_uniform() { return 0.5; }

std::vector<std::string> validate_conditional(const ConditionalConfig& cfg) {
  std::vector<std::string> warnings = validate_schedule(cfg.schedule);
  if (!(cfg.bandwidth > 0.0) || !std::isfinite(cfg.bandwidth))
    throw ConfigError("conditional: bandwidth must be positive and finite");
  if (cfg.eval_points.empty())
    throw ConfigError("conditional: at least one evaluation point is required");
  for (double x : cfg.eval_points)
    if (!std::isfinite(x)) throw ConfigError("conditional: evaluation points must be finite");
  std::vector<double> sorted(cfg.eval_points);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ConfigError("conditional: evaluation points must be distinct");
  if (!std::isfinite(cfg.initial_value))
    throw ConfigError("conditional: initial value must be finite");

  const double max_weight = 0.5 / cfg.bandwidth;
  if (max_weight > 2.0 * cfg.schedule.a) {
    std::ostringstream msg;
    msg << "conditional: kernel weight 1/(2h) = " << max_weight << " exceeds 2a = "
        << 2.0 * cfg.schedule.a
        << "; level ordering is only guaranteed while the per-update weight stays "
        << "within 2a — raise a or the bandwidth to restore the guarantee";
    warnings.push_back(msg.str());
  }
  return warnings;
}

ConditionalQuantileEstimator::ConditionalQuantileEstimator(ConditionalConfig cfg)
    : cfg_(std::move(cfg)) {
  validate_conditional(cfg_);
  raw_.resize(static_cast<Eigen::Index>(cfg_.eval_points.size()),
              static_cast<Eigen::Index>(cfg_.grid.size()));
  raw_.setConstant(cfg_.initial_value);
  averaged_ = raw_;
}

void ConditionalQuantileEstimator::update(double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y))
    throw InputError("cond_update: observation must be finite");
  const std::int64_t k = step_ + 1;
  const double gamma = learning_rate(cfg_.schedule, k);
  const double width = cfg_.schedule.a * gamma;
  const double inv_h = 1.0 / cfg_.bandwidth;
  const auto& levels = cfg_.grid.levels();

  for (Eigen::Index i = 0; i < raw_.rows(); ++i) {
    const double u = (cfg_.eval_points[static_cast<std::size_t>(i)] - x) * inv_h;
    const double w = uniform_kernel(u) * inv_h;
    for (Eigen::Index j = 0; j < raw_.cols(); ++j) {
      double z = raw_(i, j);
      if (w > 0.0) {
        const double tau = levels[static_cast<std::size_t>(j)];
        z += gamma * (tau - ramp_score_scaled(z - y, width)) * w;
        raw_(i, j) = z;
      }
      averaged_(i, j) = running_mean_step(averaged_(i, j), z, k);
    }
  }
  step_ = k;
}

double cond_test_statistic(const Eigen::MatrixXd& averaged,
                           const Eigen::MatrixXd& null_surface,
                           const Eigen::MatrixXd& cond_sparsity,
                           const Eigen::VectorXd& design_density, double bandwidth,
                           std::int64_t n) {
  if (n < 1) throw InputError("cond_test_statistic: at least one observation is required");
  if (!(bandwidth > 0.0))
    throw InputError("cond_test_statistic: bandwidth must be positive");
  if (null_surface.rows() != averaged.rows() || null_surface.cols() != averaged.cols() ||
      cond_sparsity.rows() != averaged.rows() || cond_sparsity.cols() != averaged.cols() ||
      design_density.size() != averaged.rows())
    throw InputError("cond_test_statistic: matrix shapes do not match");
  if (!(cond_sparsity.minCoeff() > 0.0) || !(design_density.minCoeff() > 0.0))
    throw NumericError("cond_test_statistic: densities must be strictly positive");

  const double root_nh = std::sqrt(static_cast<double>(n) * bandwidth);
  const double inv_mu2 = 1.0 / mu2_uniform();
  double stat = 0.0;
  for (Eigen::Index i = 0; i < averaged.rows(); ++i) {
    const double design_factor = std::sqrt(design_density(i) * inv_mu2);
    for (Eigen::Index j = 0; j < averaged.cols(); ++j)
      stat = std::max(stat, root_nh * design_factor * cond_sparsity(i, j) *
                                std::abs(averaged(i, j) - null_surface(i, j)));
  }
  return stat;
}

double cond_test_statistic(const ConditionalQuantileEstimator& est,
                           const Eigen::MatrixXd& null_surface,
                           const Eigen::MatrixXd& cond_sparsity,
                           const Eigen::VectorXd& design_density) {
  return cond_test_statistic(est.averaged(), null_surface, cond_sparsity, design_density,
                             est.config().bandwidth, est.step());
}

CondDensityEstimate estimate_cond_densities(
    const std::vector<std::pair<double, double>>& sample,
    const std::vector<double>& eval_points, const Eigen::MatrixXd& surface_points,
    double bandwidth_x, double bandwidth_y) {
  if (sample.size() < 2)
    throw InputError("estimate_cond_densities: sample must hold at least 2 points");
  if (eval_points.empty())
    throw InputError("estimate_cond_densities: evaluation points are required");
  if (surface_points.rows() != static_cast<Eigen::Index>(eval_points.size()))
    throw InputError("estimate_cond_densities: one surface row per evaluation point");

  const auto m = sample.size();
  std::vector<double> xs(m), ys(m);
  for (std::size_t idx = 0; idx < m; ++idx) {
    xs[idx] = sample[idx].first;
    ys[idx] = sample[idx].second;
  }

  CondDensityEstimate out;
  out.bandwidth_x = bandwidth_x > 0.0 ? bandwidth_x : silverman_bandwidth(xs);
  out.bandwidth_y = bandwidth_y > 0.0 ? bandwidth_y : silverman_bandwidth(ys);

  constexpr double inv_sqrt_2pi = 0.3989422804014327;
  const double inv_hx = 1.0 / out.bandwidth_x;
  const double inv_hy = 1.0 / out.bandwidth_y;
  const auto count = static_cast<double>(m);

  const auto points = static_cast<Eigen::Index>(eval_points.size());
  out.design_density.resize(points);
  out.cond_sparsity.resize(points, surface_points.cols());

  std::vector<double> x_weight(m);
  for (Eigen::Index i = 0; i < points; ++i) {
    double design_acc = 0.0;
    for (std::size_t idx = 0; idx < m; ++idx) {
      const double u = (eval_points[static_cast<std::size_t>(i)] - xs[idx]) * inv_hx;
      x_weight[idx] = inv_sqrt_2pi * std::exp(-0.5 * u * u);
      design_acc += x_weight[idx];
    }
    double design = design_acc * inv_hx / count;
    if (design < kSparsityFloor) {
      design = kSparsityFloor;
      ++out.floored;
    }
    out.design_density(i) = design;

    for (Eigen::Index j = 0; j < surface_points.cols(); ++j) {
      const double q = surface_points(i, j);
      if (!std::isfinite(q))
        throw InputError("estimate_cond_densities: surface points must be finite");
      double joint_acc = 0.0;
      for (std::size_t idx = 0; idx < m; ++idx) {
        const double v = (q - ys[idx]) * inv_hy;
        joint_acc += x_weight[idx] * inv_sqrt_2pi * std::exp(-0.5 * v * v);
      }
      const double joint = joint_acc * inv_hx * inv_hy / count;
      double cond = joint / design;
      if (cond < kSparsityFloor) {
        cond = kSparsityFloor;
        ++out.floored;
      }
      out.cond_sparsity(i, j) = cond;
    }
  }
  return out;
}

}  // namespace quantstream
