#include "quantstream/sgd_quantile.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace quantstream {

namespace {

void check_initial_values(const std::vector<double>& values, int series_count) {
  if (series_count < 1) throw ConfigError("estimator: series_count must be >= 1");
  if (values.size() != static_cast<std::size_t>(series_count))
    throw ConfigError("estimator: one initial value per series is required");
  for (double v : values)
    if (!std::isfinite(v)) throw ConfigError("estimator: initial values must be finite");
}

}  // namespace

QuantileEstimator::QuantileEstimator(int series_count, QuantileGrid grid,
                                     ScheduleConfig schedule,
                                     std::vector<double> initial_values)
    : grid_(std::move(grid)),
      schedule_(schedule),
      initial_values_(std::move(initial_values)) {
  validate_schedule(schedule_);  // warnings are the caller's business; errors throw
  check_initial_values(initial_values_, series_count);
  const auto levels = static_cast<Eigen::Index>(grid_.size());
  raw_.resize(series_count, levels);
  for (int i = 0; i < series_count; ++i) raw_.row(i).setConstant(initial_values_[i]);
  averaged_ = raw_;
}

QuantileEstimator::QuantileEstimator(int series_count, QuantileGrid grid,
                                     ScheduleConfig schedule, double initial_value)
    : QuantileEstimator(series_count, std::move(grid), schedule,
                        std::vector<double>(series_count > 0 ? series_count : 0,
                                            initial_value)) {}

void QuantileEstimator::update(std::span<const double> observation) {
  if (observation.size() != static_cast<std::size_t>(raw_.rows()))
    throw InputError("update: observation dimension does not match series count");
  for (double x : observation)
    if (!std::isfinite(x)) throw InputError("update: observation entries must be finite");

  const std::int64_t k = step_ + 1;
  const double gamma = learning_rate(schedule_, k);
  const double width = schedule_.a * gamma;
  const auto& levels = grid_.levels();

  for (Eigen::Index i = 0; i < raw_.rows(); ++i) {
    const double x = observation[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < raw_.cols(); ++j) {
      const double tau = levels[static_cast<std::size_t>(j)];
      double y = raw_(i, j);
      y += gamma * (tau - ramp_score_scaled(y - x, width));
      raw_(i, j) = y;
      averaged_(i, j) = running_mean_step(averaged_(i, j), y, k);
    }
  }
  step_ = k;
}

void QuantileEstimator::update(double observation) {
  update(std::span<const double>(&observation, 1));
}

void QuantileEstimator::update_many(const std::vector<std::vector<double>>& observations) {
  for (std::size_t idx = 0; idx < observations.size(); ++idx) {
    try {
      update(std::span<const double>(observations[idx].data(), observations[idx].size()));
    } catch (const InputError& e) {
      std::ostringstream msg;
      msg << "observation " << idx << ": " << e.what();
      throw InputError(msg.str());
    }
  }
}

Eigen::MatrixXd QuantileEstimator::estimates(IterateKind kind) const {
  return kind == IterateKind::raw ? raw_ : averaged_;
}

QuantileEstimator QuantileEstimator::restore(QuantileGrid grid, ScheduleConfig schedule,
                                             std::vector<double> initial_values,
                                             std::int64_t step, Eigen::MatrixXd raw,
                                             Eigen::MatrixXd averaged) {
  QuantileEstimator est(static_cast<int>(initial_values.size()), std::move(grid), schedule,
                        initial_values);
  if (step < 0) throw InputError("restore: step must be non-negative");
  const Eigen::Index rows = est.raw_.rows();
  const Eigen::Index cols = est.raw_.cols();
  if (raw.rows() != rows || raw.cols() != cols || averaged.rows() != rows ||
      averaged.cols() != cols)
    throw InputError("restore: iterate matrices do not match series count x grid size");
  for (const Eigen::MatrixXd* m : {&raw, &averaged}) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (!std::isfinite((*m)(i, j)))
          throw InputError("restore: iterate matrices must be finite");
        if (j > 0 && (*m)(i, j) < (*m)(i, j - 1))
          throw InputError("restore: iterate rows must be non-decreasing across levels");
      }
    }
  }
  est.step_ = step;
  est.raw_ = std::move(raw);
  est.averaged_ = std::move(averaged);
  return est;
}

}  // namespace quantstream
