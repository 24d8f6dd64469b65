#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

#include "quantstream/grid.hpp"
#include "quantstream/score.hpp"

namespace quantstream {

enum class IterateKind { raw, averaged };

// One running-mean step: the mean of a sequence after `count_after` entries,
// given the mean of the first count_after - 1 and the new value. Shared by
// the unconditional and conditional estimators so the two stay bit-identical
// on equivalent streams.
inline double running_mean_step(double mean, double value, std::int64_t count_after) {
  const double n = static_cast<double>(count_after);
  return mean * ((n - 1.0) / n) + value / n;
}

// Streaming multi-series, multi-level quantile estimator.
//
// Every observation vector moves each (series, level) cell by one smoothed
// gradient step with step size gamma_k, and the averaged iterate — the
// estimate to report — tracks the running mean of the raw iterates. Rows
// never cross: for levels tau' < tau the tau'-cell stays <= the tau-cell
// after every update, exactly, in both the raw and the averaged matrix.
//
// Single writer: update calls are strictly sequential (the recursion is
// order-dependent). Reads are safe whenever no update is in flight, and
// independent estimators may run on any number of threads.
class QuantileEstimator {
 public:
  // One initial value per series; every level of series i starts at
  // initial_values[i] (a constant row trivially satisfies monotonicity).
  QuantileEstimator(int series_count, QuantileGrid grid, ScheduleConfig schedule,
                    std::vector<double> initial_values);

  // Same initial value for every series.
  QuantileEstimator(int series_count, QuantileGrid grid, ScheduleConfig schedule,
                    double initial_value = 0.0);

  // Consume one synchronized observation vector, one entry per series.
  // Throws InputError (state untouched) on wrong dimension or non-finite
  // entries.
  void update(std::span<const double> observation);

  // Single-series convenience.
  void update(double observation);

  // Fold update over a whole sequence; an invalid vector raises InputError
  // naming its zero-based position, with the state as of the last good one.
  void update_many(const std::vector<std::vector<double>>& observations);

  // Copy of the requested iterate matrix (series x levels).
  Eigen::MatrixXd estimates(IterateKind kind) const;

  const Eigen::MatrixXd& raw() const { return raw_; }
  const Eigen::MatrixXd& averaged() const { return averaged_; }
  std::int64_t step() const { return step_; }
  int series_count() const { return static_cast<int>(raw_.rows()); }
  const QuantileGrid& grid() const { return grid_; }
  const ScheduleConfig& schedule() const { return schedule_; }
  const std::vector<double>& initial_values() const { return initial_values_; }

  // Rebuild a checkpointed estimator. Validates dimensions, finiteness,
  // row monotonicity, and step >= 0; throws InputError otherwise.
  static QuantileEstimator restore(QuantileGrid grid, ScheduleConfig schedule,
                                   std::vector<double> initial_values, std::int64_t step,
                                   Eigen::MatrixXd raw, Eigen::MatrixXd averaged);

 private:
  QuantileGrid grid_;
  ScheduleConfig schedule_;
  std::vector<double> initial_values_;
  std::int64_t step_ = 0;
  Eigen::MatrixXd raw_;       // series x levels
  Eigen::MatrixXd averaged_;  // series x levels
};

}  // namespace quantstream
