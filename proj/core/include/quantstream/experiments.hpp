#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "quantstream/grid.hpp"
#include "quantstream/inference.hpp"
#include "quantstream/score.hpp"

namespace quantstream {

// Data-generating processes used by the Monte Carlo studies. The
// conditional DGP draws X uniform on [0,1] and Y | X = x ~ N(0, x).
enum class Dgp { standard_normal, student_t, cond_normal_variance_x };

struct ExperimentPlan {
  Dgp dgp = Dgp::standard_normal;
  double t_df = 10.0;  // student_t only
  std::int64_t n = 1000;
  std::int64_t replications = 1000;
  QuantileGrid grid{std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}};
  ScheduleConfig schedule;
  SparsityMode sparsity_mode = SparsityMode::known;
  std::vector<double> alpha_levels{0.15, 0.10, 0.05, 0.01};
  std::uint64_t seed = 0;
  double initial_value = 0.0;
  std::int64_t critical_value_replications = 100000;
  // Re-simulate critical values inside every replication instead of sharing
  // one simulation per plan. The reference law does not depend on the
  // replication, so this is a cross-check knob, not the default.
  bool per_replication_critical_values = false;
  int threads = 1;
  // Conditional mode only.
  std::vector<double> eval_points{0.2, 0.4, 0.6, 0.8};
  double bandwidth = 0.2;
};

struct CoverageCell {
  std::int64_t n = 0;
  double beta = 0.0;
  double alpha = 0.0;
  double rate = 0.0;
  double mc_se = 0.0;  // sqrt(rate * (1 - rate) / replications)
  std::int64_t replications = 0;
};

struct CoverageTable {
  std::vector<CoverageCell> cells;
};

// Size study under the true null: per replication, stream n draws through
// the estimator, compare the statistic against simulated critical values
// at every alpha, aggregate rejection rates. Deterministic per seed, and
// thread count never changes the result.
CoverageTable run_coverage(const ExperimentPlan& plan);

// Same aggregation for the conditional estimator: true surface
// m(x, tau) = sqrt(x) * normal_quantile(tau), conditional density of
// N(0, x) at the surface, flat design density. KDE mode estimates the
// densities from each replication's sample instead.
CoverageTable run_conditional_coverage(const ExperimentPlan& plan);

struct QqPoint {
  double p = 0.0;
  double empirical = 0.0;
  double reference = 0.0;
};

struct QqResult {
  std::vector<QqPoint> points;     // equal-rank quantile pairs
  std::vector<double> statistics;  // replication statistics, sorted
  std::vector<double> reference;   // sup-norm reference sample, sorted
};

// Pairs the sorted replication statistics with equal-rank quantiles of the
// simulated sup-norm reference; one point per rank at
// p = (rank - 0.5) / min(replications, reference size).
QqResult run_qq(const ExperimentPlan& plan);

struct TailCurvePoint {
  double x = 0.0;
  double averaged_rate = 0.0;  // P(|averaged - Q| > x)
  double raw_rate = 0.0;       // P(|raw - Q| > x)
};

struct TailCurve {
  std::int64_t n = 0;
  double tau = 0.0;
  std::int64_t replications = 0;
  std::vector<TailCurvePoint> points;
};

// Monte Carlo exceedance frequencies of the estimation error at one level,
// for both the averaged and the raw iterate, over an increasing grid of
// thresholds. Used for qualitative decay checks.
TailCurve run_tail_curve(const ExperimentPlan& plan, double tau,
                         const std::vector<double>& x_values);

// Serialization; schemas are documented in the command line tool. CSV uses
// 17 significant digits, JSON uses shortest-round-trip doubles; both
// reproduce the stored values exactly.
std::string coverage_to_csv(const CoverageTable& table);
std::string coverage_to_json(const CoverageTable& table);
std::string qq_to_csv(const QqResult& result);
std::string qq_to_json(const QqResult& result);
std::string tail_to_csv(const TailCurve& curve);
std::string tail_to_json(const TailCurve& curve);

}  // namespace quantstream
