#include "quantstream/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "quantstream/conditional.hpp"
#include "quantstream/distributions.hpp"
#include "quantstream/errors.hpp"
#include "quantstream/oracle.hpp"
#include "quantstream/rng.hpp"
#include "quantstream/sgd_quantile.hpp"

namespace quantstream {

namespace {

// Substream tags; every consumer of randomness derives its own seed so no
// stream is shared between data generation and critical-value simulation.
constexpr std::uint64_t kDataStream = 0xDA7A;
constexpr std::uint64_t kCritStream = 0xC417;

void validate_plan(const ExperimentPlan& plan, bool needs_alphas) {
  validate_schedule(plan.schedule);
  if (plan.n < 1) throw ConfigError("plan: n must be >= 1");
  if (plan.replications < 1) throw ConfigError("plan: replications must be >= 1");
  if (plan.threads < 1) throw ConfigError("plan: threads must be >= 1");
  if (!std::isfinite(plan.initial_value))
    throw ConfigError("plan: initial value must be finite");
  if (needs_alphas) {
    if (plan.alpha_levels.empty())
      throw ConfigError("plan: at least one alpha level is required");
    for (double a : plan.alpha_levels)
      if (!(a > 0.0) || !(a < 1.0))
        throw ConfigError("plan: alpha levels must lie in (0, 1)");
  }
}

Distribution plan_distribution(const ExperimentPlan& plan) {
  switch (plan.dgp) {
    case Dgp::standard_normal:
      return standard_normal_distribution();
    case Dgp::student_t:
      return student_t_distribution(plan.t_df);
    case Dgp::cond_normal_variance_x:
      throw ConfigError("plan: this experiment needs a univariate DGP");
  }
  throw ConfigError("plan: unknown DGP");
}

// Runs fn(rep) over [0, replications) on `threads` workers. Each
// replication writes only to its own slot, so scheduling cannot change the
// aggregate. The first exception wins and is rethrown on the caller.
void parallel_replications(std::int64_t replications, int threads,
                           const std::function<void(std::int64_t)>& fn) {
  if (threads <= 1 || replications < 2) {
    for (std::int64_t rep = 0; rep < replications; ++rep) fn(rep);
    return;
  }
  const int workers = static_cast<int>(
      std::min<std::int64_t>(threads, replications));
  std::mutex failure_mutex;
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::int64_t rep = w; rep < replications; rep += workers) {
          {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (failure) return;
          }
          fn(rep);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// Shared rejection-rate aggregation: statistics[rep] against per-alpha
// critical values (one row per alpha when they vary by replication).
CoverageTable aggregate_rates(const ExperimentPlan& plan,
                              const std::vector<double>& statistics,
                              const std::vector<std::vector<double>>& critical_values) {
  CoverageTable table;
  const auto reps = static_cast<std::int64_t>(statistics.size());
  for (std::size_t ai = 0; ai < plan.alpha_levels.size(); ++ai) {
    std::int64_t rejects = 0;
    for (std::int64_t rep = 0; rep < reps; ++rep) {
      const double cv = critical_values[ai].size() == 1
                            ? critical_values[ai][0]
                            : critical_values[ai][static_cast<std::size_t>(rep)];
      rejects += statistics[static_cast<std::size_t>(rep)] > cv ? 1 : 0;
    }
    CoverageCell cell;
    cell.n = plan.n;
    cell.beta = plan.schedule.beta;
    cell.alpha = plan.alpha_levels[ai];
    cell.replications = reps;
    cell.rate = static_cast<double>(rejects) / static_cast<double>(reps);
    cell.mc_se = std::sqrt(cell.rate * (1.0 - cell.rate) / static_cast<double>(reps));
    table.cells.push_back(cell);
  }
  return table;
}

void wrap_replication_errors(std::int64_t rep, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::runtime_error& e) {
    std::ostringstream msg;
    msg << "replication " << rep << ": " << e.what();
    throw InputError(msg.str());
  }
}

}  // namespace

CoverageTable run_coverage(const ExperimentPlan& plan) {
  validate_plan(plan, true);
  const Distribution dist = plan_distribution(plan);
  const auto levels = static_cast<Eigen::Index>(plan.grid.size());

  Eigen::MatrixXd nulls(1, levels);
  for (Eigen::Index j = 0; j < levels; ++j)
    nulls(0, j) = dist.quantile(plan.grid[static_cast<std::size_t>(j)]);
  const SparsityEstimate exact = known_sparsity(dist, plan.grid, 1);

  const std::uint64_t crit_seed = derive_seed(plan.seed, kCritStream);
  const std::uint64_t data_seed = derive_seed(plan.seed, kDataStream);
  const auto reps = plan.replications;
  const auto alphas = plan.alpha_levels.size();

  std::vector<std::vector<double>> critical_values(alphas);
  if (!plan.per_replication_critical_values) {
    const std::vector<double> maxima = simulate_sup_abs(independent_bridges_spec(
        plan.grid, 1, plan.critical_value_replications, crit_seed));
    for (std::size_t ai = 0; ai < alphas; ++ai)
      critical_values[ai] = {critical_value_from_sample(maxima, plan.alpha_levels[ai])};
  } else {
    for (std::size_t ai = 0; ai < alphas; ++ai)
      critical_values[ai].resize(static_cast<std::size_t>(reps));
  }

  std::vector<double> statistics(static_cast<std::size_t>(reps));
  const bool kde = plan.sparsity_mode == SparsityMode::kde;

  parallel_replications(reps, plan.threads, [&](std::int64_t rep) {
    wrap_replication_errors(rep, [&] {
      auto engine = make_stream(data_seed, static_cast<std::uint64_t>(rep));
      QuantileEstimator est(1, plan.grid, plan.schedule, plan.initial_value);
      std::vector<double> sample;
      if (kde) sample.reserve(static_cast<std::size_t>(plan.n));
      for (std::int64_t k = 0; k < plan.n; ++k) {
        const double x = dist.sample(engine);
        est.update(x);
        if (kde) sample.push_back(x);
      }
      double stat;
      if (kde) {
        std::vector<double> points(static_cast<std::size_t>(levels));
        for (Eigen::Index j = 0; j < levels; ++j)
          points[static_cast<std::size_t>(j)] = nulls(0, j);
        const KdeEstimate density = estimate_sparsity_kde(sample, points);
        SparsityEstimate sparsity;
        sparsity.mode = SparsityMode::kde;
        sparsity.bandwidth = density.bandwidth;
        sparsity.floored = density.floored;
        sparsity.values.resize(1, levels);
        for (Eigen::Index j = 0; j < levels; ++j)
          sparsity.values(0, j) = density.values[static_cast<std::size_t>(j)];
        stat = test_statistic(est, nulls, sparsity);
      } else {
        stat = test_statistic(est, nulls, exact);
      }
      statistics[static_cast<std::size_t>(rep)] = stat;
      if (plan.per_replication_critical_values) {
        const std::vector<double> maxima = simulate_sup_abs(independent_bridges_spec(
            plan.grid, 1, plan.critical_value_replications,
            derive_seed(crit_seed, 1 + static_cast<std::uint64_t>(rep))));
        for (std::size_t ai = 0; ai < alphas; ++ai)
          critical_values[ai][static_cast<std::size_t>(rep)] =
              critical_value_from_sample(maxima, plan.alpha_levels[ai]);
      }
    });
  });

  return aggregate_rates(plan, statistics, critical_values);
}

CoverageTable run_conditional_coverage(const ExperimentPlan& plan) {
  validate_plan(plan, true);
  if (plan.dgp != Dgp::cond_normal_variance_x)
    throw ConfigError("conditional coverage: the conditional DGP is required");

  ConditionalConfig cfg;
  cfg.eval_points = plan.eval_points;
  cfg.bandwidth = plan.bandwidth;
  cfg.grid = plan.grid;
  cfg.schedule = plan.schedule;
  cfg.initial_value = plan.initial_value;
  validate_conditional(cfg);
  for (double x : cfg.eval_points)
    if (!(x > 0.0) || !(x < 1.0))
      throw ConfigError("conditional coverage: evaluation points must lie in (0, 1)");

  const auto points = static_cast<Eigen::Index>(cfg.eval_points.size());
  const auto levels = static_cast<Eigen::Index>(plan.grid.size());

  // True surface and densities under Y | X = x ~ N(0, x): the conditional
  // quantile is sqrt(x) Phi^{-1}(tau) and the conditional density at it is
  // the N(0, x) density. The design density on [0, 1] is flat.
  Eigen::MatrixXd surface(points, levels);
  Eigen::MatrixXd true_sparsity(points, levels);
  Eigen::VectorXd flat_design = Eigen::VectorXd::Ones(points);
  for (Eigen::Index i = 0; i < points; ++i) {
    const double sigma = std::sqrt(cfg.eval_points[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < levels; ++j) {
      const double z = normal_quantile(plan.grid[static_cast<std::size_t>(j)]);
      surface(i, j) = sigma * z;
      true_sparsity(i, j) = normal_pdf(z) / sigma;
    }
  }

  const std::uint64_t crit_seed = derive_seed(plan.seed, kCritStream);
  const std::uint64_t data_seed = derive_seed(plan.seed, kDataStream);
  const auto reps = plan.replications;
  const auto alphas = plan.alpha_levels.size();

  std::vector<std::vector<double>> critical_values(alphas);
  const std::vector<double> maxima = simulate_sup_abs(independent_bridges_spec(
      plan.grid, static_cast<int>(points), plan.critical_value_replications, crit_seed));
  for (std::size_t ai = 0; ai < alphas; ++ai)
    critical_values[ai] = {critical_value_from_sample(maxima, plan.alpha_levels[ai])};

  std::vector<double> statistics(static_cast<std::size_t>(reps));
  const bool kde = plan.sparsity_mode == SparsityMode::kde;

  parallel_replications(reps, plan.threads, [&](std::int64_t rep) {
    wrap_replication_errors(rep, [&] {
      auto engine = make_stream(data_seed, static_cast<std::uint64_t>(rep));
      std::uniform_real_distribution<double> uniform(0.0, 1.0);
      std::normal_distribution<double> gauss(0.0, 1.0);
      ConditionalQuantileEstimator est(cfg);
      std::vector<std::pair<double, double>> sample;
      if (kde) sample.reserve(static_cast<std::size_t>(plan.n));
      for (std::int64_t k = 0; k < plan.n; ++k) {
        const double x = uniform(engine);
        const double y = std::sqrt(x) * gauss(engine);
        est.update(x, y);
        if (kde) sample.emplace_back(x, y);
      }
      double stat;
      if (kde) {
        const CondDensityEstimate densities =
            estimate_cond_densities(sample, cfg.eval_points, surface);
        stat = cond_test_statistic(est, surface, densities.cond_sparsity,
                                   densities.design_density);
      } else {
        stat = cond_test_statistic(est, surface, true_sparsity, flat_design);
      }
      statistics[static_cast<std::size_t>(rep)] = stat;
    });
  });

  return aggregate_rates(plan, statistics, critical_values);
}

QqResult run_qq(const ExperimentPlan& plan) {
  validate_plan(plan, false);
  const Distribution dist = plan_distribution(plan);
  const auto levels = static_cast<Eigen::Index>(plan.grid.size());

  Eigen::MatrixXd nulls(1, levels);
  for (Eigen::Index j = 0; j < levels; ++j)
    nulls(0, j) = dist.quantile(plan.grid[static_cast<std::size_t>(j)]);
  const SparsityEstimate exact = known_sparsity(dist, plan.grid, 1);

  QqResult out;
  out.reference = simulate_sup_abs(independent_bridges_spec(
      plan.grid, 1, plan.critical_value_replications,
      derive_seed(plan.seed, kCritStream)));

  const std::uint64_t data_seed = derive_seed(plan.seed, kDataStream);
  out.statistics.resize(static_cast<std::size_t>(plan.replications));
  const bool kde = plan.sparsity_mode == SparsityMode::kde;

  parallel_replications(plan.replications, plan.threads, [&](std::int64_t rep) {
    wrap_replication_errors(rep, [&] {
      auto engine = make_stream(data_seed, static_cast<std::uint64_t>(rep));
      QuantileEstimator est(1, plan.grid, plan.schedule, plan.initial_value);
      std::vector<double> sample;
      if (kde) sample.reserve(static_cast<std::size_t>(plan.n));
      for (std::int64_t k = 0; k < plan.n; ++k) {
        const double x = dist.sample(engine);
        est.update(x);
        if (kde) sample.push_back(x);
      }
      if (kde) {
        std::vector<double> points(static_cast<std::size_t>(levels));
        for (Eigen::Index j = 0; j < levels; ++j)
          points[static_cast<std::size_t>(j)] = nulls(0, j);
        const KdeEstimate density = estimate_sparsity_kde(sample, points);
        SparsityEstimate sparsity;
        sparsity.mode = SparsityMode::kde;
        sparsity.bandwidth = density.bandwidth;
        sparsity.values.resize(1, levels);
        for (Eigen::Index j = 0; j < levels; ++j)
          sparsity.values(0, j) = density.values[static_cast<std::size_t>(j)];
        out.statistics[static_cast<std::size_t>(rep)] = test_statistic(est, nulls, sparsity);
      } else {
        out.statistics[static_cast<std::size_t>(rep)] = test_statistic(est, nulls, exact);
      }
    });
  });

  std::sort(out.statistics.begin(), out.statistics.end());
  std::sort(out.reference.begin(), out.reference.end());

  // Equal-rank pairing at p = (rank - 0.5) / L with the lower empirical
  // quantile convention on both sides; reduces to index pairing when the
  // two samples have equal size.
  const auto pick = [](const std::vector<double>& sorted, double p) {
    const auto size = static_cast<double>(sorted.size());
    auto rank = static_cast<std::ptrdiff_t>(std::ceil(size * p - 1e-12));
    rank = std::clamp<std::ptrdiff_t>(rank, 1, static_cast<std::ptrdiff_t>(sorted.size()));
    return sorted[static_cast<std::size_t>(rank - 1)];
  };
  const std::size_t count = std::min(out.statistics.size(), out.reference.size());
  out.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    QqPoint point;
    point.p = (static_cast<double>(i) + 0.5) / static_cast<double>(count);
    point.empirical = pick(out.statistics, point.p);
    point.reference = pick(out.reference, point.p);
    out.points.push_back(point);
  }
  return out;
}

TailCurve run_tail_curve(const ExperimentPlan& plan, double tau,
                         const std::vector<double>& x_values) {
  validate_plan(plan, false);
  if (!(tau > 0.0) || !(tau < 1.0))
    throw ConfigError("tail curve: tau must lie in (0, 1)");
  if (x_values.empty()) throw ConfigError("tail curve: threshold grid is required");
  double prev = 0.0;
  for (double x : x_values) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw ConfigError("tail curve: thresholds must be non-negative and finite");
    if (x < prev) throw ConfigError("tail curve: thresholds must be non-decreasing");
    prev = x;
  }

  const Distribution dist = plan_distribution(plan);
  const double true_quantile = dist.quantile(tau);
  const QuantileGrid single_level{std::vector<double>{tau}};
  const std::uint64_t data_seed = derive_seed(plan.seed, kDataStream);

  const auto reps = static_cast<std::size_t>(plan.replications);
  std::vector<double> averaged_dev(reps);
  std::vector<double> raw_dev(reps);

  parallel_replications(plan.replications, plan.threads, [&](std::int64_t rep) {
    wrap_replication_errors(rep, [&] {
      auto engine = make_stream(data_seed, static_cast<std::uint64_t>(rep));
      QuantileEstimator est(1, single_level, plan.schedule, plan.initial_value);
      for (std::int64_t k = 0; k < plan.n; ++k) est.update(dist.sample(engine));
      averaged_dev[static_cast<std::size_t>(rep)] =
          std::abs(est.averaged()(0, 0) - true_quantile);
      raw_dev[static_cast<std::size_t>(rep)] = std::abs(est.raw()(0, 0) - true_quantile);
    });
  });

  TailCurve curve;
  curve.n = plan.n;
  curve.tau = tau;
  curve.replications = plan.replications;
  curve.points.reserve(x_values.size());
  for (double x : x_values) {
    TailCurvePoint point;
    point.x = x;
    std::int64_t above_avg = 0;
    std::int64_t above_raw = 0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      above_avg += averaged_dev[rep] > x ? 1 : 0;
      above_raw += raw_dev[rep] > x ? 1 : 0;
    }
    point.averaged_rate = static_cast<double>(above_avg) / static_cast<double>(reps);
    point.raw_rate = static_cast<double>(above_raw) / static_cast<double>(reps);
    curve.points.push_back(point);
  }
  return curve;
}

}  // namespace quantstream
