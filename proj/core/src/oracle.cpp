#include "quantstream/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "quantstream/errors.hpp"

namespace quantstream {

namespace {

// Recursive adaptive Simpson refinement. `whole` is Simpson over [a, b]
// with midpoint m; fa/fm/fb are cached endpoint values.
double adaptive_simpson(const CdfFn& f, double a, double m, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double split = left + right;
  if (std::abs(split - whole) <= 15.0 * tol) return split + (split - whole) / 15.0;
  if (depth <= 0) throw NumericError("window_mean_cdf: quadrature failed to converge");
  return adaptive_simpson(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double sample_quantile(const std::vector<double>& data, double tau) {
  if (data.empty()) throw InputError("sample_quantile: data must be non-empty");
  if (!(tau > 0.0) || !(tau < 1.0))
    throw InputError("sample_quantile: tau must lie in (0, 1)");
  const auto n = data.size();
  // ceil(n * tau), shaved by an epsilon so that representation error in
  // n * tau cannot push an exactly-integer rank to the next order statistic.
  auto rank = static_cast<std::ptrdiff_t>(
      std::ceil(static_cast<double>(n) * tau - 1e-12));
  rank = std::clamp<std::ptrdiff_t>(rank, 1, static_cast<std::ptrdiff_t>(n));
  std::vector<double> work(data);
  std::nth_element(work.begin(), work.begin() + (rank - 1), work.end());
  return work[static_cast<std::size_t>(rank - 1)];
}

double empirical_cdf(const std::vector<double>& data, double x) {
  if (data.empty()) throw InputError("empirical_cdf: data must be non-empty");
  if (std::isnan(x)) throw InputError("empirical_cdf: x is NaN");
  std::size_t count = 0;
  for (double v : data) count += (v <= x) ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(data.size());
}

double window_mean_cdf(const CdfFn& cdf, double lo, double hi, double tol) {
  if (!(hi > lo)) throw InputError("window_mean_cdf: window must have positive width");
  if (!(tol > 0.0)) throw InputError("window_mean_cdf: tolerance must be positive");
  const double width = hi - lo;
  const double m = 0.5 * (lo + hi);
  const double fa = cdf(lo);
  const double fm = cdf(m);
  const double fb = cdf(hi);
  const double whole = width / 6.0 * (fa + 4.0 * fm + fb);
  const double integral =
      adaptive_simpson(cdf, lo, m, hi, fa, fm, fb, whole, tol * width, 48);
  return integral / width;
}

BahadurTerms bahadur_terms(const std::vector<double>& observations,
                           const std::vector<double>& trace, const ScheduleConfig& cfg,
                           double tau, double true_quantile, double density_at_quantile,
                           const CdfFn& cdf) {
  if (observations.empty()) throw InputError("bahadur_terms: empty observation sequence");
  if (observations.size() != trace.size())
    throw InputError("bahadur_terms: trace length must equal observation count");
  if (!(tau > 0.0) || !(tau < 1.0)) throw InputError("bahadur_terms: tau must lie in (0, 1)");
  if (!(density_at_quantile > 0.0))
    throw InputError("bahadur_terms: density at the quantile must be positive");
  validate_schedule(cfg);

  const std::size_t n = observations.size();
  BahadurTerms out;
  out.xi.resize(n);
  double sum_xi = 0.0;
  double sum_iterates = 0.0;
  for (std::size_t idx = 0; idx < n; ++idx) {
    const auto k = static_cast<std::int64_t>(idx) + 1;
    const double gamma = learning_rate(cfg, k);
    const double width = cfg.a * gamma;
    const double y = trace[idx];
    const double score = tau - ramp_score_scaled(y - observations[idx], width);
    // Averaging the ramp against F over the window gives the conditional
    // mean of the score given everything up to this step.
    const double smoothed_cdf = window_mean_cdf(cdf, y - width, y + width);
    const double conditional_mean = tau - smoothed_cdf;
    const double xi = score - conditional_mean;
    out.xi[idx] = xi;
    sum_xi += xi;
    sum_iterates += y + gamma * score;
  }
  const auto count = static_cast<double>(n);
  out.xi_bar = sum_xi / count;
  out.averaged = sum_iterates / count;
  out.residual = out.averaged - true_quantile - out.xi_bar / density_at_quantile;
  return out;
}

RemainderBound remainder_rho(double y, double q, std::int64_t k, const ScheduleConfig& cfg,
                             const CdfFn& cdf, double density_at_quantile,
                             double density_sup) {
  if (!std::isfinite(y) || !std::isfinite(q))
    throw InputError("remainder_rho: y and q must be finite");
  if (!(density_sup > 0.0)) throw InputError("remainder_rho: density_sup must be positive");
  validate_schedule(cfg);
  const double gamma = learning_rate(cfg, k);
  const double width = cfg.a * gamma;
  const double smoothed_cdf = window_mean_cdf(cdf, y - width, y + width);
  RemainderBound out;
  out.rho = (cdf(q) - smoothed_cdf) + density_at_quantile * (y - q);
  out.bound = 2.0 * cfg.a * density_sup * gamma + density_sup * (y - q) * (y - q);
  return out;
}

}  // namespace quantstream
