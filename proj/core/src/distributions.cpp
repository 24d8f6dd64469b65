#include "quantstream/distributions.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <charconv>
#include <cmath>

#include "quantstream/errors.hpp"

namespace quantstream {

namespace {

const boost::math::normal_distribution<double>& std_normal() {
  static const boost::math::normal_distribution<double> dist(0.0, 1.0);
  return dist;
}

void check_level(double p, const char* who) {
  if (!(p > 0.0) || !(p < 1.0))
    throw InputError(std::string(who) + ": probability must lie in (0, 1)");
}

void check_df(double df) {
  if (!(df > 0.0) || !std::isfinite(df))
    throw ConfigError("student_t: degrees of freedom must be positive and finite");
}

}  // namespace

double normal_pdf(double x) { return boost::math::pdf(std_normal(), x); }

double normal_cdf(double x) { return boost::math::cdf(std_normal(), x); }

double normal_quantile(double p) {
  check_level(p, "normal_quantile");
  return boost::math::quantile(std_normal(), p);
}

double student_t_pdf(double x, double df) {
  check_df(df);
  return boost::math::pdf(boost::math::students_t_distribution<double>(df), x);
}

double student_t_cdf(double x, double df) {
  check_df(df);
  return boost::math::cdf(boost::math::students_t_distribution<double>(df), x);
}

double student_t_quantile(double p, double df) {
  check_df(df);
  check_level(p, "student_t_quantile");
  return boost::math::quantile(boost::math::students_t_distribution<double>(df), p);
}

Distribution standard_normal_distribution() {
  Distribution d;
  d.name = "normal";
  d.pdf = [](double x) { return normal_pdf(x); };
  d.cdf = [](double x) { return normal_cdf(x); };
  d.quantile = [](double p) { return normal_quantile(p); };
  d.sample = [](std::mt19937_64& engine) {
    std::normal_distribution<double> draw(0.0, 1.0);
    return draw(engine);
  };
  return d;
}

Distribution student_t_distribution(double df) {
  check_df(df);
  Distribution d;
  d.name = "t" + std::to_string(static_cast<long long>(df));
  d.pdf = [df](double x) { return student_t_pdf(x, df); };
  d.cdf = [df](double x) { return student_t_cdf(x, df); };
  d.quantile = [df](double p) { return student_t_quantile(p, df); };
  d.sample = [df](std::mt19937_64& engine) {
    std::student_t_distribution<double> draw(df);
    return draw(engine);
  };
  return d;
}

Distribution distribution_by_name(const std::string& name) {
  if (name == "normal" || name == "gaussian") return standard_normal_distribution();
  if (name.size() > 1 && name.front() == 't') {
    double df = 0.0;
    const char* first = name.data() + 1;
    const char* last = name.data() + name.size();
    auto [ptr, ec] = std::from_chars(first, last, df);
    if (ec == std::errc() && ptr == last && df > 0.0) return student_t_distribution(df);
  }
  throw ConfigError("unknown distribution '" + name + "' (expected 'normal' or 't<df>')");
}

}  // namespace quantstream
