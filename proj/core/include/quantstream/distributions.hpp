#pragma once

#include <functional>
#include <random>
#include <string>

namespace quantstream {

double normal_pdf(double x);
double normal_cdf(double x);
// p strictly inside (0,1); throws InputError otherwise.
double normal_quantile(double p);

double student_t_pdf(double x, double df);
double student_t_cdf(double x, double df);
double student_t_quantile(double p, double df);

// A scalar law bundled with everything the oracle and the experiment
// harness need: exact pdf/cdf/quantile plus a sampler. The quantile and
// distribution functions are accurate to well below 1e-8 over the ranges
// used here.
struct Distribution {
  std::string name;
  std::function<double(double)> pdf;
  std::function<double(double)> cdf;
  std::function<double(double)> quantile;
  std::function<double(std::mt19937_64&)> sample;
};

Distribution standard_normal_distribution();
Distribution student_t_distribution(double df);

// Parses "normal" or "t<df>" (e.g. "t10"); throws ConfigError otherwise.
Distribution distribution_by_name(const std::string& name);

}  // namespace quantstream
