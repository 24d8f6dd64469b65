#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "quantstream/errors.hpp"
#include "quantstream/rng.hpp"
#include "quantstream/score.hpp"

using namespace quantstream;

TEST_CASE("ramp_score piecewise values") {
  CHECK(ramp_score(1.5) == 1.0);
  CHECK(ramp_score(1.0) == 1.0);
  CHECK(ramp_score(0.0) == 0.5);
  CHECK(ramp_score(-1.0) == 0.0);
  CHECK(ramp_score(-1.0000001) == 0.0);
  CHECK(ramp_score(0.5) == 0.75);
  CHECK(ramp_score(-0.5) == 0.25);
}

TEST_CASE("ramp_score rejects non-finite input") {
  CHECK_THROWS_AS(ramp_score(std::numeric_limits<double>::quiet_NaN()), InputError);
  CHECK_THROWS_AS(ramp_score(std::numeric_limits<double>::infinity()), InputError);
  CHECK_THROWS_AS(ramp_score(-std::numeric_limits<double>::infinity()), InputError);
}

TEST_CASE("ramp_score_scaled values and domain") {
  CHECK(ramp_score_scaled(0.5, 0.5) == 1.0);
  CHECK(ramp_score_scaled(0.0, 2.0) == 0.5);
  CHECK(ramp_score_scaled(-0.25, 0.5) == 0.25);
  CHECK_THROWS_AS(ramp_score_scaled(0.0, 0.0), InputError);
  CHECK_THROWS_AS(ramp_score_scaled(0.0, -1.0), InputError);
  CHECK_THROWS_AS(ramp_score_scaled(0.0, std::numeric_limits<double>::infinity()),
                  InputError);
}

TEST_CASE("ramp_score is monotone, bounded, and antisymmetric around 0") {
  auto engine = make_stream(7, 0);
  std::uniform_real_distribution<double> wide(-3.0, 3.0);
  for (int trial = 0; trial < 2000; ++trial) {
    double x = wide(engine);
    double y = wide(engine);
    if (x > y) std::swap(x, y);
    const double gx = ramp_score(x);
    const double gy = ramp_score(y);
    CHECK(gx <= gy);
    CHECK(gx >= 0.0);
    CHECK(gy <= 1.0);
    if (std::abs(x) <= 1.0)
      CHECK(ramp_score(x) == doctest::Approx(1.0 - ramp_score(-x)).epsilon(1e-15));
  }
}

TEST_CASE("ramp_score_scaled Lipschitz constant 1/(2 width)") {
  auto engine = make_stream(11, 0);
  std::uniform_real_distribution<double> wide(-4.0, 4.0);
  std::uniform_real_distribution<double> widths(0.05, 3.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double x = wide(engine);
    const double y = wide(engine);
    const double width = widths(engine);
    const double lhs = std::abs(ramp_score_scaled(x, width) - ramp_score_scaled(y, width));
    CHECK(lhs <= std::abs(x - y) / (2.0 * width) + 1e-15);
  }
}

TEST_CASE("learning_rate follows the power law") {
  ScheduleConfig cfg;
  cfg.c_gamma = 1.0;
  cfg.beta = 0.7;
  CHECK(learning_rate(cfg, 1) == 1.0);
  CHECK(learning_rate(cfg, 100) == doctest::Approx(0.039810717055349725).epsilon(1e-14));
  cfg.c_gamma = 0.5;
  CHECK(learning_rate(cfg, 1) == 0.5);
  CHECK_THROWS_AS(learning_rate(cfg, 0), InputError);
  CHECK_THROWS_AS(learning_rate(cfg, -3), InputError);
}

TEST_CASE("learning_rate is strictly decreasing and width scales with a") {
  ScheduleConfig cfg;
  cfg.c_gamma = 2.0;
  cfg.beta = 0.6;
  cfg.a = 1.5;
  for (std::int64_t k = 1; k < 200; ++k)
    CHECK(learning_rate(cfg, k + 1) < learning_rate(cfg, k));
  CHECK(smoothing_width(cfg, 10) == doctest::Approx(1.5 * learning_rate(cfg, 10)));
}

TEST_CASE("validate_schedule enforces hard ranges") {
  ScheduleConfig good;
  CHECK(validate_schedule(good).empty());

  ScheduleConfig bad = good;
  bad.c_gamma = 0.0;
  CHECK_THROWS_AS(validate_schedule(bad), ConfigError);
  bad = good;
  bad.c_gamma = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(validate_schedule(bad), ConfigError);
  bad = good;
  bad.beta = 0.5;
  CHECK_THROWS_AS(validate_schedule(bad), ConfigError);
  bad = good;
  bad.beta = 1.0;
  CHECK_THROWS_AS(validate_schedule(bad), ConfigError);
  bad = good;
  bad.a = 0.5;
  CHECK_THROWS_AS(validate_schedule(bad), ConfigError);
  bad = good;
  bad.a = 0.51;
  CHECK_NOTHROW(validate_schedule(bad));
}

TEST_CASE("validate_schedule flags decay exponents beyond the strict range") {
  ScheduleConfig cfg;
  cfg.beta = 0.85;
  const auto warnings = validate_schedule(cfg);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("beta") != std::string::npos);

  cfg.beta = kBetaStrictUpper;  // boundary is included in the warning region
  CHECK(validate_schedule(cfg).size() == 1);
  cfg.beta = 0.8;
  CHECK(validate_schedule(cfg).empty());
}
