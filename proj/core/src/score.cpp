#include "quantstream/score.hpp"

#include <sstream>

namespace quantstream {

std::vector<std::string> validate_schedule(const ScheduleConfig& cfg) {
  if (!(cfg.c_gamma > 0.0) || !std::isfinite(cfg.c_gamma))
    throw ConfigError("schedule: c_gamma must be positive and finite");
  if (!(cfg.beta > 0.5) || !(cfg.beta < 1.0))
    throw ConfigError("schedule: beta must lie in the open interval (0.5, 1)");
  if (!(cfg.a > 0.5) || !std::isfinite(cfg.a))
    throw ConfigError("schedule: smoothing multiple a must exceed 0.5");

  std::vector<std::string> warnings;
  if (cfg.beta >= kBetaStrictUpper) {
    std::ostringstream msg;
    msg << "schedule: beta = " << cfg.beta << " is at or above (1+sqrt(5))/4 ~ 0.809; "
        << "the Gaussian approximation behind critical values weakens there and "
        << "test sizes tend to inflate";
    warnings.push_back(msg.str());
  }
  return warnings;
}

}  // namespace quantstream
