#pragma once

#include <string>

#include "quantstream/sgd_quantile.hpp"

namespace quantstream {

// Self-describing checkpoint of a streaming estimator: format tag,
// version, schedule, grid, initial values, step, and both iterate
// matrices. Doubles survive a round trip exactly.
std::string snapshot_to_json(const QuantileEstimator& est);

// Parses and validates a snapshot; throws InputError on malformed JSON,
// missing fields, unknown versions, or invariant violations.
QuantileEstimator estimator_from_snapshot(const std::string& json_text);

}  // namespace quantstream
