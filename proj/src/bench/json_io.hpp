#pragma once

#include "json.hpp"
#include "nidsbench/evaluator.hpp"
#include "nidsbench/splitter.hpp"

namespace nidsbench::bench::io {

using nlohmann::json;

json availability_to_json(const AvailabilityLevel& a);
/// Accepts a bare level name or {level, fraction, per_class}.
AvailabilityLevel availability_from_json(const json& j);

json metrics_to_json(const Metrics& m);
Metrics metrics_from_json(const json& j);

/// `with_timing` false drops wall times, giving the hashed canonical form.
json record_to_json(const TrialRecord& r, bool with_timing = true);
TrialRecord record_from_json(const json& j);

}  // namespace nidsbench::bench::io
