#pragma once

#include <string>

#include "nidsbench/evaluator.hpp"

namespace nidsbench::bench {

/// One JSON object on a single line.
std::string record_to_json(const TrialRecord& r);
TrialRecord record_from_json(std::string_view line);

/// Record without wall times, with a fixed key order; input to the store hash.
std::string canonical_record(const TrialRecord& r);

/// Availability as written in tables and keys: "Scarce(0.15)", "Limited(100)"
/// for non-default parameters, otherwise the bare level name.
std::string availability_label(const AvailabilityLevel& a);

/// Ledger entry a record belongs to: dataset, availability, feature set,
/// pipeline and learner.
std::string ledger_key(const TrialFactors& f);

/// One split draw: dataset, availability, regime and trial index.
std::string trial_key(const TrialFactors& f);

/// Factors shared by every trial of one table cell (no trial, seed or split).
std::string cell_key(const TrialFactors& f);

}  // namespace nidsbench::bench
