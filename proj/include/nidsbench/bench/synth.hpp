#pragma once

#include <cstdint>
#include <iosfwd>

#include "nidsbench/flowstore.hpp"

namespace nidsbench::bench {

struct SurrogateOptions {
  std::size_t rows = 20'000;
  std::uint64_t seed = 1;
};

/// Writes a synthetic CICFlowMeter-style CSV with the columns of `spec` (plus
/// Flow ID, IPs and Timestamp) and the class proportions of the public GTCS
/// release. Flows are simulated packet by packet so every statistic is
/// internally consistent. It stands in for the real capture when that is not
/// available; it carries no claim of matching its detection difficulty.
void write_gtcs_surrogate(const DatasetSpec& spec, std::ostream& out, const SurrogateOptions& options = {});

}  // namespace nidsbench::bench
