#pragma once

#include <functional>
#include <optional>
#include <string>

#include "nidsbench/bench/config.hpp"
#include "nidsbench/bench/store.hpp"

namespace nidsbench::bench {

struct RunControl {
  /// Stop cleanly after this many newly completed trials (interruption tests).
  std::optional<std::size_t> stop_after_trials;
  /// Keep the complete trials already in the output directory.
  bool resume = false;
  std::function<void(const std::string&)> log;
};

/// Every (dataset x availability x regime x trial) draws one split; every
/// (feature set x algorithm x pipeline) is trained on it and evaluated under
/// every selected scenario. Trials are persisted as they finish.
ResultStore run_campaign(const CampaignConfig& cfg, const RunControl& control = {});

}  // namespace nidsbench::bench
