#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nidsbench/flowstore.hpp"
#include "nidsbench/pipelines.hpp"

namespace nidsbench {

enum class PerturbMode { Duration, Bytes, Both, Packets };

std::string_view to_string(PerturbMode m);
PerturbMode perturb_mode_from_string(std::string_view s);

/// Black-box evasion by small increases of flow duration and/or bytes. One
/// increment per enabled field is drawn per row.
struct PerturbationRule {
  std::vector<double> duration_increments{1, 2, 5};                // seconds
  std::vector<double> byte_increments{1, 8, 64, 128, 512, 1024};  // bytes
  std::vector<double> packet_increments{1};                        // exploration only
  double mtu = 1500;
  std::optional<double> max_flow_duration;  // seconds; falls back to the dataset value
  PerturbMode mode = PerturbMode::Both;

  /// Zero increments are accepted (they give the identity perturbation).
  void validate() const;
  std::string to_json() const;
  static PerturbationRule from_json(std::string_view text);
};

/// Malicious, UDP, and sent from an internal source host.
std::vector<std::size_t> eligible(const Dataset& d, std::span<const std::size_t> eval_rows);

/// Perturbed copies of `rows`. Throws if `attacked` (the detector's feature
/// set) contains a feature whose reaction to the change is not computable.
std::vector<FlowRecord> perturb(const Dataset& d, std::span<const std::size_t> rows, const PerturbationRule& rule,
                                std::uint64_t seed, FeatureSet attacked = FeatureSet::Essential);

/// Independent realizability check of one perturbed row against its original.
/// Returns a list of violations (empty when the row is realizable).
std::vector<std::string> verify_perturbation(const Dataset& d, const FlowRecord& original,
                                             const FlowRecord& perturbed, const PerturbationRule& rule);

struct AdvResult {
  std::size_t n_eligible = 0;
  double tpr_org = 0.0;
  double tpr_adv = 0.0;
  bool success = false;
};

/// `clean` and `adv` hold the same eligible rows (row-aligned).
AdvResult assess_robustness(const TrainedPipeline& p, const FeatureView& clean, const FeatureView& adv);

}  // namespace nidsbench
