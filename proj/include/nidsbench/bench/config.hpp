#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "nidsbench/evaluator.hpp"
#include "nidsbench/learners.hpp"
#include "nidsbench/pipelines.hpp"
#include "nidsbench/splitter.hpp"
#include "nidsbench/threats.hpp"

namespace nidsbench::bench {

/// Repetitions as E draws x T draws. A flat count N is N x 1: every trial
/// draws a fresh E and a fresh T.
struct RepetitionPlan {
  std::size_t eval_draws = 1;
  std::size_t train_draws = 1;

  std::size_t trials() const { return eval_draws * train_draws; }
  bool operator==(const RepetitionPlan&) const = default;
};

struct Repetitions {
  RepetitionPlan limited{1000, 1};
  RepetitionPlan other{100, 1};
  RepetitionPlan temporal{1, 1};

  /// "full" (1000 / 100 / 1) or "sweet_spot" (10x10 for Limited, 3x3 otherwise).
  static Repetitions preset(std::string_view name);
  RepetitionPlan plan(const AvailabilityLevel& a, Regime r) const;
};

struct DatasetRef {
  std::filesystem::path spec;
  std::filesystem::path data;
};

struct HardwareSettings {
  std::map<std::string, std::string> overrides;
  /// Keep running when the probed CPU string is not specific enough; the
  /// descriptor is then stored with verified = false.
  bool allow_unverified = false;
};

struct CampaignConfig {
  std::vector<DatasetRef> datasets;
  std::vector<LearnerKind> algorithms;
  std::vector<PipelineKind> pipelines;
  std::vector<AvailabilityLevel> availabilities;
  std::vector<FeatureSet> feature_sets;
  std::vector<Regime> regimes;
  std::vector<Scenario> scenarios;
  Repetitions repetitions;
  std::uint64_t master_seed = 0;
  int workers = 1;
  /// Runtime tables need trials to run one at a time with the whole pool.
  bool authoritative_timing = true;
  Hyperparams hyperparams;
  PerturbationRule perturbation;
  HardwareSettings hardware;
  std::filesystem::path output_dir;

  /// Throws Error listing every problem.
  void validate() const;
  /// Canonical JSON; paths are written as given.
  std::string to_json() const;
  /// Relative dataset and output paths resolve against `base_dir`.
  static CampaignConfig from_json(std::string_view text, const std::filesystem::path& base_dir = {});
  static CampaignConfig load(const std::filesystem::path& path);
};

}  // namespace nidsbench::bench
