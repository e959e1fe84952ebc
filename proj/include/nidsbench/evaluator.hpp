#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nidsbench/metrics.hpp"
#include "nidsbench/pipelines.hpp"
#include "nidsbench/threats.hpp"

namespace nidsbench {

enum class Scenario { Closed, Unknown, Adversarial };

std::string_view to_string(Scenario s);
Scenario scenario_from_string(std::string_view s);

struct TrialFactors {
  std::string dataset;
  LearnerKind algorithm = LearnerKind::DT;
  PipelineKind pipeline = PipelineKind::BD;
  AvailabilityLevel availability;
  FeatureSet feature_set = FeatureSet::Complete;
  Regime regime = Regime::Static;
  Scenario scenario = Scenario::Closed;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::string split_id;
};

struct TrialRecord {
  TrialFactors factors;
  Metrics metrics;
  std::optional<AdvResult> adversarial;
  /// Unknown scenario: one entry per excluded class. EDr: one per specialist.
  std::map<ClassId, Metrics> per_class;
  double train_wall_seconds = 0.0;
  double infer_wall_seconds = 0.0;
  int train_workers = 1;
  int infer_workers = 1;
  bool skipped = false;
  std::string skip_reason;
  // Adversarial scenario: realizability checks over every perturbed row.
  std::size_t verified_rows = 0;
  std::size_t verifier_failures = 0;
  std::vector<std::string> verifier_messages;  // first few failures
};

/// Closed world: detect on all of E. MD/BMD also get family accuracy; EDr is
/// scored with its redundant per-family evaluation.
TrialRecord run_closed(const TrainedPipeline& p, const TrialSplit& split, const Dataset& d, const FeatureView& view);

/// Leave-one-attack-out: retrain without each malicious class in turn; tpr on
/// that class's E rows and fpr on benign E, averaged over the classes.
TrialRecord run_unknown(PipelineKind kind, const LearnerConfig& learner, const TrialSplit& split, const Dataset& d,
                        const FeatureView& view, const PipelineOptions& options = {});

/// Perturb the eligible malicious E rows and compare detection before/after.
TrialRecord run_adversarial(const TrainedPipeline& p, const TrialSplit& split, const Dataset& d,
                            const FeatureView& view, const PerturbationRule& rule, std::uint64_t seed);

}  // namespace nidsbench
