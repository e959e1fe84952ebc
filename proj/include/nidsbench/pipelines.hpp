#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "nidsbench/flowstore.hpp"
#include "nidsbench/learners.hpp"
#include "nidsbench/metrics.hpp"
#include "nidsbench/splitter.hpp"

namespace nidsbench {

enum class PipelineKind { BD, MD, BMD, EDo, EDv, EDs, EDr };

std::string_view to_string(PipelineKind k);
PipelineKind pipeline_kind_from_string(std::string_view s);
bool is_ensemble(PipelineKind k);

using ModelPtr = std::shared_ptr<const TrainedModel>;

/// What a member was trained for: "binary", "multiclass", "family",
/// "specialist" (with its class) or "stack".
struct MemberRole {
  std::string name;
  ClassId target = kBenign;
};

struct TrainedPipeline {
  PipelineKind kind = PipelineKind::BD;
  LearnerKind learner = LearnerKind::DT;
  FeatureSet feature_set = FeatureSet::Complete;
  std::vector<ModelPtr> members;
  std::vector<MemberRole> roles;  // aligned with members
  std::vector<ClassId> classes;   // classes present in the training set
  std::string split_id;
  bool deployable = true;  // false for EDr

  /// Sum of member fit times, shared members included.
  double train_wall_seconds() const;
  int train_cpu_core_count() const;
  /// Specialist members (ensembles), in class order.
  std::vector<std::size_t> specialist_members() const;
};

/// Called once per member fit with the record indices and labels it saw.
using FitAudit = std::function<void(const MemberRole&, std::span<const std::size_t> records,
                                    std::span<const ClassId> labels)>;

/// Members that different pipeline kinds can share within one trial: the
/// binary detector (BD, BMD) and the per-class specialists (EDo, EDv, EDs,
/// EDr). Keyed by split id so a cache cannot leak across splits.
class MemberCache {
 public:
  ModelPtr find(const std::string& key) const;
  void store(const std::string& key, ModelPtr m);
  std::size_t size() const { return models_.size(); }

 private:
  std::map<std::string, ModelPtr> models_;
};

struct PipelineOptions {
  FitOptions fit;
  MemberCache* cache = nullptr;
  FitAudit audit;
};

/// `view` must project `d` (rows may be any subset that covers T).
TrainedPipeline train_pipeline(PipelineKind kind, const LearnerConfig& learner, const TrialSplit& split,
                               const Dataset& d, const FeatureView& view, const PipelineOptions& options = {});

/// Binary decisions (0 benign, 1 malicious) for every row of `view`.
std::vector<ClassId> detect(const TrainedPipeline& p, const FeatureView& view);

/// Family per row, kBenign for rows judged benign. MD and BMD only.
std::vector<ClassId> classify_family(const TrainedPipeline& p, const FeatureView& view);

/// Per-specialist outputs (rows x specialists, 0/1), in class order.
std::vector<std::vector<ClassId>> specialist_votes(const TrainedPipeline& p, const FeatureView& view);

struct RedundantEvaluation {
  Metrics average;  // tpr / fpr averaged over specialists
  std::map<ClassId, Metrics> per_specialist;
  std::map<ClassId, std::vector<std::size_t>> tested_records;  // audit
};

/// EDr: specialist m is tested only on benign E plus class-m E.
RedundantEvaluation evaluate_redundant(const TrainedPipeline& p, const TrialSplit& split, const Dataset& d,
                                       const FeatureView& view);

/// Rows of `view` for the given record indices, in the given order.
FeatureView select_records(const FeatureView& view, std::span<const std::size_t> records);

}  // namespace nidsbench
