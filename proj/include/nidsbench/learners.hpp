#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nidsbench/common.hpp"
#include "nidsbench/flowstore.hpp"
#include "nidsbench/learners/boosting.hpp"
#include "nidsbench/learners/logistic.hpp"
#include "nidsbench/learners/tree.hpp"

namespace nidsbench {

enum class LearnerKind { DT, RF, LR, HGB };

std::string_view to_string(LearnerKind k);
LearnerKind learner_kind_from_string(std::string_view s);

/// Per-kind hyperparameters. Defaults follow the usual reference-library
/// defaults; every campaign records the full set.
struct Hyperparams {
  TreeParams dt;
  ForestParams rf;
  LogisticParams lr;
  BoostingParams hgb;

  void validate() const;
  std::string to_json() const;
  static Hyperparams from_json(std::string_view text);
};

struct LearnerConfig {
  LearnerKind kind = LearnerKind::DT;
  Hyperparams hyper;
};

struct FitOptions {
  std::uint64_t seed = 0;
  int workers = 1;
  /// A single distinct label yields a constant model instead of an error.
  bool allow_single_class = false;
};

struct ConstantModel {
  ClassId label = kBenign;
};

using ModelParams = std::variant<ConstantModel, TreeModel, ForestModel, LogisticModel, BoostedModel>;

/// Immutable fitted model. Predicts only labels from `classes`.
class TrainedModel {
 public:
  TrainedModel(LearnerConfig config, std::vector<std::string> schema, std::vector<ClassId> classes,
               ModelParams params, double fit_wall_seconds, int fit_cpu_core_count);

  LearnerKind kind() const { return config_.kind; }
  const LearnerConfig& config() const { return config_; }
  const std::vector<std::string>& schema() const { return schema_; }
  const std::vector<ClassId>& classes() const { return classes_; }
  const ModelParams& params() const { return params_; }
  bool is_constant() const { return std::holds_alternative<ConstantModel>(params_); }
  double fit_wall_seconds() const { return fit_wall_seconds_; }
  int fit_cpu_core_count() const { return fit_cpu_core_count_; }

  /// Single-threaded inference over every row of `view`.
  std::vector<ClassId> predict(const FeatureView& view) const;
  ClassId predict_row(std::span<const double> row) const;

  /// Throws Error naming the offending columns if `view` differs from the
  /// training schema.
  void check_schema(const FeatureView& view) const;

 private:
  LearnerConfig config_;
  std::vector<std::string> schema_;
  std::vector<ClassId> classes_;
  ModelParams params_;
  double fit_wall_seconds_ = 0.0;
  int fit_cpu_core_count_ = 1;
};

/// Trains on the listed rows of `view` with labels `y` (aligned with `rows`).
TrainedModel fit(const LearnerConfig& config, const FeatureView& view, std::span<const std::size_t> rows,
                 std::span<const ClassId> y, const FitOptions& options = {});
/// Trains on every row of `view`.
TrainedModel fit(const LearnerConfig& config, const FeatureView& view, std::span<const ClassId> y,
                 const FitOptions& options = {});

std::vector<ClassId> predict(const TrainedModel& model, const FeatureView& view);

/// Versioned text artifact ("nidsbench-model/1", JSON).
std::string serialize_model(const TrainedModel& model);
TrainedModel deserialize_model(std::string_view text);

}  // namespace nidsbench
