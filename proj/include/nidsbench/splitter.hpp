#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nidsbench/common.hpp"
#include "nidsbench/flowstore.hpp"

namespace nidsbench {

enum class Availability { Limited, Scarce, Moderate, Abundant };
enum class Regime { Static, Temporal };

std::string_view to_string(Availability a);
Availability availability_from_string(std::string_view s);
std::string_view to_string(Regime r);
Regime regime_from_string(std::string_view s);

/// Training budget. Fractions are of the capped dataset D; Limited draws a
/// fixed count per class instead.
struct AvailabilityLevel {
  Availability kind = Availability::Abundant;
  double scarce_fraction = 0.15;
  std::size_t limited_per_class = 100;

  static AvailabilityLevel limited() { return {Availability::Limited}; }
  static AvailabilityLevel scarce(double fraction = 0.15) { return {Availability::Scarce, fraction}; }
  static AvailabilityLevel moderate() { return {Availability::Moderate}; }
  static AvailabilityLevel abundant() { return {Availability::Abundant}; }

  /// Fraction of D used for training; unused for Limited.
  double train_fraction() const;
  void validate() const;
};

inline constexpr double kEvalFraction = 0.2;

using ClassIndexSets = std::map<ClassId, std::vector<std::size_t>>;

struct TrialSplit {
  ClassIndexSets train_idx;  // per class, sorted record indices
  ClassIndexSets eval_idx;   // per class, sorted record indices
  std::uint64_t seed = 0;
  AvailabilityLevel availability;
  Regime regime = Regime::Static;
  std::optional<ClassId> excluded_class;
  std::vector<std::string> warnings;
  /// Temporal only: per class, number of samples between the last training
  /// sample and the first evaluation sample.
  std::map<ClassId, std::size_t> temporal_gap;

  std::vector<std::size_t> train_rows() const;  // all classes, sorted
  std::vector<std::size_t> eval_rows() const;   // all classes, sorted
  std::size_t train_count(ClassId c) const;
  std::size_t eval_count(ClassId c) const;

  /// Stable hex digest of the index sets, seed, level and regime.
  std::string id() const;
  /// Audit manifest: class -> {train: [...], eval: [...]} as JSON text.
  std::string manifest_json() const;
};

/// Number of evaluation samples for a class of size n: floor(0.2 n).
std::size_t eval_size(std::size_t n);
/// Number of training samples for a class of size n under `a`.
std::size_t train_size(std::size_t n, const AvailabilityLevel& a, std::size_t remaining);

TrialSplit static_split(const Dataset& d, const AvailabilityLevel& a, std::uint64_t seed);
/// Independent seeds for E and T support nested (E x T) repetition schemes.
TrialSplit static_split(const Dataset& d, const AvailabilityLevel& a, std::uint64_t eval_seed,
                        std::uint64_t train_seed);
TrialSplit temporal_split(const Dataset& d, const AvailabilityLevel& a);
TrialSplit exclude_class(const TrialSplit& s, ClassId c);

}  // namespace nidsbench
