#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "nidsbench/common.hpp"

namespace nidsbench {

/// Binary detection rates. An empty denominator yields a rate of 0 and sets
/// the matching `*_undefined` flag.
struct Metrics {
  double tpr = 0.0;
  double fpr = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  bool tpr_undefined = false;
  bool fpr_undefined = false;

  // Family classification (MD / BMD only).
  std::optional<double> acc_mal;
  std::optional<double> acc_mal_strict;
};

/// `y_true` may hold family ids (> 0 is malicious); `y_pred` is read the same way.
Metrics binary_metrics(std::span<const ClassId> y_true, std::span<const ClassId> y_pred);

enum class FamilyScheme { MD, BMD };

struct FamilyAccuracy {
  double acc = 0.0;         // over the scheme's denominator
  double acc_strict = 0.0;  // over every true-malicious row
  std::size_t denominator = 0;
  bool undefined = false;
};

/// `families` holds predicted family ids with kBenign as the "not malicious"
/// sentinel. For BMD the denominator is the true-malicious rows whose
/// `detected` entry is non-zero; for MD it is every true-malicious row.
FamilyAccuracy malicious_accuracy(FamilyScheme scheme, std::span<const ClassId> y_true,
                                  std::span<const ClassId> families, std::span<const ClassId> detected);

}  // namespace nidsbench
