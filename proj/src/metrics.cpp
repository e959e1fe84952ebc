#include "nidsbench/metrics.hpp"

namespace nidsbench {

Metrics binary_metrics(std::span<const ClassId> y_true, std::span<const ClassId> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw Error("binary_metrics: " + std::to_string(y_true.size()) + " labels vs " + std::to_string(y_pred.size()) +
                " predictions");
  }
  Metrics m;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool pos = y_true[i] != kBenign;
    const bool hit = y_pred[i] != kBenign;
    if (pos) {
      ++m.n_pos;
      m.tp += hit;
    } else {
      ++m.n_neg;
      m.fp += hit;
    }
  }
  m.tpr_undefined = m.n_pos == 0;
  m.fpr_undefined = m.n_neg == 0;
  m.tpr = m.tpr_undefined ? 0.0 : static_cast<double>(m.tp) / static_cast<double>(m.n_pos);
  m.fpr = m.fpr_undefined ? 0.0 : static_cast<double>(m.fp) / static_cast<double>(m.n_neg);
  return m;
}

FamilyAccuracy malicious_accuracy(FamilyScheme scheme, std::span<const ClassId> y_true,
                                  std::span<const ClassId> families, std::span<const ClassId> detected) {
  if (y_true.size() != families.size() || y_true.size() != detected.size()) {
    throw Error("malicious_accuracy: vectors are not aligned");
  }
  std::size_t mal = 0, mal_correct = 0, passed = 0, passed_correct = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] == kBenign) continue;
    const bool correct = families[i] == y_true[i];
    ++mal;
    mal_correct += correct;
    if (detected[i] != kBenign) {
      ++passed;
      passed_correct += correct;
    }
  }
  auto rate = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  FamilyAccuracy out;
  out.acc_strict = rate(mal_correct, mal);
  if (scheme == FamilyScheme::MD) {
    out.acc = out.acc_strict;
    out.denominator = mal;
  } else {
    out.acc = rate(passed_correct, passed);
    out.denominator = passed;
  }
  out.undefined = out.denominator == 0;
  return out;
}

}  // namespace nidsbench
