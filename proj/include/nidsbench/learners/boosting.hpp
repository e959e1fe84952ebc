#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nidsbench {

struct BoostingParams {
  std::size_t n_iter = 100;
  double learning_rate = 0.1;
  std::size_t max_bins = 255;
  std::size_t max_leaf_nodes = 31;
  std::size_t min_samples_leaf = 20;
  double l2_regularization = 0.0;
};

/// Equal-frequency binning fitted on training data. Bin b holds values v with
/// thresholds[b-1] < v <= thresholds[b]; the last bin is unbounded above.
class FeatureBinner {
 public:
  static FeatureBinner fit(std::span<const double> values, std::size_t max_bins);

  std::uint8_t bin(double v) const;
  std::size_t n_bins() const { return thresholds_.size() + 1; }
  const std::vector<double>& thresholds() const { return thresholds_; }
  /// A value that maps back to bin b.
  double representative(std::size_t b) const;

 private:
  std::vector<double> thresholds_;
  double max_value_ = 0.0;
};

struct BoostedNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output, learning rate already applied
};

struct BoostedTree {
  std::vector<BoostedNode> nodes;
  double predict(std::span<const double> row) const;
  std::size_t leaf_count() const;
};

/// Gradient-boosted trees with logistic (2 classes) or softmax (K > 2) loss;
/// softmax grows one tree per class per iteration.
struct BoostedModel {
  std::size_t n_classes = 0;
  std::vector<double> baseline;               // 1 entry (binary) or K
  std::vector<std::vector<BoostedTree>> trees;  // [iteration][tree per score]
  std::vector<double> train_loss;             // mean log-loss after each iteration

  std::vector<double> raw_scores(std::span<const double> row) const;
  int predict_index(std::span<const double> row) const;
};

/// `x` is row-major n x p; `labels` are class indices in [0, n_classes).
BoostedModel fit_boosting(std::span<const double> x, std::size_t n, std::size_t p,
                          std::span<const int> labels, std::size_t n_classes,
                          const BoostingParams& params, int workers);

}  // namespace nidsbench
