#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nidsbench {

struct TreeParams {
  std::size_t max_depth = 0;  // 0 = unbounded
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
};

struct ForestParams {
  std::size_t n_trees = 100;
  bool bootstrap = true;
  std::size_t features_per_split = 0;  // 0 = ceil(sqrt(p))
  TreeParams tree;
};

/// Binary-split classification tree over raw feature values; a row goes left
/// when value <= threshold. Leaves hold an index into the model's class list.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int leaf_class = 0;
};

struct TreeModel {
  std::vector<TreeNode> nodes;

  int predict_index(std::span<const double> row) const {
    int n = 0;
    while (nodes[n].feature >= 0) {
      n = row[nodes[n].feature] <= nodes[n].threshold ? nodes[n].left : nodes[n].right;
    }
    return nodes[n].leaf_class;
  }
  std::size_t depth() const;
  std::size_t leaf_count() const;
};

struct ForestModel {
  std::vector<TreeModel> trees;
  std::size_t n_classes = 0;

  /// Majority vote; ties go to the lowest class index.
  int predict_index(std::span<const double> row) const;
};

/// Column-major training matrix shared by tree learners.
struct ColumnMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // values[c * rows + r]

  double at(std::size_t r, std::size_t c) const { return values[c * rows + r]; }
};

/// Grows one CART tree (Gini) over `samples` (row ids into `x`, duplicates
/// allowed). `features_per_split` >= cols evaluates every feature in natural
/// order, so results do not depend on `seed`.
TreeModel grow_tree(const ColumnMatrix& x, std::span<const int> labels, std::size_t n_classes,
                    std::vector<std::size_t> samples, const TreeParams& params,
                    std::size_t features_per_split, std::uint64_t seed);

ForestModel grow_forest(const ColumnMatrix& x, std::span<const int> labels, std::size_t n_classes,
                        const ForestParams& params, std::uint64_t seed, int workers);

}  // namespace nidsbench
