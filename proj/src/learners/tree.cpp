#include "nidsbench/learners/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nidsbench/parallel.hpp"
#include "nidsbench/rng.hpp"

namespace nidsbench {

std::size_t TreeModel::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  std::size_t best = 0;
  while (!stack.empty()) {
    auto [n, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (nodes[n].feature >= 0) {
      stack.emplace_back(nodes[n].left, d + 1);
      stack.emplace_back(nodes[n].right, d + 1);
    }
  }
  return best;
}

std::size_t TreeModel::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

int ForestModel::predict_index(std::span<const double> row) const {
  std::vector<std::size_t> votes(n_classes, 0);
  for (const auto& t : trees) ++votes[static_cast<std::size_t>(t.predict_index(row))];
  // max_element returns the first maximum, i.e. the lowest class index.
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

namespace {

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double score = -1.0;  // sum over children of (sum_k count_k^2) / size
};

struct Frame {
  std::size_t begin;
  std::size_t end;
  std::size_t depth;
  int node;
};

int majority(std::span<const std::size_t> counts) {
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

}  // namespace

TreeModel grow_tree(const ColumnMatrix& x, std::span<const int> labels, std::size_t n_classes,
                    std::vector<std::size_t> samples, const TreeParams& params,
                    std::size_t features_per_split, std::uint64_t seed) {
  TreeModel tree;
  if (samples.empty()) {
    tree.nodes.push_back(TreeNode{});
    return tree;
  }
  Rng rng(seed);
  const std::size_t p = x.cols;
  const bool all_features = features_per_split >= p;
  std::vector<std::size_t> feature_order(p);
  std::iota(feature_order.begin(), feature_order.end(), 0);

  std::vector<std::pair<double, int>> buf;
  buf.reserve(samples.size());
  std::vector<std::size_t> total(n_classes), left(n_classes), right(n_classes);

  tree.nodes.push_back(TreeNode{});
  std::vector<Frame> stack{{0, samples.size(), 0, 0}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    const std::size_t n = f.end - f.begin;

    std::fill(total.begin(), total.end(), 0);
    for (std::size_t i = f.begin; i < f.end; ++i) ++total[labels[samples[i]]];
    const int leaf_class = majority(total);
    tree.nodes[f.node].leaf_class = leaf_class;

    const bool pure = total[leaf_class] == n;
    const bool depth_capped = params.max_depth > 0 && f.depth >= params.max_depth;
    if (pure || depth_capped || n < params.min_samples_split || n < 2 * params.min_samples_leaf) continue;

    if (!all_features) rng.shuffle(std::span<std::size_t>(feature_order));
    const std::size_t n_try = all_features ? p : features_per_split;

    SplitCandidate best;
    // Like the reference CART implementation, keep drawing features past
    // n_try until at least one valid split exists.
    for (std::size_t fi = 0; fi < p && (fi < n_try || best.feature < 0); ++fi) {
      const std::size_t feat = feature_order[fi];
      buf.clear();
      for (std::size_t i = f.begin; i < f.end; ++i) buf.emplace_back(x.at(samples[i], feat), labels[samples[i]]);
      std::sort(buf.begin(), buf.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (buf.front().first == buf.back().first) continue;

      std::fill(left.begin(), left.end(), 0);
      std::copy(total.begin(), total.end(), right.begin());
      double sq_left = 0.0;
      double sq_right = 0.0;
      for (auto c : total) sq_right += static_cast<double>(c) * static_cast<double>(c);
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const int k = buf[i].second;
        sq_left += 2.0 * static_cast<double>(left[k]) + 1.0;
        sq_right -= 2.0 * static_cast<double>(right[k]) - 1.0;
        ++left[k];
        --right[k];
        if (buf[i].first == buf[i + 1].first) continue;
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        if (nl < params.min_samples_leaf || nr < params.min_samples_leaf) continue;
        const double score = sq_left / static_cast<double>(nl) + sq_right / static_cast<double>(nr);
        if (score > best.score + 1e-12) {
          best.score = score;
          best.feature = static_cast<int>(feat);
          double mid = buf[i].first + (buf[i + 1].first - buf[i].first) / 2.0;
          if (mid >= buf[i + 1].first) mid = buf[i].first;
          best.threshold = mid;
        }
      }
    }
    // Zero-gain splits are still taken: impure nodes keep splitting while any
    // feature separates their samples (XOR-like layouts need this).
    if (best.feature < 0) continue;

    auto mid = std::stable_partition(
        samples.begin() + static_cast<std::ptrdiff_t>(f.begin), samples.begin() + static_cast<std::ptrdiff_t>(f.end),
        [&](std::size_t s) { return x.at(s, static_cast<std::size_t>(best.feature)) <= best.threshold; });
    const std::size_t split = static_cast<std::size_t>(mid - samples.begin());

    const int left_node = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    const int right_node = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    TreeNode& node = tree.nodes[f.node];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left_node;
    node.right = right_node;
    stack.push_back({split, f.end, f.depth + 1, right_node});
    stack.push_back({f.begin, split, f.depth + 1, left_node});
  }
  return tree;
}

ForestModel grow_forest(const ColumnMatrix& x, std::span<const int> labels, std::size_t n_classes,
                        const ForestParams& params, std::uint64_t seed, int workers) {
  const std::size_t per_split = params.features_per_split > 0
                                    ? params.features_per_split
                                    : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x.cols))));
  ForestModel forest;
  forest.n_classes = n_classes;
  forest.trees.resize(params.n_trees);
  parallel_for(params.n_trees, workers, [&](std::size_t t) {
    const std::uint64_t tree_seed = derive_seed(seed, t);
    std::vector<std::size_t> samples(x.rows);
    if (params.bootstrap) {
      Rng rng(derive_seed(tree_seed, "bootstrap"));
      for (auto& s : samples) s = rng.below(x.rows);
    } else {
      std::iota(samples.begin(), samples.end(), 0);
    }
    forest.trees[t] = grow_tree(x, labels, n_classes, std::move(samples), params.tree, per_split,
                                derive_seed(tree_seed, "features"));
  });
  return forest;
}

}  // namespace nidsbench
