#include "nidsbench/learners/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "nidsbench/common.hpp"
#include "nidsbench/parallel.hpp"

namespace nidsbench {

// ---------------------------------------------------------------------------
// Binning

FeatureBinner FeatureBinner::fit(std::span<const double> values, std::size_t max_bins) {
  if (max_bins < 2 || max_bins > 255) throw Error("max_bins must lie in [2, 255]");
  FeatureBinner b;
  if (values.empty()) return b;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  b.max_value_ = sorted.back();
  auto midpoint = [](double lo, double hi) {
    double m = lo + (hi - lo) / 2.0;
    return m >= hi ? lo : m;
  };
  std::vector<double> distinct;
  std::unique_copy(sorted.begin(), sorted.end(), std::back_inserter(distinct));
  if (distinct.size() <= max_bins) {
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
      b.thresholds_.push_back(midpoint(distinct[i], distinct[i + 1]));
    }
    return b;
  }
  const std::size_t n = sorted.size();
  for (std::size_t j = 1; j < max_bins; ++j) {
    std::size_t idx = std::max<std::size_t>(1, j * n / max_bins);
    double t = midpoint(sorted[idx - 1], sorted[idx]);
    if (t >= b.max_value_) break;
    if (b.thresholds_.empty() || t > b.thresholds_.back()) b.thresholds_.push_back(t);
  }
  return b;
}

std::uint8_t FeatureBinner::bin(double v) const {
  return static_cast<std::uint8_t>(std::lower_bound(thresholds_.begin(), thresholds_.end(), v) -
                                   thresholds_.begin());
}

double FeatureBinner::representative(std::size_t b) const {
  if (b >= n_bins()) throw Error("bin index out of range");
  return b < thresholds_.size() ? thresholds_[b] : max_value_;
}

// ---------------------------------------------------------------------------
// Model evaluation

double BoostedTree::predict(std::span<const double> row) const {
  int n = 0;
  while (nodes[n].feature >= 0) {
    n = row[nodes[n].feature] <= nodes[n].threshold ? nodes[n].left : nodes[n].right;
  }
  return nodes[n].value;
}

std::size_t BoostedTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const BoostedNode& n) { return n.feature < 0; }));
}

std::vector<double> BoostedModel::raw_scores(std::span<const double> row) const {
  std::vector<double> s = baseline;
  for (const auto& iteration : trees) {
    for (std::size_t k = 0; k < iteration.size(); ++k) s[k] += iteration[k].predict(row);
  }
  return s;
}

int BoostedModel::predict_index(std::span<const double> row) const {
  auto s = raw_scores(row);
  if (n_classes == 2) return s[0] > 0.0 ? 1 : 0;
  return static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
}

// ---------------------------------------------------------------------------
// Training

namespace {

constexpr double kMinHessianToSplit = 1e-3;

struct HistBin {
  double g = 0.0;
  double h = 0.0;
  std::size_t count = 0;
};

struct Split {
  int feature = -1;
  int bin = -1;
  double gain = 0.0;
};

struct GrowingLeaf {
  std::size_t begin = 0;
  std::size_t end = 0;
  double g = 0.0;
  double h = 0.0;
  int node = 0;
  std::vector<HistBin> hist;  // [feature * 256 + bin]
  Split split;
};

class TreeGrower {
 public:
  TreeGrower(const std::vector<std::uint8_t>& bins, std::size_t n, std::size_t p,
             const std::vector<FeatureBinner>& binners, const BoostingParams& params, int workers)
      : bins_(bins), n_(n), p_(p), binners_(binners), params_(params), workers_(workers) {}

  /// Grows one tree on (grad, hess); adds its leaf values to `scores`
  /// (stride `stride`, offset `k`).
  BoostedTree grow(const std::vector<double>& grad, const std::vector<double>& hess, std::vector<double>& scores,
                   std::size_t stride, std::size_t k) {
    grad_ = &grad;
    hess_ = &hess;
    samples_.resize(n_);
    std::iota(samples_.begin(), samples_.end(), 0);

    BoostedTree tree;
    tree.nodes.push_back(BoostedNode{});
    std::vector<GrowingLeaf> leaves;
    GrowingLeaf root;
    root.begin = 0;
    root.end = n_;
    root.node = 0;
    build_histogram(root);
    totals(root);
    find_split(root);
    leaves.push_back(std::move(root));

    auto gain_order = [&](std::size_t a, std::size_t b) {
      // Max-heap on gain; earlier leaves win ties.
      if (leaves[a].split.gain != leaves[b].split.gain) return leaves[a].split.gain < leaves[b].split.gain;
      return a > b;
    };
    std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(gain_order)> frontier(gain_order);
    if (leaves[0].split.feature >= 0) frontier.push(0);

    std::size_t n_leaves = 1;
    while (!frontier.empty() && n_leaves < params_.max_leaf_nodes) {
      std::size_t li = frontier.top();
      frontier.pop();
      GrowingLeaf parent = std::move(leaves[li]);
      const auto f = static_cast<std::size_t>(parent.split.feature);
      const auto cut = static_cast<std::uint8_t>(parent.split.bin);
      const std::uint8_t* col = bins_.data() + f * n_;
      auto mid = std::stable_partition(samples_.begin() + static_cast<std::ptrdiff_t>(parent.begin),
                                       samples_.begin() + static_cast<std::ptrdiff_t>(parent.end),
                                       [&](std::size_t s) { return col[s] <= cut; });
      const auto split_at = static_cast<std::size_t>(mid - samples_.begin());

      GrowingLeaf left, right;
      left.begin = parent.begin;
      left.end = split_at;
      right.begin = split_at;
      right.end = parent.end;
      left.node = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(BoostedNode{});
      right.node = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(BoostedNode{});
      BoostedNode& pn = tree.nodes[parent.node];
      pn.feature = parent.split.feature;
      pn.threshold = binners_[f].representative(static_cast<std::size_t>(cut));
      pn.left = left.node;
      pn.right = right.node;

      // Histogram subtraction: scan the smaller child only.
      GrowingLeaf& small = (left.end - left.begin) <= (right.end - right.begin) ? left : right;
      GrowingLeaf& large = &small == &left ? right : left;
      build_histogram(small);
      large.hist = std::move(parent.hist);
      for (std::size_t i = 0; i < large.hist.size(); ++i) {
        large.hist[i].g -= small.hist[i].g;
        large.hist[i].h -= small.hist[i].h;
        large.hist[i].count -= small.hist[i].count;
      }
      totals(left);
      totals(right);
      find_split(left);
      find_split(right);
      ++n_leaves;

      leaves[li] = GrowingLeaf{};  // retired
      leaves[li].node = -1;
      leaves.push_back(std::move(left));
      if (leaves.back().split.feature >= 0) frontier.push(leaves.size() - 1);
      leaves.push_back(std::move(right));
      if (leaves.back().split.feature >= 0) frontier.push(leaves.size() - 1);
    }

    for (const auto& leaf : leaves) {
      if (leaf.node < 0) continue;
      const double value = -params_.learning_rate * leaf.g / (leaf.h + params_.l2_regularization);
      tree.nodes[leaf.node].value = value;
      for (std::size_t i = leaf.begin; i < leaf.end; ++i) scores[samples_[i] * stride + k] += value;
    }
    return tree;
  }

 private:
  void build_histogram(GrowingLeaf& leaf) {
    leaf.hist.assign(p_ * 256, HistBin{});
    const auto& g = *grad_;
    const auto& h = *hess_;
    parallel_for(p_, workers_, [&](std::size_t f) {
      const std::uint8_t* col = bins_.data() + f * n_;
      HistBin* hist = leaf.hist.data() + f * 256;
      for (std::size_t i = leaf.begin; i < leaf.end; ++i) {
        const std::size_t s = samples_[i];
        HistBin& b = hist[col[s]];
        b.g += g[s];
        b.h += h[s];
        ++b.count;
      }
    });
  }

  void totals(GrowingLeaf& leaf) const {
    // Sum feature 0's histogram; every feature's histogram has the same totals.
    leaf.g = 0.0;
    leaf.h = 0.0;
    for (std::size_t b = 0; b < 256; ++b) {
      leaf.g += leaf.hist[b].g;
      leaf.h += leaf.hist[b].h;
    }
  }

  void find_split(GrowingLeaf& leaf) const {
    const std::size_t count = leaf.end - leaf.begin;
    leaf.split = Split{};
    if (count < 2 * params_.min_samples_leaf) return;
    const double lambda = params_.l2_regularization;
    const double parent_score = leaf.g * leaf.g / (leaf.h + lambda);
    std::vector<Split> per_feature(p_);
    parallel_for(p_, workers_, [&](std::size_t f) {
      const HistBin* hist = leaf.hist.data() + f * 256;
      const std::size_t nb = binners_[f].n_bins();
      double gl = 0.0, hl = 0.0;
      std::size_t cl = 0;
      Split best;
      for (std::size_t b = 0; b + 1 < nb; ++b) {
        gl += hist[b].g;
        hl += hist[b].h;
        cl += hist[b].count;
        const std::size_t cr = count - cl;
        if (cl < params_.min_samples_leaf) continue;
        if (cr < params_.min_samples_leaf) break;
        const double gr = leaf.g - gl;
        const double hr = leaf.h - hl;
        if (hl < kMinHessianToSplit || hr < kMinHessianToSplit) continue;
        const double gain = gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent_score;
        if (gain > best.gain) {
          best.gain = gain;
          best.feature = static_cast<int>(f);
          best.bin = static_cast<int>(b);
        }
      }
      per_feature[f] = best;
    });
    for (const auto& s : per_feature) {
      if (s.feature >= 0 && s.gain > leaf.split.gain) leaf.split = s;
    }
  }

  const std::vector<std::uint8_t>& bins_;
  std::size_t n_;
  std::size_t p_;
  const std::vector<FeatureBinner>& binners_;
  const BoostingParams& params_;
  int workers_;
  const std::vector<double>* grad_ = nullptr;
  const std::vector<double>* hess_ = nullptr;
  std::vector<std::size_t> samples_;
};

double sigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  double e = std::exp(v);
  return e / (1.0 + e);
}

double softplus(double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); }

double mean_log_loss(const std::vector<double>& scores, std::span<const int> labels, std::size_t n_scores) {
  const std::size_t n = labels.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* s = scores.data() + i * n_scores;
    if (n_scores == 1) {
      total += softplus(s[0]) - (labels[i] == 1 ? s[0] : 0.0);
    } else {
      double m = *std::max_element(s, s + n_scores);
      double z = 0.0;
      for (std::size_t k = 0; k < n_scores; ++k) z += std::exp(s[k] - m);
      total += m + std::log(z) - s[labels[i]];
    }
  }
  return n == 0 ? 0.0 : total / static_cast<double>(n);
}

}  // namespace

BoostedModel fit_boosting(std::span<const double> x, std::size_t n, std::size_t p, std::span<const int> labels,
                          std::size_t n_classes, const BoostingParams& params, int workers) {
  if (n_classes < 2) throw Error("boosting needs at least 2 classes");
  if (x.size() != n * p || labels.size() != n) throw Error("boosting: matrix and label sizes disagree");

  std::vector<FeatureBinner> binners(p);
  std::vector<std::uint8_t> bins(n * p);
  parallel_for(p, workers, [&](std::size_t f) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = x[i * p + f];
    binners[f] = FeatureBinner::fit(col, params.max_bins);
    for (std::size_t i = 0; i < n; ++i) bins[f * n + i] = binners[f].bin(col[i]);
  });

  BoostedModel model;
  model.n_classes = n_classes;
  const std::size_t n_scores = n_classes == 2 ? 1 : n_classes;
  std::vector<double> prior(n_classes, 0.0);
  for (int y : labels) prior[static_cast<std::size_t>(y)] += 1.0;
  for (auto& v : prior) v = std::clamp(v / static_cast<double>(n), 1e-7, 1.0 - 1e-7);
  if (n_scores == 1) {
    model.baseline = {std::log(prior[1] / prior[0])};
  } else {
    for (double v : prior) model.baseline.push_back(std::log(v));
  }

  std::vector<double> scores(n * n_scores);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n_scores; ++k) scores[i * n_scores + k] = model.baseline[k];
  }

  TreeGrower grower(bins, n, p, binners, params, workers);
  std::vector<std::vector<double>> grad(n_scores, std::vector<double>(n));
  std::vector<std::vector<double>> hess(n_scores, std::vector<double>(n));
  for (std::size_t it = 0; it < params.n_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      const double* s = scores.data() + i * n_scores;
      if (n_scores == 1) {
        const double prob = sigmoid(s[0]);
        grad[0][i] = prob - (labels[i] == 1 ? 1.0 : 0.0);
        hess[0][i] = prob * (1.0 - prob);
      } else {
        double m = *std::max_element(s, s + n_scores);
        double z = 0.0;
        for (std::size_t k = 0; k < n_scores; ++k) z += std::exp(s[k] - m);
        for (std::size_t k = 0; k < n_scores; ++k) {
          const double prob = std::exp(s[k] - m) / z;
          grad[k][i] = prob - (static_cast<std::size_t>(labels[i]) == k ? 1.0 : 0.0);
          hess[k][i] = prob * (1.0 - prob);
        }
      }
    }
    std::vector<BoostedTree> round;
    round.reserve(n_scores);
    for (std::size_t k = 0; k < n_scores; ++k) round.push_back(grower.grow(grad[k], hess[k], scores, n_scores, k));
    model.trees.push_back(std::move(round));
    model.train_loss.push_back(mean_log_loss(scores, labels, n_scores));
  }
  return model;
}

}  // namespace nidsbench
