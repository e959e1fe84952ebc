#include "nidsbench/learners.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "json.hpp"

namespace nidsbench {

using nlohmann::json;

std::string_view to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::DT: return "DT";
    case LearnerKind::RF: return "RF";
    case LearnerKind::LR: return "LR";
    case LearnerKind::HGB: return "HGB";
  }
  return "?";
}

LearnerKind learner_kind_from_string(std::string_view s) {
  if (s == "DT") return LearnerKind::DT;
  if (s == "RF") return LearnerKind::RF;
  if (s == "LR") return LearnerKind::LR;
  if (s == "HGB") return LearnerKind::HGB;
  throw Error("unknown learner kind '" + std::string(s) + "'");
}

void Hyperparams::validate() const {
  std::vector<std::string> bad;
  if (dt.min_samples_split < 2) bad.push_back("dt.min_samples_split must be >= 2");
  if (dt.min_samples_leaf < 1) bad.push_back("dt.min_samples_leaf must be >= 1");
  if (rf.n_trees < 1) bad.push_back("rf.n_trees must be >= 1");
  if (rf.tree.min_samples_split < 2) bad.push_back("rf.tree.min_samples_split must be >= 2");
  if (rf.tree.min_samples_leaf < 1) bad.push_back("rf.tree.min_samples_leaf must be >= 1");
  if (!(lr.strength > 0)) bad.push_back("lr.strength must be > 0");
  if (lr.max_iter < 1) bad.push_back("lr.max_iter must be >= 1");
  if (!(lr.tol > 0)) bad.push_back("lr.tol must be > 0");
  if (hgb.n_iter < 1) bad.push_back("hgb.n_iter must be >= 1");
  if (!(hgb.learning_rate > 0)) bad.push_back("hgb.learning_rate must be > 0");
  if (hgb.max_bins < 2 || hgb.max_bins > 255) bad.push_back("hgb.max_bins must lie in [2, 255]");
  if (hgb.max_leaf_nodes < 2) bad.push_back("hgb.max_leaf_nodes must be >= 2");
  if (hgb.min_samples_leaf < 1) bad.push_back("hgb.min_samples_leaf must be >= 1");
  if (hgb.l2_regularization < 0) bad.push_back("hgb.l2_regularization must be >= 0");
  if (bad.empty()) return;
  std::string msg = "invalid hyperparameters:";
  for (const auto& b : bad) msg += " " + b + ";";
  throw Error(msg);
}

namespace {

json tree_params_json(const TreeParams& t) {
  return {{"max_depth", t.max_depth}, {"min_samples_split", t.min_samples_split},
          {"min_samples_leaf", t.min_samples_leaf}};
}

void read_tree_params(const json& j, TreeParams& t) {
  t.max_depth = j.value("max_depth", t.max_depth);
  t.min_samples_split = j.value("min_samples_split", t.min_samples_split);
  t.min_samples_leaf = j.value("min_samples_leaf", t.min_samples_leaf);
}

}  // namespace

std::string Hyperparams::to_json() const {
  json j;
  j["DT"] = tree_params_json(dt);
  j["DT"]["criterion"] = "gini";
  j["RF"] = {{"n_trees", rf.n_trees},
             {"bootstrap", rf.bootstrap},
             {"features_per_split", rf.features_per_split},
             {"tree", tree_params_json(rf.tree)}};
  j["LR"] = {{"regularization", "l2"},
             {"strength", lr.strength},
             {"max_iter", lr.max_iter},
             {"tol", lr.tol},
             {"standardize", lr.standardize}};
  j["HGB"] = {{"n_iter", hgb.n_iter},
              {"learning_rate", hgb.learning_rate},
              {"max_bins", hgb.max_bins},
              {"max_leaf_nodes", hgb.max_leaf_nodes},
              {"min_samples_leaf", hgb.min_samples_leaf},
              {"l2_regularization", hgb.l2_regularization}};
  return j.dump();
}

Hyperparams Hyperparams::from_json(std::string_view text) {
  Hyperparams h;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("hyperparameters: ") + e.what());
  }
  try {
    if (j.contains("DT")) read_tree_params(j["DT"], h.dt);
    if (j.contains("RF")) {
      const auto& r = j["RF"];
      h.rf.n_trees = r.value("n_trees", h.rf.n_trees);
      h.rf.bootstrap = r.value("bootstrap", h.rf.bootstrap);
      h.rf.features_per_split = r.value("features_per_split", h.rf.features_per_split);
      if (r.contains("tree")) read_tree_params(r["tree"], h.rf.tree);
    }
    if (j.contains("LR")) {
      const auto& l = j["LR"];
      h.lr.strength = l.value("strength", h.lr.strength);
      h.lr.max_iter = l.value("max_iter", h.lr.max_iter);
      h.lr.tol = l.value("tol", h.lr.tol);
      h.lr.standardize = l.value("standardize", h.lr.standardize);
    }
    if (j.contains("HGB")) {
      const auto& g = j["HGB"];
      h.hgb.n_iter = g.value("n_iter", h.hgb.n_iter);
      h.hgb.learning_rate = g.value("learning_rate", h.hgb.learning_rate);
      h.hgb.max_bins = g.value("max_bins", h.hgb.max_bins);
      h.hgb.max_leaf_nodes = g.value("max_leaf_nodes", h.hgb.max_leaf_nodes);
      h.hgb.min_samples_leaf = g.value("min_samples_leaf", h.hgb.min_samples_leaf);
      h.hgb.l2_regularization = g.value("l2_regularization", h.hgb.l2_regularization);
    }
  } catch (const json::exception& e) {
    throw Error(std::string("hyperparameters: ") + e.what());
  }
  h.validate();
  return h;
}

TrainedModel::TrainedModel(LearnerConfig config, std::vector<std::string> schema, std::vector<ClassId> classes,
                           ModelParams params, double fit_wall_seconds, int fit_cpu_core_count)
    : config_(std::move(config)),
      schema_(std::move(schema)),
      classes_(std::move(classes)),
      params_(std::move(params)),
      fit_wall_seconds_(fit_wall_seconds),
      fit_cpu_core_count_(fit_cpu_core_count) {
  if (classes_.empty()) throw Error("model needs a non-empty class list");
  if (fit_wall_seconds_ < 0) throw Error("fit time must be >= 0");
  if (fit_cpu_core_count_ < 1) throw Error("fit core count must be >= 1");
}

void TrainedModel::check_schema(const FeatureView& view) const {
  if (view.column_names == schema_) return;
  std::vector<std::string> missing, extra;
  for (const auto& c : schema_) {
    if (std::find(view.column_names.begin(), view.column_names.end(), c) == view.column_names.end())
      missing.push_back(c);
  }
  for (const auto& c : view.column_names) {
    if (std::find(schema_.begin(), schema_.end(), c) == schema_.end()) extra.push_back(c);
  }
  std::string msg = "schema mismatch:";
  if (!missing.empty()) {
    msg += " missing columns [";
    for (std::size_t i = 0; i < missing.size(); ++i) msg += (i ? ", " : "") + missing[i];
    msg += "]";
  }
  if (!extra.empty()) {
    msg += " unexpected columns [";
    for (std::size_t i = 0; i < extra.size(); ++i) msg += (i ? ", " : "") + extra[i];
    msg += "]";
  }
  if (missing.empty() && extra.empty()) msg += " same columns in a different order";
  throw Error(msg);
}

ClassId TrainedModel::predict_row(std::span<const double> row) const {
  if (row.size() != schema_.size()) throw Error("predict_row: row width does not match schema");
  return std::visit(
      [&](const auto& m) -> ClassId {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ConstantModel>) {
          return m.label;
        } else {
          return classes_[static_cast<std::size_t>(m.predict_index(row))];
        }
      },
      params_);
}

std::vector<ClassId> TrainedModel::predict(const FeatureView& view) const {
  check_schema(view);
  std::vector<ClassId> out(view.rows());
  for (std::size_t r = 0; r < view.rows(); ++r) out[r] = predict_row(view.row(r));
  return out;
}

std::vector<ClassId> predict(const TrainedModel& model, const FeatureView& view) { return model.predict(view); }

namespace {

LogisticModel fit_logistic(const std::vector<double>& x, std::size_t n, std::size_t p, const std::vector<int>& idx,
                           std::size_t n_classes, const LogisticParams& params, int workers) {
  LogisticModel m;
  m.mean.assign(p, 0.0);
  m.scale.assign(p, 1.0);
  if (params.standardize) {
    for (std::size_t j = 0; j < p; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += x[i * p + j];
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t i = 0; i < n; ++i) var += (x[i * p + j] - mean) * (x[i * p + j] - mean);
      var /= static_cast<double>(n);
      m.mean[j] = mean;
      m.scale[j] = var > 0 ? std::sqrt(var) : 1.0;
    }
  }
  std::vector<double> z(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) z[i * p + j] = (x[i * p + j] - m.mean[j]) / m.scale[j];
  }
  const std::size_t problems = n_classes == 2 ? 1 : n_classes;
  std::vector<double> targets(n);
  for (std::size_t k = 0; k < problems; ++k) {
    const int positive = n_classes == 2 ? 1 : static_cast<int>(k);
    for (std::size_t i = 0; i < n; ++i) targets[i] = idx[i] == positive ? 1.0 : 0.0;
    LogisticProblem pr{z, n, p, targets, params.strength};
    auto res = minimize_logistic(pr, params, workers);
    m.weights.push_back(std::move(res.params));
    m.iterations.push_back(res.iterations);
    m.converged.push_back(res.converged);
  }
  return m;
}

}  // namespace

TrainedModel fit(const LearnerConfig& config, const FeatureView& view, std::span<const std::size_t> rows,
                 std::span<const ClassId> y, const FitOptions& options) {
  config.hyper.validate();
  if (rows.size() != y.size()) throw Error("fit: label count does not match row count");
  if (rows.empty()) throw Error("fit: zero training rows");
  const std::size_t n = rows.size();
  const std::size_t p = view.cols();
  for (std::size_t r : rows) {
    if (r >= view.rows()) throw Error("fit: row index out of range");
    for (std::size_t j = 0; j < p; ++j) {
      if (!std::isfinite(view.at(r, j))) {
        throw Error("fit: non-finite value in column '" + view.column_names[j] + "' (view row " +
                    std::to_string(r) + ")");
      }
    }
  }
  const int workers = config.kind == LearnerKind::DT ? 1 : std::max(1, options.workers);
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  std::vector<ClassId> classes(y.begin(), y.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() == 1) {
    if (!options.allow_single_class) {
      throw Error("fit: only one distinct label (" + std::to_string(classes[0]) + ") in training data");
    }
    return TrainedModel(config, view.column_names, classes, ConstantModel{classes[0]}, elapsed(), workers);
  }
  std::vector<int> idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    idx[i] = static_cast<int>(std::lower_bound(classes.begin(), classes.end(), y[i]) - classes.begin());
  }
  const std::size_t k = classes.size();

  ModelParams params;
  switch (config.kind) {
    case LearnerKind::DT:
    case LearnerKind::RF: {
      ColumnMatrix cm;
      cm.rows = n;
      cm.cols = p;
      cm.values.resize(n * p);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) cm.values[j * n + i] = view.at(rows[i], j);
      }
      if (config.kind == LearnerKind::DT) {
        std::vector<std::size_t> samples(n);
        std::iota(samples.begin(), samples.end(), 0);
        params = grow_tree(cm, idx, k, std::move(samples), config.hyper.dt, p, options.seed);
      } else {
        params = grow_forest(cm, idx, k, config.hyper.rf, options.seed, workers);
      }
      break;
    }
    case LearnerKind::LR:
    case LearnerKind::HGB: {
      std::vector<double> x(n * p);
      for (std::size_t i = 0; i < n; ++i) {
        auto src = view.row(rows[i]);
        std::copy(src.begin(), src.end(), x.begin() + static_cast<std::ptrdiff_t>(i * p));
      }
      if (config.kind == LearnerKind::LR) {
        params = fit_logistic(x, n, p, idx, k, config.hyper.lr, workers);
      } else {
        params = fit_boosting(x, n, p, idx, k, config.hyper.hgb, workers);
      }
      break;
    }
  }
  const double wall = elapsed();
  return TrainedModel(config, view.column_names, std::move(classes), std::move(params), wall, workers);
}

TrainedModel fit(const LearnerConfig& config, const FeatureView& view, std::span<const ClassId> y,
                 const FitOptions& options) {
  std::vector<std::size_t> rows(view.rows());
  std::iota(rows.begin(), rows.end(), 0);
  return fit(config, view, rows, y, options);
}

}  // namespace nidsbench
