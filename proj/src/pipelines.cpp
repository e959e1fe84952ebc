#include "nidsbench/pipelines.hpp"

#include <algorithm>
#include <cmath>

#include "nidsbench/rng.hpp"

namespace nidsbench {

std::string_view to_string(PipelineKind k) {
  switch (k) {
    case PipelineKind::BD: return "BD";
    case PipelineKind::MD: return "MD";
    case PipelineKind::BMD: return "BMD";
    case PipelineKind::EDo: return "EDo";
    case PipelineKind::EDv: return "EDv";
    case PipelineKind::EDs: return "EDs";
    case PipelineKind::EDr: return "EDr";
  }
  return "?";
}

PipelineKind pipeline_kind_from_string(std::string_view s) {
  for (auto k : {PipelineKind::BD, PipelineKind::MD, PipelineKind::BMD, PipelineKind::EDo, PipelineKind::EDv,
                 PipelineKind::EDs, PipelineKind::EDr}) {
    if (to_string(k) == s) return k;
  }
  // Accept the hyphenated spelling too.
  if (s == "ED-o") return PipelineKind::EDo;
  if (s == "ED-v") return PipelineKind::EDv;
  if (s == "ED-s") return PipelineKind::EDs;
  if (s == "ED-r") return PipelineKind::EDr;
  throw Error("unknown pipeline kind '" + std::string(s) + "'");
}

bool is_ensemble(PipelineKind k) {
  return k == PipelineKind::EDo || k == PipelineKind::EDv || k == PipelineKind::EDs || k == PipelineKind::EDr;
}

double TrainedPipeline::train_wall_seconds() const {
  double total = 0.0;
  for (const auto& m : members) total += m->fit_wall_seconds();
  return total;
}

int TrainedPipeline::train_cpu_core_count() const {
  int cores = 1;
  for (const auto& m : members) cores = std::max(cores, m->fit_cpu_core_count());
  return cores;
}

std::vector<std::size_t> TrainedPipeline::specialist_members() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < roles.size(); ++i) {
    if (roles[i].name == "specialist") out.push_back(i);
  }
  return out;
}

ModelPtr MemberCache::find(const std::string& key) const {
  auto it = models_.find(key);
  return it == models_.end() ? nullptr : it->second;
}

void MemberCache::store(const std::string& key, ModelPtr m) { models_[key] = std::move(m); }

namespace {

/// record index -> view row
class RowLookup {
 public:
  explicit RowLookup(const FeatureView& view) {
    std::size_t max_id = 0;
    for (auto r : view.row_index) max_id = std::max(max_id, r);
    rows_.assign(view.rows() == 0 ? 0 : max_id + 1, kAbsent);
    for (std::size_t i = 0; i < view.rows(); ++i) rows_[view.row_index[i]] = i;
  }

  std::vector<std::size_t> map(std::span<const std::size_t> records) const {
    std::vector<std::size_t> out;
    out.reserve(records.size());
    for (auto r : records) {
      if (r >= rows_.size() || rows_[r] == kAbsent) {
        throw Error("record " + std::to_string(r) + " is not part of the feature view");
      }
      out.push_back(rows_[r]);
    }
    return out;
  }

 private:
  static constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
  std::vector<std::size_t> rows_;
};

std::string role_key(const MemberRole& role) {
  return role.name == "specialist" ? "specialist/" + std::to_string(role.target) : role.name;
}

std::vector<ClassId> to_binary(std::vector<ClassId> v) {
  for (auto& x : v) x = x != kBenign ? 1 : 0;
  return v;
}

FeatureView stack_view(const std::vector<std::vector<ClassId>>& votes, std::span<const ClassId> targets,
                       std::size_t rows) {
  FeatureView v;
  for (auto c : targets) v.column_names.push_back("specialist_" + std::to_string(c));
  const std::size_t m = targets.size();
  v.values.resize(rows * m);
  v.row_index.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    v.row_index[r] = r;
    for (std::size_t j = 0; j < m; ++j) v.values[r * m + j] = static_cast<double>(votes[j][r]);
  }
  return v;
}

}  // namespace

FeatureView select_records(const FeatureView& view, std::span<const std::size_t> records) {
  const auto rows = RowLookup(view).map(records);
  FeatureView out;
  out.feature_set = view.feature_set;
  out.column_names = view.column_names;
  out.row_index.assign(records.begin(), records.end());
  out.values.resize(rows.size() * view.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = view.row(rows[i]);
    std::copy(src.begin(), src.end(), out.values.begin() + static_cast<std::ptrdiff_t>(i * view.cols()));
  }
  return out;
}

TrainedPipeline train_pipeline(PipelineKind kind, const LearnerConfig& learner, const TrialSplit& split,
                               const Dataset& d, const FeatureView& view, const PipelineOptions& options) {
  TrainedPipeline p;
  p.kind = kind;
  p.learner = learner.kind;
  p.feature_set = view.feature_set;
  p.split_id = split.id();
  p.deployable = kind != PipelineKind::EDr;

  const auto train = split.train_rows();
  if (train.empty()) throw Error("train_pipeline: the split has no training rows");
  std::vector<ClassId> labels(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) labels[i] = d.records[train[i]].class_id;
  std::vector<ClassId> malicious;
  for (const auto& [c, rows] : split.train_idx) {
    if (c != kBenign && !rows.empty()) malicious.push_back(c);
  }
  for (const auto& [c, rows] : split.train_idx) {
    if (!rows.empty()) p.classes.push_back(c);
  }
  if (kind != PipelineKind::BD && malicious.empty()) {
    throw Error("train_pipeline: no malicious class in the training set for " + std::string(to_string(kind)));
  }

  const RowLookup lookup(view);
  const std::string cache_prefix = p.split_id + "|" + std::string(to_string(learner.kind)) + "|" +
                                   learner.hyper.to_json() + "|" + std::string(to_string(view.feature_set)) + "|" +
                                   std::to_string(options.fit.seed) + "|";

  auto fit_member = [&](const MemberRole& role, std::span<const std::size_t> records, std::span<const ClassId> y,
                        const FeatureView& source, bool records_are_view_rows, bool shareable,
                        bool allow_single_class) {
    if (options.audit) options.audit(role, records, y);
    const std::string key = cache_prefix + role_key(role);
    if (shareable && options.cache) {
      if (auto hit = options.cache->find(key)) {
        p.members.push_back(hit);
        p.roles.push_back(role);
        return;
      }
    }
    FitOptions fo = options.fit;
    fo.seed = derive_seed(options.fit.seed, role_key(role));
    fo.allow_single_class = allow_single_class;
    std::vector<std::size_t> rows =
        records_are_view_rows ? std::vector<std::size_t>(records.begin(), records.end()) : lookup.map(records);
    auto model = std::make_shared<const TrainedModel>(fit(learner, source, rows, y, fo));
    if (shareable && options.cache) options.cache->store(key, model);
    p.members.push_back(std::move(model));
    p.roles.push_back(role);
  };

  switch (kind) {
    case PipelineKind::BD:
    case PipelineKind::BMD: {
      fit_member({"binary", kBenign}, train, to_binary(labels), view, false, true, false);
      if (kind == PipelineKind::BMD) {
        std::vector<std::size_t> mal_rows;
        std::vector<ClassId> mal_labels;
        for (std::size_t i = 0; i < train.size(); ++i) {
          if (labels[i] != kBenign) {
            mal_rows.push_back(train[i]);
            mal_labels.push_back(labels[i]);
          }
        }
        // A single remaining family yields a constant stage 2.
        fit_member({"family", kBenign}, mal_rows, mal_labels, view, false, false, true);
      }
      break;
    }
    case PipelineKind::MD:
      fit_member({"multiclass", kBenign}, train, labels, view, false, false, false);
      break;
    case PipelineKind::EDo:
    case PipelineKind::EDv:
    case PipelineKind::EDs:
    case PipelineKind::EDr: {
      const auto& benign = split.train_idx.count(kBenign) ? split.train_idx.at(kBenign) : std::vector<std::size_t>{};
      for (ClassId c : malicious) {
        std::vector<std::size_t> rows;
        std::vector<ClassId> y;
        const auto& mine = split.train_idx.at(c);
        std::merge(benign.begin(), benign.end(), mine.begin(), mine.end(), std::back_inserter(rows));
        y.reserve(rows.size());
        for (auto r : rows) y.push_back(d.records[r].class_id == c ? 1 : 0);
        fit_member({"specialist", c}, rows, y, view, false, true, false);
      }
      if (kind == PipelineKind::EDs) {
        // The stack sees the specialists' 0/1 outputs on T.
        const FeatureView tview = select_records(view, train);
        std::vector<std::vector<ClassId>> votes;
        for (const auto& m : p.members) votes.push_back(to_binary(m->predict(tview)));
        const FeatureView sv = stack_view(votes, malicious, train.size());
        std::vector<std::size_t> rows(train.size());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
        if (options.audit) options.audit({"stack", kBenign}, train, to_binary(labels));
        FitOptions fo = options.fit;
        fo.seed = derive_seed(options.fit.seed, "stack");
        fo.allow_single_class = true;
        p.members.push_back(std::make_shared<const TrainedModel>(fit(learner, sv, rows, to_binary(labels), fo)));
        p.roles.push_back({"stack", kBenign});
      }
      break;
    }
  }
  return p;
}

std::vector<std::vector<ClassId>> specialist_votes(const TrainedPipeline& p, const FeatureView& view) {
  std::vector<std::vector<ClassId>> votes;
  for (auto i : p.specialist_members()) votes.push_back(to_binary(p.members[i]->predict(view)));
  return votes;
}

std::vector<ClassId> detect(const TrainedPipeline& p, const FeatureView& view) {
  switch (p.kind) {
    case PipelineKind::BD:
    case PipelineKind::BMD:
    case PipelineKind::MD:
      return to_binary(p.members.front()->predict(view));
    case PipelineKind::EDr:
      throw Error("detect: EDr is an evaluation-only design; use evaluate_redundant");
    case PipelineKind::EDo:
    case PipelineKind::EDv:
    case PipelineKind::EDs:
      break;
  }
  const auto votes = specialist_votes(p, view);
  const std::size_t m = votes.size();
  std::vector<ClassId> out(view.rows(), 0);
  if (p.kind == PipelineKind::EDs) {
    std::vector<ClassId> targets;
    for (auto i : p.specialist_members()) targets.push_back(p.roles[i].target);
    return to_binary(p.members.back()->predict(stack_view(votes, targets, view.rows())));
  }
  const std::size_t needed = p.kind == PipelineKind::EDo ? 1 : (m + 1) / 2;
  for (std::size_t r = 0; r < view.rows(); ++r) {
    std::size_t yes = 0;
    for (const auto& v : votes) yes += v[r] != 0;
    out[r] = yes >= needed && yes > 0 ? 1 : 0;
  }
  return out;
}

std::vector<ClassId> classify_family(const TrainedPipeline& p, const FeatureView& view) {
  if (p.kind == PipelineKind::MD) return p.members.front()->predict(view);
  if (p.kind != PipelineKind::BMD) {
    throw Error("classify_family: only MD and BMD assign families, not " + std::string(to_string(p.kind)));
  }
  const auto stage1 = to_binary(p.members[0]->predict(view));
  std::vector<ClassId> out(view.rows(), kBenign);
  std::vector<std::size_t> flagged;
  for (std::size_t r = 0; r < view.rows(); ++r) {
    if (stage1[r]) flagged.push_back(view.row_index[r]);
  }
  if (flagged.empty()) return out;
  const auto families = p.members[1]->predict(select_records(view, flagged));
  std::size_t k = 0;
  for (std::size_t r = 0; r < view.rows(); ++r) {
    if (stage1[r]) out[r] = families[k++];
  }
  return out;
}

RedundantEvaluation evaluate_redundant(const TrainedPipeline& p, const TrialSplit& split, const Dataset& d,
                                       const FeatureView& view) {
  if (p.kind != PipelineKind::EDr) throw Error("evaluate_redundant: pipeline is not EDr");
  RedundantEvaluation out;
  const auto benign = split.eval_idx.count(kBenign) ? split.eval_idx.at(kBenign) : std::vector<std::size_t>{};
  const auto specialists = p.specialist_members();
  if (specialists.empty()) throw Error("evaluate_redundant: pipeline has no specialists");
  for (auto i : specialists) {
    const ClassId c = p.roles[i].target;
    std::vector<std::size_t> rows;
    const auto& mine = split.eval_idx.count(c) ? split.eval_idx.at(c) : std::vector<std::size_t>{};
    std::merge(benign.begin(), benign.end(), mine.begin(), mine.end(), std::back_inserter(rows));
    std::vector<ClassId> truth;
    for (auto r : rows) truth.push_back(d.records[r].class_id);
    const auto pred = p.members[i]->predict(select_records(view, rows));
    out.per_specialist[c] = binary_metrics(truth, pred);
    out.tested_records[c] = std::move(rows);
  }
  double tpr = 0.0, fpr = 0.0;
  for (const auto& [c, m] : out.per_specialist) {
    tpr += m.tpr;
    fpr += m.fpr;
    out.average.tp += m.tp;
    out.average.fp += m.fp;
    out.average.n_pos += m.n_pos;
    out.average.n_neg += m.n_neg;
    out.average.tpr_undefined = out.average.tpr_undefined || m.tpr_undefined;
    out.average.fpr_undefined = out.average.fpr_undefined || m.fpr_undefined;
  }
  const double m = static_cast<double>(out.per_specialist.size());
  out.average.tpr = tpr / m;
  out.average.fpr = fpr / m;
  return out;
}

}  // namespace nidsbench
