#include "nidsbench/evaluator.hpp"

#include <algorithm>

#include "nidsbench/timing.hpp"

namespace nidsbench {

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::Closed: return "Closed";
    case Scenario::Unknown: return "Unknown";
    case Scenario::Adversarial: return "Adversarial";
  }
  return "?";
}

Scenario scenario_from_string(std::string_view s) {
  for (auto x : {Scenario::Closed, Scenario::Unknown, Scenario::Adversarial}) {
    if (to_string(x) == s) return x;
  }
  throw Error("unknown scenario '" + std::string(s) + "'");
}

namespace {

TrialRecord start_record(const TrainedPipeline& p, const TrialSplit& split, Scenario scenario) {
  TrialRecord rec;
  rec.factors.algorithm = p.learner;
  rec.factors.pipeline = p.kind;
  rec.factors.feature_set = p.feature_set;
  rec.factors.availability = split.availability;
  rec.factors.regime = split.regime;
  rec.factors.scenario = scenario;
  rec.factors.split_id = split.id();
  rec.train_wall_seconds = p.train_wall_seconds();
  rec.train_workers = p.train_cpu_core_count();
  return rec;
}

std::vector<ClassId> labels_of(const Dataset& d, std::span<const std::size_t> rows) {
  std::vector<ClassId> y;
  y.reserve(rows.size());
  for (auto r : rows) y.push_back(d.records[r].class_id);
  return y;
}

}  // namespace

TrialRecord run_closed(const TrainedPipeline& p, const TrialSplit& split, const Dataset& d, const FeatureView& view) {
  TrialRecord rec = start_record(p, split, Scenario::Closed);
  const auto eval = split.eval_rows();
  const auto truth = labels_of(d, eval);
  const FeatureView ev = select_records(view, eval);

  if (p.kind == PipelineKind::EDr) {
    auto timed = time_phase([&] { return evaluate_redundant(p, split, d, view); });
    rec.metrics = timed.result.average;
    rec.per_class = timed.result.per_specialist;
    rec.infer_wall_seconds = timed.wall_seconds;
    return rec;
  }
  auto timed = time_phase([&] { return detect(p, ev); });
  rec.infer_wall_seconds = timed.wall_seconds;
  rec.metrics = binary_metrics(truth, timed.result);
  if (p.kind == PipelineKind::MD || p.kind == PipelineKind::BMD) {
    const auto families = classify_family(p, ev);
    const auto acc = malicious_accuracy(p.kind == PipelineKind::MD ? FamilyScheme::MD : FamilyScheme::BMD, truth,
                                        families, timed.result);
    rec.metrics.acc_mal = acc.acc;
    rec.metrics.acc_mal_strict = acc.acc_strict;
  }
  return rec;
}

TrialRecord run_unknown(PipelineKind kind, const LearnerConfig& learner, const TrialSplit& split, const Dataset& d,
                        const FeatureView& view, const PipelineOptions& options) {
  std::vector<ClassId> attacks;
  for (const auto& [c, rows] : split.train_idx) {
    if (c != kBenign && !rows.empty()) attacks.push_back(c);
  }
  if (attacks.size() < 2) throw Error("unknown-attack scenario undefined: needs at least 2 attack classes");

  TrialRecord rec;
  rec.factors.algorithm = learner.kind;
  rec.factors.pipeline = kind;
  rec.factors.feature_set = view.feature_set;
  rec.factors.availability = split.availability;
  rec.factors.regime = split.regime;
  rec.factors.scenario = Scenario::Unknown;
  rec.factors.split_id = split.id();
  if (kind == PipelineKind::EDr) {
    rec.skipped = true;
    rec.skip_reason = "EDr scores each specialist on its own family only; unknown attacks have no specialist";
    return rec;
  }

  const auto benign = split.eval_idx.count(kBenign) ? split.eval_idx.at(kBenign) : std::vector<std::size_t>{};
  const FeatureView benign_view = select_records(view, benign);
  double tpr = 0.0, fpr = 0.0, train_s = 0.0, infer_s = 0.0;
  for (ClassId c : attacks) {
    const TrialSplit reduced = exclude_class(split, c);
    const TrainedPipeline p = train_pipeline(kind, learner, reduced, d, view, options);
    train_s += p.train_wall_seconds();
    rec.train_workers = std::max(rec.train_workers, p.train_cpu_core_count());

    const auto& unknown = split.eval_idx.at(c);
    const FeatureView uv = select_records(view, unknown);
    auto hits = time_phase([&] { return detect(p, uv); });
    auto alarms = time_phase([&] { return detect(p, benign_view); });
    infer_s += hits.wall_seconds + alarms.wall_seconds;

    Metrics m = binary_metrics(labels_of(d, unknown), hits.result);
    const Metrics b = binary_metrics(labels_of(d, benign), alarms.result);
    m.fp = b.fp;
    m.n_neg = b.n_neg;
    m.fpr = b.fpr;
    m.fpr_undefined = b.fpr_undefined;
    rec.per_class[c] = m;
    tpr += m.tpr;
    fpr += m.fpr;
    rec.metrics.tp += m.tp;
    rec.metrics.n_pos += m.n_pos;
    rec.metrics.tpr_undefined = rec.metrics.tpr_undefined || m.tpr_undefined;
    rec.metrics.fpr_undefined = rec.metrics.fpr_undefined || m.fpr_undefined;
  }
  const double k = static_cast<double>(attacks.size());
  rec.metrics.tpr = tpr / k;
  rec.metrics.fpr = fpr / k;
  rec.metrics.n_neg = benign.size();
  rec.train_wall_seconds = train_s / k;
  rec.infer_wall_seconds = infer_s / k;
  return rec;
}

TrialRecord run_adversarial(const TrainedPipeline& p, const TrialSplit& split, const Dataset& d,
                            const FeatureView& view, const PerturbationRule& rule, std::uint64_t seed) {
  if (p.feature_set != FeatureSet::Essential || view.feature_set != FeatureSet::Essential) {
    throw Error("run_adversarial: only detectors on the Essential feature set are assessed");
  }
  TrialRecord rec = start_record(p, split, Scenario::Adversarial);
  if (p.kind == PipelineKind::EDr) {
    rec.skipped = true;
    rec.skip_reason = "EDr is evaluation-only and has no deployable decision";
    return rec;
  }
  const auto eval = split.eval_rows();
  const auto rows = eligible(d, eval);
  if (rows.empty()) {
    rec.skipped = true;
    rec.skip_reason = "no eligible rows (malicious, UDP, internal source) in E";
    return rec;
  }
  const auto perturbed = perturb(d, rows, rule, seed, FeatureSet::Essential);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto problems = verify_perturbation(d, d.records[rows[i]], perturbed[i], rule);
    ++rec.verified_rows;
    if (!problems.empty()) {
      ++rec.verifier_failures;
      if (rec.verifier_messages.size() < 5) {
        rec.verifier_messages.push_back("record " + std::to_string(rows[i]) + ": " + problems.front());
      }
    }
  }
  const FeatureView clean = select_records(view, rows);
  const FeatureView adv = project_records(d, perturbed, rows, FeatureSet::Essential);
  auto timed = time_phase([&] { return assess_robustness(p, clean, adv); });
  rec.adversarial = timed.result;
  rec.infer_wall_seconds = timed.wall_seconds;
  rec.metrics.n_pos = rows.size();
  rec.metrics.tpr = timed.result.tpr_adv;
  return rec;
}

}  // namespace nidsbench
