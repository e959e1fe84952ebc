#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "nidsbench/pipelines.hpp"
#include "test_support.hpp"

using namespace nidsbench;
using namespace nidsbench::testing;

namespace {

LearnerConfig dt() { return {LearnerKind::DT, {}}; }

ModelPtr constant_member(const FeatureView& view, ClassId label) {
  return std::make_shared<const TrainedModel>(LearnerConfig{}, view.column_names, std::vector<ClassId>{0, 1},
                                              ConstantModel{label}, 0.0, 1);
}

TrainedPipeline ensemble_of_constants(PipelineKind kind, const FeatureView& view, const std::vector<ClassId>& votes) {
  TrainedPipeline p;
  p.kind = kind;
  p.feature_set = view.feature_set;
  for (std::size_t i = 0; i < votes.size(); ++i) {
    p.members.push_back(constant_member(view, votes[i]));
    p.roles.push_back({"specialist", static_cast<ClassId>(i + 1)});
  }
  return p;
}

// Benign around small values; every attack class shares one region, so
// specialists cannot tell attacks apart.
Dataset confusable(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ToyRow> rows;
  auto add = [&](int label, std::size_t n, double dur_mu, double bytes_mu) {
    for (std::size_t i = 0; i < n; ++i) {
      ToyRow r = plain_row(label, static_cast<double>(rows.size()));
      r.sport = static_cast<int>(rng.below(60000));
      r.dur = std::abs(dur_mu + rng.normal());
      r.fwd_bytes = std::abs(bytes_mu + 300 * rng.normal());
      rows.push_back(r);
    }
  };
  add(0, 800, 2.0, 1000);
  add(1, 600, 2.6, 1300);  // large and hard
  add(2, 60, 6.0, 4000);   // small and easy
  add(3, 60, 6.0, 4000);
  return dataset_from_rows(rows);
}

}  // namespace

TEST(Pipelines, BinaryTargetsCollapseAttackFamilies) {
  auto d = dataset_from_rows({plain_row(0), plain_row(0), plain_row(3), plain_row(1)});
  auto view = project(d, FeatureSet::Complete);
  auto split = manual_split({{0, {0, 1}}, {1, {3}}, {3, {2}}});
  std::vector<ClassId> seen;
  PipelineOptions opt;
  opt.audit = [&](const MemberRole& role, std::span<const std::size_t> records, std::span<const ClassId> y) {
    ASSERT_EQ(role.name, "binary");
    ASSERT_EQ(std::vector<std::size_t>(records.begin(), records.end()), (std::vector<std::size_t>{0, 1, 2, 3}));
    seen.assign(y.begin(), y.end());
  };
  auto p = train_pipeline(PipelineKind::BD, dt(), split, d, view, opt);
  EXPECT_EQ(seen, (std::vector<ClassId>{0, 0, 1, 1}));
  EXPECT_EQ(p.members.size(), 1u);
}

TEST(Pipelines, MemberCountsPerKind) {
  auto d = toy_dataset({200, 60, 60, 60, 60}, 3);
  auto view = project(d, FeatureSet::Complete);
  auto split = static_split(d, AvailabilityLevel::moderate(), 5);
  MemberCache cache;
  PipelineOptions opt;
  opt.cache = &cache;
  std::map<PipelineKind, std::size_t> expected{{PipelineKind::BD, 1},  {PipelineKind::MD, 1},  {PipelineKind::BMD, 2},
                                               {PipelineKind::EDo, 4}, {PipelineKind::EDv, 4}, {PipelineKind::EDs, 5},
                                               {PipelineKind::EDr, 4}};
  for (auto [kind, n] : expected) {
    auto p = train_pipeline(kind, dt(), split, d, view, opt);
    EXPECT_EQ(p.members.size(), n) << to_string(kind);
    EXPECT_EQ(p.roles.size(), n);
    EXPECT_EQ(p.split_id, split.id());
    EXPECT_EQ(p.deployable, kind != PipelineKind::EDr);
  }
  auto eds = train_pipeline(PipelineKind::EDs, dt(), split, d, view, opt);
  EXPECT_EQ(eds.roles.back().name, "stack");
  EXPECT_EQ(eds.specialist_members().size(), 4u);
}

TEST(Pipelines, CascadeSecondStageSeesOnlyMaliciousRows) {
  auto d = toy_dataset({30, 12, 8}, 9);
  auto view = project(d, FeatureSet::Complete);
  ClassIndexSets all;
  for (std::size_t i = 0; i < d.records.size(); ++i) all[d.records[i].class_id].push_back(i);
  auto split = manual_split(all);
  std::map<std::string, std::vector<std::size_t>> audited;
  PipelineOptions opt;
  opt.audit = [&](const MemberRole& role, std::span<const std::size_t> records, std::span<const ClassId>) {
    audited[role.name].assign(records.begin(), records.end());
  };
  auto p = train_pipeline(PipelineKind::BMD, dt(), split, d, view, opt);
  ASSERT_EQ(audited["family"].size(), 20u);
  for (auto r : audited["family"]) EXPECT_NE(d.records[r].class_id, kBenign);
  EXPECT_EQ(audited["binary"].size(), 50u);
  EXPECT_EQ(p.members[1]->classes(), (std::vector<ClassId>{1, 2}));
}

TEST(Pipelines, VoteThresholds) {
  auto d = toy_dataset({5, 5}, 2);
  auto view = project(d, FeatureSet::Complete);
  auto all_rows_are = [&](const TrainedPipeline& p, ClassId v) {
    auto out = detect(p, view);
    return std::all_of(out.begin(), out.end(), [&](ClassId x) { return x == v; });
  };
  EXPECT_TRUE(all_rows_are(ensemble_of_constants(PipelineKind::EDv, view, {1, 1, 0, 0}), 1));
  EXPECT_TRUE(all_rows_are(ensemble_of_constants(PipelineKind::EDv, view, {1, 0, 0, 0}), 0));
  EXPECT_TRUE(all_rows_are(ensemble_of_constants(PipelineKind::EDv, view, {1, 1, 0, 0, 0}), 0));
  EXPECT_TRUE(all_rows_are(ensemble_of_constants(PipelineKind::EDv, view, {1, 1, 1, 0, 0}), 1));
  EXPECT_TRUE(all_rows_are(ensemble_of_constants(PipelineKind::EDo, view, {0, 0, 1, 0}), 1));
  EXPECT_TRUE(all_rows_are(ensemble_of_constants(PipelineKind::EDo, view, {0, 0, 0, 0}), 0));
  EXPECT_TRUE(all_rows_are(ensemble_of_constants(PipelineKind::EDv, view, {0, 0, 0, 0}), 0));
}

TEST(Pipelines, StackedEnsembleMapsAllBenignVotesToBenign) {
  auto d = toy_dataset({300, 80, 80, 80}, 4, 2.0);
  auto view = project(d, FeatureSet::Complete);
  auto split = static_split(d, AvailabilityLevel::abundant(), 1);
  auto p = train_pipeline(PipelineKind::EDs, dt(), split, d, view);
  const auto ev = select_records(view, split.eval_rows());
  const auto votes = specialist_votes(p, ev);
  const auto out = detect(p, ev);
  std::size_t checked = 0;
  for (std::size_t r = 0; r < ev.rows(); ++r) {
    bool any = false;
    for (const auto& v : votes) any = any || v[r] != 0;
    if (!any) {
      EXPECT_EQ(out[r], 0);
      ++checked;
    }
  }
  EXPECT_GT(checked, 0u);
}

TEST(Pipelines, VoteDominanceAcrossEnsembles) {
  auto d = toy_dataset({300, 80, 80, 80}, 6, 0.3);
  auto view = project(d, FeatureSet::Complete);
  auto split = static_split(d, AvailabilityLevel::scarce(), 2);
  MemberCache cache;
  PipelineOptions opt;
  opt.cache = &cache;
  auto edo = train_pipeline(PipelineKind::EDo, dt(), split, d, view, opt);
  auto edv = train_pipeline(PipelineKind::EDv, dt(), split, d, view, opt);
  for (std::size_t i = 0; i < edo.members.size(); ++i) EXPECT_EQ(edo.members[i], edv.members[i]);
  const auto ev = select_records(view, split.eval_rows());
  const auto o = detect(edo, ev);
  const auto v = detect(edv, ev);
  const auto votes = specialist_votes(edo, ev);
  for (std::size_t r = 0; r < ev.rows(); ++r) {
    if (v[r]) EXPECT_EQ(o[r], 1) << "row " << r;
    bool any = false;
    for (const auto& s : votes) any = any || s[r] != 0;
    EXPECT_EQ(o[r] != 0, any);
  }
}

TEST(Pipelines, CascadeMatchesBinaryDetector) {
  auto d = toy_dataset({200, 70, 70}, 8, 0.5);
  auto view = project(d, FeatureSet::Complete);
  auto split = static_split(d, AvailabilityLevel::abundant(), 3);
  PipelineOptions opt;
  opt.fit.seed = 77;
  for (auto lk : {LearnerKind::DT, LearnerKind::RF}) {
    LearnerConfig cfg{lk, {}};
    cfg.hyper.rf.n_trees = 5;
    auto bd = train_pipeline(PipelineKind::BD, cfg, split, d, view, opt);
    auto bmd = train_pipeline(PipelineKind::BMD, cfg, split, d, view, opt);
    EXPECT_EQ(detect(bd, view), detect(bmd, view));
  }
}

TEST(Pipelines, CascadeShortCircuitsBenignRows) {
  auto d = toy_dataset({10, 10}, 2);
  auto view = project(d, FeatureSet::Complete);
  TrainedPipeline p;
  p.kind = PipelineKind::BMD;
  p.members.push_back(constant_member(view, 0));
  // A stage 2 with a foreign schema would throw if it were ever invoked.
  p.members.push_back(std::make_shared<const TrainedModel>(LearnerConfig{}, std::vector<std::string>{"other"},
                                                           std::vector<ClassId>{1}, ConstantModel{1}, 0.0, 1));
  p.roles = {{"binary", 0}, {"family", 0}};
  auto fam = classify_family(p, view);
  EXPECT_TRUE(std::all_of(fam.begin(), fam.end(), [](ClassId c) { return c == kBenign; }));
}

TEST(Pipelines, SingleFamilyCascadeIsConstant) {
  auto d = toy_dataset({150, 100}, 12);
  auto view = project(d, FeatureSet::Complete);
  auto split = static_split(d, AvailabilityLevel::abundant(), 4);
  auto p = train_pipeline(PipelineKind::BMD, dt(), split, d, view);
  ASSERT_TRUE(p.members[1]->is_constant());
  const auto detected = detect(p, view);
  const auto fam = classify_family(p, view);
  for (std::size_t r = 0; r < view.rows(); ++r) EXPECT_EQ(fam[r], detected[r] ? 1 : kBenign);
}

TEST(Pipelines, WrongKindsAreRejected) {
  auto d = toy_dataset({60, 30, 30}, 2);
  auto view = project(d, FeatureSet::Complete);
  auto split = static_split(d, AvailabilityLevel::abundant(), 1);
  auto bd = train_pipeline(PipelineKind::BD, dt(), split, d, view);
  EXPECT_THROW(classify_family(bd, view), Error);
  EXPECT_THROW(evaluate_redundant(bd, split, d, view), Error);
  auto edr = train_pipeline(PipelineKind::EDr, dt(), split, d, view);
  EXPECT_THROW(detect(edr, view), Error);

  ClassIndexSets benign_only{{0, split.train_idx.at(0)}};
  auto only = manual_split(benign_only);
  for (auto k : {PipelineKind::MD, PipelineKind::BMD, PipelineKind::EDo, PipelineKind::EDs}) {
    EXPECT_THROW(train_pipeline(k, dt(), only, d, view), Error) << to_string(k);
  }
}

TEST(Pipelines, SchemaMismatchIsReported) {
  auto d = toy_dataset({60, 30}, 2);
  auto split = static_split(d, AvailabilityLevel::abundant(), 1);
  auto p = train_pipeline(PipelineKind::BD, dt(), split, d, project(d, FeatureSet::Complete));
  EXPECT_THROW(detect(p, project(d, FeatureSet::Essential)), Error);
}

TEST(Pipelines, TrainTimeIsSumOfMembers) {
  auto d = toy_dataset({400, 100, 100, 100}, 5);
  auto view = project(d, FeatureSet::Complete);
  auto split = static_split(d, AvailabilityLevel::abundant(), 1);
  MemberCache cache;
  PipelineOptions opt;
  opt.cache = &cache;
  auto edo = train_pipeline(PipelineKind::EDo, dt(), split, d, view, opt);
  auto eds = train_pipeline(PipelineKind::EDs, dt(), split, d, view, opt);
  double sum = 0.0;
  for (const auto& m : eds.members) sum += m->fit_wall_seconds();
  EXPECT_DOUBLE_EQ(eds.train_wall_seconds(), sum);
  EXPECT_GT(eds.train_wall_seconds(), edo.train_wall_seconds());
  EXPECT_EQ(cache.size(), 3u);
}

TEST(Pipelines, CacheIsKeyedBySplit) {
  auto d = toy_dataset({100, 50}, 5);
  auto view = project(d, FeatureSet::Complete);
  MemberCache cache;
  PipelineOptions opt;
  opt.cache = &cache;
  auto a = train_pipeline(PipelineKind::BD, dt(), static_split(d, AvailabilityLevel::scarce(), 1), d, view, opt);
  auto b = train_pipeline(PipelineKind::BD, dt(), static_split(d, AvailabilityLevel::scarce(), 2), d, view, opt);
  EXPECT_NE(a.members[0], b.members[0]);
  EXPECT_EQ(cache.size(), 2u);
}

TEST(Pipelines, RedundantEvaluationTestsEachSpecialistOnItsOwnFamily) {
  auto d = toy_dataset({200, 60, 60, 60}, 5, 0.5);
  auto view = project(d, FeatureSet::Complete);
  auto split = static_split(d, AvailabilityLevel::abundant(), 1);
  auto p = train_pipeline(PipelineKind::EDr, dt(), split, d, view);
  auto r = evaluate_redundant(p, split, d, view);
  ASSERT_EQ(r.tested_records.size(), 3u);
  for (const auto& [c, rows] : r.tested_records) {
    std::set<ClassId> seen;
    for (auto i : rows) seen.insert(d.records[i].class_id);
    EXPECT_EQ(seen, (std::set<ClassId>{0, c}));
    EXPECT_EQ(rows.size(), split.eval_count(0) + split.eval_count(c));
  }
}

TEST(Pipelines, RedundantEvaluationWithOneSpecialist) {
  auto d = toy_dataset({200, 80}, 7, 0.3);
  auto view = project(d, FeatureSet::Complete);
  auto split = static_split(d, AvailabilityLevel::abundant(), 1);
  auto p = train_pipeline(PipelineKind::EDr, dt(), split, d, view);
  auto r = evaluate_redundant(p, split, d, view);
  const auto ev = select_records(view, split.eval_rows());
  std::vector<ClassId> truth;
  for (auto i : split.eval_rows()) truth.push_back(d.records[i].class_id);
  const auto lone = binary_metrics(truth, p.members[0]->predict(ev));
  EXPECT_EQ(r.average.tpr, lone.tpr);
  EXPECT_EQ(r.average.fpr, lone.fpr);
  EXPECT_EQ(r.average.tp, lone.tp);
}

TEST(Pipelines, RedundantEvaluationInflatesRates) {
  auto d = confusable(21);
  auto view = project(d, FeatureSet::Complete);
  double inflated = 0.0, honest = 0.0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    auto split = static_split(d, AvailabilityLevel::abundant(), s);
    MemberCache cache;
    PipelineOptions opt;
    opt.cache = &cache;
    auto edr = train_pipeline(PipelineKind::EDr, dt(), split, d, view, opt);
    auto edo = train_pipeline(PipelineKind::EDo, dt(), split, d, view, opt);
    const auto r = evaluate_redundant(edr, split, d, view);
    std::vector<ClassId> truth;
    for (auto i : split.eval_rows()) truth.push_back(d.records[i].class_id);
    const auto o = binary_metrics(truth, detect(edo, select_records(view, split.eval_rows())));
    // The OR can only add alarms on benign rows.
    EXPECT_LE(r.average.fpr, o.fpr);
    inflated += r.average.tpr;
    honest += o.tpr;
  }
  EXPECT_GT(inflated, honest);
}

TEST(Pipelines, KindNames) {
  EXPECT_EQ(pipeline_kind_from_string("ED-v"), PipelineKind::EDv);
  EXPECT_EQ(pipeline_kind_from_string("BMD"), PipelineKind::BMD);
  EXPECT_THROW(pipeline_kind_from_string("XD"), Error);
  EXPECT_TRUE(is_ensemble(PipelineKind::EDs));
  EXPECT_FALSE(is_ensemble(PipelineKind::BMD));
}
