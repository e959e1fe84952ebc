#include <gtest/gtest.h>

#include "nidsbench/evaluator.hpp"
#include "oracles/oracles.hpp"
#include "test_support.hpp"

using namespace nidsbench;
using namespace nidsbench::testing;

namespace {

LearnerConfig dt() { return {LearnerKind::DT, {}}; }

std::vector<ClassId> labels(const Dataset& d, const std::vector<std::size_t>& rows) {
  std::vector<ClassId> y;
  for (auto r : rows) y.push_back(d.records[r].class_id);
  return y;
}

// Each attack moves one independent feature away from the benign cluster;
// class 3 copies class 1.
Dataset clustered(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ToyRow> rows;
  for (int c : {0, 1, 2, 3}) {
    for (int i = 0; i < 200; ++i) {
      ToyRow r = plain_row(c, static_cast<double>(rows.size()));
      r.sport = 40000;
      r.dur = 1 + rng.uniform();
      r.fwd_bytes = 100 + 100 * rng.uniform();
      r.fwd_pkts = 1 + static_cast<double>(rng.below(5));
      r.bwd_pkts = static_cast<double>(rng.below(5));
      if (c == 1 || c == 3) r.dur = 100 + 100 * rng.uniform();
      if (c == 2) r.bwd_pkts = 100 + static_cast<double>(rng.below(100));
      r.bwd_bytes = 40 * r.bwd_pkts;
      rows.push_back(r);
    }
  }
  return dataset_from_rows(rows);
}

}  // namespace

TEST(Metrics, HandCountedConfusion) {
  const std::vector<ClassId> truth{1, 2, 3, 0, 0, 0, 0, 0};
  const std::vector<ClassId> pred{1, 1, 0, 1, 0, 0, 0, 0};
  const auto m = binary_metrics(truth, pred);
  EXPECT_EQ(m.tp, 2u);
  EXPECT_EQ(m.fp, 1u);
  EXPECT_EQ(m.n_pos, 3u);
  EXPECT_EQ(m.n_neg, 5u);
  EXPECT_EQ(m.tpr, 2.0 / 3.0);
  EXPECT_EQ(m.fpr, 0.2);
  const auto o = oracle::confusion(truth, pred);
  EXPECT_EQ(m.tpr, oracle::rate(o.tp, o.tp + o.fn));
  EXPECT_EQ(m.fpr, oracle::rate(o.fp, o.fp + o.tn));
}

TEST(Metrics, DegeneratePredictors) {
  const std::vector<ClassId> truth{0, 1, 0, 2};
  const std::vector<ClassId> zeros(4, 0);
  auto m = binary_metrics(truth, zeros);
  EXPECT_EQ(m.tpr, 0.0);
  EXPECT_EQ(m.fpr, 0.0);
  m = binary_metrics(truth, truth);
  EXPECT_EQ(m.tpr, 1.0);
  EXPECT_EQ(m.fpr, 0.0);
  EXPECT_THROW(binary_metrics(truth, std::vector<ClassId>{1}), Error);
}

TEST(Metrics, EmptyDenominatorsAreFlagged) {
  const std::vector<ClassId> truth{1, 1};
  const std::vector<ClassId> pred{1, 0};
  auto m = binary_metrics(truth, pred);
  EXPECT_TRUE(m.fpr_undefined);
  EXPECT_FALSE(m.tpr_undefined);
  EXPECT_EQ(m.fpr, 0.0);
  EXPECT_EQ(m.n_neg, 0u);
}

TEST(Metrics, CascadeAndMulticlassAccuracyByHand) {
  // 10 malicious rows: 6 detected, 3 of those with the right family.
  const std::vector<ClassId> truth{1, 1, 2, 2, 3, 3, 1, 2, 3, 1, 0, 0};
  const std::vector<ClassId> detected{1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 1};
  const std::vector<ClassId> families{1, 2, 2, 3, 3, 1, 0, 0, 0, 0, 0, 2};
  const auto bmd = malicious_accuracy(FamilyScheme::BMD, truth, families, detected);
  const auto md = malicious_accuracy(FamilyScheme::MD, truth, families, detected);
  EXPECT_EQ(bmd.acc, 0.5);
  EXPECT_EQ(bmd.denominator, 6u);
  EXPECT_EQ(md.acc, 0.3);
  EXPECT_EQ(md.denominator, 10u);
  EXPECT_EQ(bmd.acc_strict, 0.3);
}

TEST(Metrics, RandomVectorsMatchBruteForce) {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(60);
    std::vector<ClassId> truth(n), pred(n), fam(n), det(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = static_cast<ClassId>(rng.below(4));
      det[i] = static_cast<ClassId>(rng.below(2));
      pred[i] = det[i];
      fam[i] = det[i] ? static_cast<ClassId>(1 + rng.below(3)) : kBenign;
    }
    const auto m = binary_metrics(truth, pred);
    const auto o = oracle::confusion(truth, pred);
    ASSERT_EQ(m.tp, o.tp);
    ASSERT_EQ(m.fp, o.fp);
    ASSERT_EQ(m.tpr, oracle::rate(o.tp, o.tp + o.fn));
    ASSERT_EQ(m.fpr, oracle::rate(o.fp, o.fp + o.tn));
    const auto b = malicious_accuracy(FamilyScheme::BMD, truth, fam, det);
    ASSERT_EQ(b.acc, oracle::family_accuracy(truth, fam, det, true));
    ASSERT_EQ(b.acc_strict, oracle::family_accuracy(truth, fam, det, false));
    ASSERT_EQ(malicious_accuracy(FamilyScheme::MD, truth, fam, det).acc,
              oracle::family_accuracy(truth, fam, det, false));
  }
}

TEST(Evaluator, ClosedScenarioMatchesRecount) {
  auto d = toy_dataset({30, 10, 10}, 4, 0.2);
  auto view = project(d, FeatureSet::Complete);
  auto split = static_split(d, AvailabilityLevel::abundant(), 3);
  ASSERT_EQ(split.eval_rows().size(), 10u);
  for (auto kind : {PipelineKind::BD, PipelineKind::MD, PipelineKind::BMD, PipelineKind::EDo}) {
    auto p = train_pipeline(kind, dt(), split, d, view);
    const auto rec = run_closed(p, split, d, view);
    const auto rows = split.eval_rows();
    const auto o = oracle::confusion(labels(d, rows), detect(p, select_records(view, rows)));
    EXPECT_EQ(rec.metrics.tp, o.tp);
    EXPECT_EQ(rec.metrics.tpr, oracle::rate(o.tp, o.tp + o.fn));
    EXPECT_EQ(rec.metrics.fpr, oracle::rate(o.fp, o.fp + o.tn));
    EXPECT_EQ(rec.factors.split_id, split.id());
    EXPECT_EQ(rec.factors.pipeline, kind);
    EXPECT_GE(rec.infer_wall_seconds, 0.0);
    EXPECT_EQ(rec.metrics.acc_mal.has_value(), kind == PipelineKind::MD || kind == PipelineKind::BMD);
  }
}

TEST(Evaluator, CascadeAndBinaryRecordsAgree) {
  auto d = toy_dataset({300, 100, 100}, 8, 0.3);
  auto view = project(d, FeatureSet::Complete);
  auto split = static_split(d, AvailabilityLevel::scarce(), 3);
  MemberCache cache;
  PipelineOptions opt;
  opt.cache = &cache;
  const auto bd = run_closed(train_pipeline(PipelineKind::BD, dt(), split, d, view, opt), split, d, view);
  const auto bmd = run_closed(train_pipeline(PipelineKind::BMD, dt(), split, d, view, opt), split, d, view);
  EXPECT_EQ(bd.metrics.tpr, bmd.metrics.tpr);
  EXPECT_EQ(bd.metrics.fpr, bmd.metrics.fpr);
}

TEST(Evaluator, NoBenignRowsInEvaluation) {
  auto d = toy_dataset({40, 40}, 2);
  auto view = project(d, FeatureSet::Complete);
  auto full = static_split(d, AvailabilityLevel::abundant(), 1);
  auto split = manual_split(full.train_idx, {{1, full.eval_idx.at(1)}});
  auto p = train_pipeline(PipelineKind::BD, dt(), split, d, view);
  const auto rec = run_closed(p, split, d, view);
  EXPECT_EQ(rec.metrics.n_neg, 0u);
  EXPECT_EQ(rec.metrics.fpr, 0.0);
  EXPECT_TRUE(rec.metrics.fpr_undefined);
}

TEST(Evaluator, RedundantClosedRecordUsesPerFamilyTests) {
  auto d = toy_dataset({100, 40, 40}, 2);
  auto view = project(d, FeatureSet::Complete);
  auto split = static_split(d, AvailabilityLevel::abundant(), 1);
  auto p = train_pipeline(PipelineKind::EDr, dt(), split, d, view);
  const auto rec = run_closed(p, split, d, view);
  EXPECT_EQ(rec.per_class.size(), 2u);
  EXPECT_EQ(rec.metrics.tpr, evaluate_redundant(p, split, d, view).average.tpr);
}

TEST(Evaluator, UnknownScenarioNeedsTwoAttacks) {
  auto d = toy_dataset({40, 40}, 2);
  auto view = project(d, FeatureSet::Complete);
  auto split = static_split(d, AvailabilityLevel::abundant(), 1);
  try {
    run_unknown(PipelineKind::BD, dt(), split, d, view);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("unknown-attack scenario undefined"), std::string::npos);
  }
}

TEST(Evaluator, UnknownAttacksFromSeparateAndDuplicateClusters) {
  auto d = clustered(5);
  auto view = project(d, FeatureSet::Complete);
  auto split = static_split(d, AvailabilityLevel::abundant(), 1);
  const auto closed = run_closed(train_pipeline(PipelineKind::BD, dt(), split, d, view), split, d, view);
  const auto rec = run_unknown(PipelineKind::BD, dt(), split, d, view);
  ASSERT_EQ(rec.per_class.size(), 3u);
  EXPECT_LT(rec.per_class.at(2).tpr, 0.1);                   // nothing like it was seen
  EXPECT_GT(rec.per_class.at(3).tpr, closed.metrics.tpr - 0.05);  // its twin was seen
  EXPECT_GT(rec.per_class.at(1).tpr, closed.metrics.tpr - 0.05);
  double mean = 0.0;
  for (const auto& [c, m] : rec.per_class) mean += m.tpr;
  EXPECT_DOUBLE_EQ(rec.metrics.tpr, mean / 3.0);
  EXPECT_EQ(rec.metrics.n_neg, split.eval_count(0));
  EXPECT_EQ(rec.factors.scenario, Scenario::Unknown);

  const auto edr = run_unknown(PipelineKind::EDr, dt(), split, d, view);
  EXPECT_TRUE(edr.skipped);
}

TEST(Evaluator, AdversarialScenario) {
  auto d = toy_dataset({200, 150, 150}, 6, 0.4);
  auto ess = project(d, FeatureSet::Essential);
  auto split = static_split(d, AvailabilityLevel::abundant(), 2);
  auto p = train_pipeline(PipelineKind::BD, dt(), split, d, ess);
  PerturbationRule identity;
  identity.duration_increments = {0};
  identity.byte_increments = {0};
  auto rec = run_adversarial(p, split, d, ess, identity, 4);
  ASSERT_TRUE(rec.adversarial.has_value());
  EXPECT_EQ(rec.adversarial->tpr_adv, rec.adversarial->tpr_org);
  EXPECT_EQ(rec.verifier_failures, 0u);
  EXPECT_EQ(rec.verified_rows, eligible(d, split.eval_rows()).size());

  rec = run_adversarial(p, split, d, ess, PerturbationRule{}, 4);
  EXPECT_EQ(rec.verifier_failures, 0u);
  EXPECT_GT(rec.verified_rows, 0u);

  auto complete = project(d, FeatureSet::Complete);
  auto pc = train_pipeline(PipelineKind::BD, dt(), split, d, complete);
  EXPECT_THROW(run_adversarial(pc, split, d, complete, PerturbationRule{}, 4), Error);
}

TEST(Evaluator, AdversarialSkipsWithoutEligibleRows) {
  auto d = toy_dataset({60, 60}, 6);
  auto ess = project(d, FeatureSet::Essential);
  auto full = static_split(d, AvailabilityLevel::abundant(), 2);
  // Evaluate on benign rows only: nothing is eligible.
  auto split = manual_split(full.train_idx, {{0, full.eval_idx.at(0)}});
  auto p = train_pipeline(PipelineKind::BD, dt(), split, d, ess);
  const auto rec = run_adversarial(p, split, d, ess, PerturbationRule{}, 1);
  EXPECT_TRUE(rec.skipped);
  EXPECT_FALSE(rec.adversarial.has_value());
}

TEST(Evaluator, ScenarioNames) {
  EXPECT_EQ(scenario_from_string("Adversarial"), Scenario::Adversarial);
  EXPECT_THROW(scenario_from_string("Chaos"), Error);
}
