// Acceptance runner. One PASS/FAIL line per criterion.
//
//   acceptance oracles                  metric, Welch and learner suites (1, 2, 11)
//   acceptance gtcs --spec S [--data C] dataset criteria (3-10) on real GTCS data
//   acceptance surrogate --spec S       the same criteria on a synthetic stand-in
//
// Exit codes: 0 all enforced criteria pass, 1 a criterion failed, 77 blocked.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "nidsbench/bench/campaign.hpp"
#include "nidsbench/bench/records.hpp"
#include "nidsbench/bench/report.hpp"
#include "nidsbench/bench/synth.hpp"
#include "nidsbench/learners.hpp"
#include "nidsbench/metrics.hpp"
#include "nidsbench/rng.hpp"
#include "nidsbench/splitter.hpp"
#include "nidsbench/stats.hpp"
#include "oracles/oracles.hpp"

using namespace nidsbench;
using namespace nidsbench::bench;
namespace fs = std::filesystem;

namespace {

constexpr int kBlocked = 77;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

class Report {
 public:
  /// `enforced == false` prints the outcome as INFO without affecting the exit code.
  void add(const std::string& id, const std::string& title, bool pass, const std::string& detail,
           bool enforced = true) {
    const char* tag = enforced ? (pass ? "PASS" : "FAIL") : (pass ? "INFO(pass)" : "INFO(fail)");
    std::cout << tag << "  criterion " << id << " " << title << ": " << detail << std::endl;
    if (enforced && !pass) failed_ = true;
  }
  void blocked(const std::string& id, const std::string& title, const std::string& why) {
    std::cout << "BLOCKED  criterion " << id << " " << title << ": " << why << std::endl;
  }
  int exit_code() const { return failed_ ? 1 : 0; }

 private:
  bool failed_ = false;
};

// ---------------------------------------------------------------------------
// Oracle suites

void metric_oracle(Report& report) {
  Rng rng(20240501);
  const auto t0 = Clock::now();
  std::size_t mismatches = 0;
  for (int pair = 0; pair < 1000; ++pair) {
    const std::size_t n = 1 + rng.below(500);
    std::vector<ClassId> truth(n), detected(n), families(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = static_cast<ClassId>(rng.below(5));
      detected[i] = static_cast<ClassId>(rng.below(2));
      families[i] = detected[i] ? static_cast<ClassId>(1 + rng.below(4)) : kBenign;
    }
    const auto m = binary_metrics(truth, detected);
    const auto o = oracle::confusion(truth, detected);
    mismatches += m.tp != o.tp || m.fp != o.fp || m.n_pos != o.tp + o.fn || m.n_neg != o.fp + o.tn;
    mismatches += m.tpr != oracle::rate(o.tp, o.tp + o.fn) || m.fpr != oracle::rate(o.fp, o.fp + o.tn);
    const auto bmd = malicious_accuracy(FamilyScheme::BMD, truth, families, detected);
    const auto md = malicious_accuracy(FamilyScheme::MD, truth, families, detected);
    mismatches += bmd.acc != oracle::family_accuracy(truth, families, detected, true);
    mismatches += bmd.acc_strict != oracle::family_accuracy(truth, families, detected, false);
    mismatches += md.acc != oracle::family_accuracy(truth, families, detected, false);
  }
  const double elapsed = seconds_since(t0);
  report.add("1", "metric oracle equivalence", mismatches == 0 && elapsed < 1.0,
             std::to_string(mismatches) + " mismatches over 1000 pairs, " + fmt(elapsed, 3) + " s (limit 1 s)");
}

void welch_oracle(Report& report) {
  Rng rng(7);
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int pair = 0; pair < 50; ++pair) {
    const std::size_t na = 2 + rng.below(199), nb = 2 + rng.below(199);
    const double shift = 0.5 * rng.normal(), scale = 0.2 + 2 * rng.uniform();
    std::vector<double> a(na), b(nb);
    for (auto& x : a) x = rng.normal();
    for (auto& x : b) x = shift + scale * rng.normal();
    const auto r = welch(a, b);
    // Statistic and degrees of freedom recomputed here from raw moments.
    auto moments = [](const std::vector<double>& v) {
      long double s = 0, ss = 0;
      for (double x : v) s += x;
      const long double mean = s / v.size();
      for (double x : v) ss += (x - mean) * (x - mean);
      return std::pair<long double, long double>{mean, ss / (v.size() - 1)};
    };
    const auto [ma, va] = moments(a);
    const auto [mb, vb] = moments(b);
    const long double sa = va / na, sb = vb / nb;
    const double t = static_cast<double>((ma - mb) / std::sqrt(sa + sb));
    const double df = static_cast<double>((sa + sb) * (sa + sb) / (sa * sa / (na - 1) + sb * sb / (nb - 1)));
    worst = std::max(worst, std::abs(r.p_value - oracle::t_two_sided_p(t, df)));
  }
  const double elapsed = seconds_since(t0);
  report.add("2", "Welch oracle", worst <= 1e-9 && elapsed < 10.0,
             "max |p - p_quadrature| = " + fmt(worst * 1e12, 3) + "e-12 over 50 pairs, " + fmt(elapsed, 2) +
                 " s (limit 10 s)");
}

FeatureView dense_view(std::size_t n, std::size_t p, std::vector<double> values) {
  FeatureView v;
  for (std::size_t j = 0; j < p; ++j) v.column_names.push_back("x" + std::to_string(j));
  v.values = std::move(values);
  v.row_index.resize(n);
  for (std::size_t i = 0; i < n; ++i) v.row_index[i] = i;
  return v;
}

// Uniform points labeled by a random hyperplane, with a small margin removed.
std::pair<FeatureView, std::vector<ClassId>> linearly_separable(std::size_t n, std::size_t p, Rng& rng,
                                                                const std::vector<double>& w) {
  std::vector<double> x;
  std::vector<ClassId> y;
  while (y.size() < n) {
    std::vector<double> row(p);
    double score = 0;
    for (std::size_t j = 0; j < p; ++j) score += w[j] * (row[j] = 2 * rng.uniform() - 1);
    if (std::abs(score) < 0.05) continue;
    x.insert(x.end(), row.begin(), row.end());
    y.push_back(score > 0 ? 1 : 0);
  }
  return {dense_view(n, p, std::move(x)), y};
}

void learner_sanity(Report& report) {
  Rng rng(11);
  const std::size_t p = 5;
  std::vector<double> w(p);
  for (auto& v : w) v = rng.normal();
  auto [train_x, train_y] = linearly_separable(2000, p, rng, w);
  auto [test_x, test_y] = linearly_separable(2000, p, rng, w);
  std::string accs;
  bool accurate = true;
  for (auto kind : {LearnerKind::DT, LearnerKind::RF, LearnerKind::LR, LearnerKind::HGB}) {
    const auto model = fit({kind, {}}, train_x, train_y, {.seed = 5});
    auto correct = [&](const FeatureView& v, const std::vector<ClassId>& y) {
      const auto pred = predict(model, v);
      std::size_t ok = 0;
      for (std::size_t i = 0; i < y.size(); ++i) ok += pred[i] == y[i];
      return static_cast<double>(ok) / static_cast<double>(y.size());
    };
    const double train_acc = correct(train_x, train_y), test_acc = correct(test_x, test_y);
    accurate = accurate && train_acc >= 0.99;
    accs += std::string(to_string(kind)) + " " + fmt(train_acc) + " (held-out " + fmt(test_acc) + ") ";
  }

  double worst_grad = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng g(seed);
    const std::size_t n = 40, q = 6;
    std::vector<double> x(n * q), t(n), params(q + 1), grad(q + 1);
    for (auto& v : x) v = g.normal();
    for (auto& v : t) v = g.uniform() < 0.5 ? 1.0 : 0.0;
    for (auto& v : params) v = g.normal();
    const LogisticProblem problem{x, n, q, t, 0.5 + g.uniform()};
    logistic_objective(problem, params, grad);
    for (std::size_t j = 0; j <= q; ++j) {
      const double h = 1e-5;
      auto up = params, down = params;
      up[j] += h;
      down[j] -= h;
      const double fd = (logistic_objective(problem, up, std::span<double>{}) -
                         logistic_objective(problem, down, std::span<double>{})) /
                        (2 * h);
      worst_grad = std::max(worst_grad, std::abs(fd - grad[j]) / std::max(1.0, std::abs(grad[j])));
    }
  }

  std::size_t increases = 0, iterations = 0;
  for (int k : {2, 3}) {
    Rng g(40 + k);
    const std::size_t n = 1500, q = 4;
    std::vector<double> x(n * q);
    std::vector<ClassId> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<ClassId>(g.below(static_cast<std::uint64_t>(k)));
      for (std::size_t j = 0; j < q; ++j) x[i * q + j] = g.normal() + (j == 0 ? 0.7 * y[i] : 0.0);
    }
    LearnerConfig cfg{LearnerKind::HGB, {}};
    const auto model = fit(cfg, dense_view(n, q, std::move(x)), y);
    const auto& loss = std::get<BoostedModel>(model.params()).train_loss;
    iterations += loss.size();
    for (std::size_t i = 1; i < loss.size(); ++i) increases += loss[i] > loss[i - 1];
  }

  report.add("11", "learner sanity", accurate && worst_grad <= 1e-6 && increases == 0 && iterations > 0,
             "separable training accuracy " + accs + "(need >= 0.99); LR gradient max relative error " +
                 fmt(worst_grad * 1e9, 3) + "e-9 (limit 1e-6); HGB loss increases " + std::to_string(increases) +
                 " over " + std::to_string(iterations) + " iterations");
}

// ---------------------------------------------------------------------------
// Dataset criteria

struct DataRun {
  fs::path spec;
  fs::path data;
  fs::path work;
  std::size_t trials = 10;         // criteria 4, 6, 7, 8
  std::size_t stat_trials = 100;   // criterion 5
  bool real_dataset = true;       // false: magnitudes reported as INFO only
  std::uint64_t seed = 20240501;
};

bool split_exactness(Report& report, const DataRun& run, const Dataset& d) {
  std::vector<std::string> problems;
  std::size_t checked = 0;
  std::vector<Regime> regimes{Regime::Static};
  if (d.has_timestamps) regimes.push_back(Regime::Temporal);
  for (const auto& a : {AvailabilityLevel::limited(), AvailabilityLevel::scarce(), AvailabilityLevel::moderate(),
                        AvailabilityLevel::abundant()}) {
    for (Regime r : regimes) {
      const TrialSplit s = r == Regime::Static ? static_split(d, a, derive_seed(run.seed, "split")) : temporal_split(d, a);
      const std::string cell = std::string(to_string(a.kind)) + "/" + std::string(to_string(r));
      for (const auto& [c, n] : d.class_counts) {
        const std::size_t expect_eval = n / 5;
        std::size_t expect_train = 0;
        switch (a.kind) {
          case Availability::Limited: expect_train = std::min<std::size_t>(100, n - expect_eval); break;
          case Availability::Scarce: expect_train = n * 15 / 100; break;
          case Availability::Moderate: expect_train = n * 40 / 100; break;
          case Availability::Abundant: expect_train = n - expect_eval; break;
        }
        const auto& train = s.train_idx.at(c);
        const auto& eval = s.eval_idx.at(c);
        auto fail = [&](const std::string& what) { problems.push_back(cell + " class " + std::to_string(c) + ": " + what); };
        if (eval.size() != expect_eval) fail("|E| " + std::to_string(eval.size()) + " != " + std::to_string(expect_eval));
        if (train.size() != expect_train) fail("|T| " + std::to_string(train.size()) + " != " + std::to_string(expect_train));
        std::set<std::size_t> e(eval.begin(), eval.end());
        if (e.size() != eval.size()) fail("duplicate rows in E");
        std::set<std::size_t> t(train.begin(), train.end());
        if (t.size() != train.size()) fail("duplicate rows in T");
        for (auto i : train) {
          if (e.count(i)) {
            fail("T and E intersect");
            break;
          }
        }
        for (const auto* rows : {&train, &eval}) {
          for (auto i : *rows) {
            if (d.records.at(i).class_id != c) {
              fail("row of another class");
              break;
            }
          }
        }
        if (r == Regime::Temporal && !train.empty() && !eval.empty()) {
          double last_train = -INFINITY, first_eval = INFINITY;
          for (auto i : train) last_train = std::max(last_train, *d.records[i].timestamp);
          for (auto i : eval) first_eval = std::min(first_eval, *d.records[i].timestamp);
          if (last_train > first_eval) fail("temporal order violated");
        }
        ++checked;
      }
    }
  }
  std::string detail = std::to_string(checked) + " (level, regime, class) cells checked, " +
                       std::to_string(problems.size()) + " violations";
  if (!d.has_timestamps) detail += "; dataset has no timestamps, temporal regime not checked";
  if (!problems.empty()) detail += "; first: " + problems.front();
  report.add("3", "split exactness", problems.empty(), detail);
  return problems.empty();
}

CampaignConfig base_config(const DataRun& run, const std::string& name) {
  CampaignConfig c;
  c.datasets = {{run.spec, run.data}};
  c.regimes = {Regime::Static};
  c.feature_sets = {FeatureSet::Complete};
  c.master_seed = run.seed;
  c.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  c.hardware.allow_unverified = true;
  c.output_dir = run.work / name;
  return c;
}

ResultStore run_logged(const CampaignConfig& cfg, const std::string& name) {
  fs::remove_all(cfg.output_dir);
  const auto t0 = Clock::now();
  RunControl control;
  const ResultStore store = run_campaign(cfg, control);
  std::cout << "  campaign " << name << ": " << store.completed_trials.size() << " trials, " << store.records.size()
            << " records, " << fmt(seconds_since(t0), 1) << " s" << std::endl;
  return store;
}

struct Selection {
  std::optional<PipelineKind> pipeline;
  std::optional<Availability> availability;
  std::optional<FeatureSet> feature_set;
  std::optional<Scenario> scenario;
};

std::vector<double> values(const ResultStore& store, const Selection& sel, std::string_view metric) {
  std::vector<double> out;
  for (const auto& r : store.records) {
    const auto& f = r.factors;
    if (sel.pipeline && f.pipeline != *sel.pipeline) continue;
    if (sel.availability && f.availability.kind != *sel.availability) continue;
    if (sel.feature_set && f.feature_set != *sel.feature_set) continue;
    if (sel.scenario && f.scenario != *sel.scenario) continue;
    if (auto v = ResultStore::metric_value(r, metric)) out.push_back(*v);
  }
  return out;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return NAN;
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::string n_of(const std::vector<double>& v) { return "n=" + std::to_string(v.size()); }

int run_dataset_criteria(const DataRun& run) {
  Report report;
  const auto t_start = Clock::now();
  fs::create_directories(run.work);
  const DatasetSpec spec = load_dataset_spec(run.spec);
  const Dataset capped = apply_caps(load_dataset(spec, run.data), derive_seed(run.seed, "caps/" + spec.name));
  std::cout << "  dataset " << spec.name << ": " << capped.records.size() << " rows after caps, "
            << capped.class_counts.size() << " classes" << std::endl;
  split_exactness(report, run, capped);

  // HGB: baseline, ensemble ordering and adversarial trend share one campaign.
  auto hgb = base_config(run, "hgb");
  hgb.algorithms = {LearnerKind::HGB};
  hgb.pipelines = {PipelineKind::BD, PipelineKind::EDo, PipelineKind::EDv};
  hgb.availabilities = {AvailabilityLevel::limited(), AvailabilityLevel::abundant()};
  hgb.feature_sets = {FeatureSet::Complete, FeatureSet::Essential};
  hgb.scenarios = {Scenario::Closed, Scenario::Adversarial};
  hgb.repetitions.limited = {run.trials, 1};
  hgb.repetitions.other = {run.trials, 1};
  const ResultStore hgb_store = run_logged(hgb, "hgb");

  const bool magnitude_enforced = run.real_dataset;
  {
    const Selection sel{PipelineKind::BD, Availability::Abundant, FeatureSet::Complete, Scenario::Closed};
    const auto tpr = values(hgb_store, sel, "tpr"), fpr = values(hgb_store, sel, "fpr");
    const double mt = mean(tpr), mf = mean(fpr);
    const bool pass = tpr.size() == run.trials && mt >= 0.977 && mt <= 1.0 && mf >= 0.02 && mf <= 0.06;
    report.add("4", "baseline reproduction", pass,
               "HGB BD Complete Abundant static " + n_of(tpr) + ": mean tpr " + fmt(mt) + " (need [0.977, 1.0]), mean fpr " +
                   fmt(mf) + " (need [0.02, 0.06])",
               magnitude_enforced);
  }

  {
    auto stat = base_config(run, "stat");
    stat.algorithms = {LearnerKind::HGB};
    stat.pipelines = {PipelineKind::MD, PipelineKind::BMD};
    stat.availabilities = {AvailabilityLevel::limited()};
    stat.scenarios = {Scenario::Closed};
    stat.repetitions.limited = {run.stat_trials, 1};
    const ResultStore stat_store = run_logged(stat, "stat");
    try {
      const auto c = compare_methods(stat_store, "pipeline=BMD", "pipeline=MD", "acc", 0.05);
      const bool pass = c.test.verdict == Verdict::ABetter && c.test.p_value < 0.05;
      std::ostringstream p;
      p << c.test.p_value;
      report.add("5", "statistical claim", pass,
                 "HGB Limited " + std::to_string(c.seeds.size()) + " paired trials: acc_mal BMD " + fmt(mean(c.a)) +
                     " vs MD " + fmt(mean(c.b)) + ", p = " + p.str() + ", verdict " + std::string(to_string(c.test.verdict)),
                 magnitude_enforced);
    } catch (const std::exception& e) {
      report.add("5", "statistical claim", false, std::string("comparison failed: ") + e.what(), magnitude_enforced);
    }
  }

  {
    Selection lim{PipelineKind::BD, Availability::Limited, FeatureSet::Essential, Scenario::Adversarial};
    Selection abu{PipelineKind::BD, Availability::Abundant, FeatureSet::Essential, Scenario::Adversarial};
    const auto adv_lim = values(hgb_store, lim, "tpr_adv"), adv_abu = values(hgb_store, abu, "tpr_adv");
    const auto org_abu = values(hgb_store, abu, "tpr_org");
    const double drop = mean(org_abu) - mean(adv_abu);
    const bool pass = adv_lim.size() == run.trials && adv_abu.size() == run.trials &&
                      mean(adv_lim) > mean(adv_abu) && drop >= 0.5;
    report.add("6", "adversarial trend", pass,
               "HGB BD Essential " + n_of(adv_abu) + ": tpr_adv Limited " + fmt(mean(adv_lim)) + " vs Abundant " +
                   fmt(mean(adv_abu)) + " (need Limited > Abundant); Abundant tpr_org " + fmt(mean(org_abu)) +
                   " - tpr_adv = " + fmt(drop) + " (need >= 0.5)",
               magnitude_enforced);
  }

  {
    auto rf = base_config(run, "rf");
    rf.algorithms = {LearnerKind::RF};
    rf.pipelines = {PipelineKind::BD};
    rf.availabilities = {AvailabilityLevel::abundant()};
    rf.scenarios = {Scenario::Closed, Scenario::Unknown};
    rf.repetitions.other = {run.trials, 1};
    const ResultStore rf_store = run_logged(rf, "rf");
    const auto closed = values(rf_store, {PipelineKind::BD, Availability::Abundant, FeatureSet::Complete, Scenario::Closed}, "tpr");
    const auto unknown = values(rf_store, {PipelineKind::BD, Availability::Abundant, FeatureSet::Complete, Scenario::Unknown}, "tpr");
    const double drop = mean(closed) - mean(unknown);
    const bool pass = closed.size() == run.trials && unknown.size() == run.trials && drop >= 0.2;
    report.add("7", "unknown-attack degradation", pass,
               "RF BD Complete Abundant " + n_of(unknown) + ": closed tpr " + fmt(mean(closed)) + ", unknown tpr " +
                   fmt(mean(unknown)) + ", drop " + fmt(drop) + " (need >= 0.2)",
               magnitude_enforced);
  }

  {
    auto at = [&](PipelineKind k, std::string_view metric) {
      return mean(values(hgb_store, {k, Availability::Abundant, FeatureSet::Complete, Scenario::Closed}, metric));
    };
    const double fpr_edv = at(PipelineKind::EDv, "fpr"), fpr_bd = at(PipelineKind::BD, "fpr");
    const double tpr_edv = at(PipelineKind::EDv, "tpr"), tpr_edo = at(PipelineKind::EDo, "tpr");
    const std::string fpr_part = "fpr EDv " + fmt(fpr_edv, 4) + " <= BD " + fmt(fpr_bd, 4);
    const std::string tpr_part = "tpr EDv " + fmt(tpr_edv, 4) + " <= EDo " + fmt(tpr_edo, 4);
    if (magnitude_enforced) {
      report.add("8", "ensemble ordering", fpr_edv <= fpr_bd && tpr_edv <= tpr_edo,
                 "HGB Complete Abundant: " + fpr_part + "; " + tpr_part);
    } else {
      report.add("8a", "ensemble ordering (tpr)", tpr_edv <= tpr_edo, "HGB Complete Abundant: " + tpr_part);
      report.add("8b", "ensemble ordering (fpr)", fpr_edv <= fpr_bd, "HGB Complete Abundant: " + fpr_part, false);
    }
  }

  // Determinism: a broad campaign over every pipeline and scenario, run twice.
  auto broad = base_config(run, "broad_a");
  broad.algorithms = {LearnerKind::DT};
  broad.pipelines = {PipelineKind::BD, PipelineKind::MD, PipelineKind::BMD, PipelineKind::EDo,
                     PipelineKind::EDv, PipelineKind::EDs, PipelineKind::EDr};
  broad.availabilities = {AvailabilityLevel::limited(), AvailabilityLevel::abundant()};
  broad.feature_sets = {FeatureSet::Complete, FeatureSet::Essential};
  if (capped.has_timestamps) broad.regimes = {Regime::Static, Regime::Temporal};
  broad.scenarios = {Scenario::Closed, Scenario::Unknown, Scenario::Adversarial};
  broad.repetitions.limited = {2, 1};
  broad.repetitions.other = {2, 1};
  const ResultStore broad_a = run_logged(broad, "broad_a");
  broad.output_dir = run.work / "broad_b";
  const ResultStore broad_b = run_logged(broad, "broad_b");

  {
    std::size_t adv_records = 0, rows = 0, failures = 0, unverified = 0;
    std::string first;
    for (const ResultStore* s : {&hgb_store, &broad_a}) {
      for (const auto& r : s->records) {
        if (r.factors.scenario != Scenario::Adversarial || r.skipped) continue;
        ++adv_records;
        rows += r.verified_rows;
        failures += r.verifier_failures;
        if (r.adversarial && r.verified_rows != r.adversarial->n_eligible) ++unverified;
        if (first.empty() && !r.verifier_messages.empty()) first = r.verifier_messages.front();
      }
    }
    std::string detail = std::to_string(rows) + " perturbed rows in " + std::to_string(adv_records) +
                         " adversarial records, " + std::to_string(failures) + " verifier failures, " +
                         std::to_string(unverified) + " records with unverified rows";
    if (!first.empty()) detail += "; first failure: " + first;
    report.add("9", "perturbation realizability", adv_records > 0 && rows > 0 && failures == 0 && unverified == 0,
               detail);
  }

  {
    const std::string ha = broad_a.content_hash(), hb = broad_b.content_hash();
    std::size_t trials = 0, mixed = 0;
    for (const ResultStore* s : {&hgb_store, &broad_a, &broad_b}) {
      std::map<std::string, std::set<std::string>> ids;
      for (const auto& r : s->records) {
        if (!r.skipped) ids[trial_key(r.factors)].insert(r.factors.split_id);
      }
      trials += ids.size();
      for (const auto& [_, set] : ids) mixed += set.size() != 1;
    }
    report.add("10", "determinism and fairness", ha == hb && mixed == 0 && broad_a.records.size() > 0,
               "two runs of " + std::to_string(broad_a.records.size()) + " records: hashes " + ha.substr(0, 16) +
                   (ha == hb ? " == " : " != ") + hb.substr(0, 16) + "; " + std::to_string(mixed) + " of " +
                   std::to_string(trials) + " trials reference more than one split id");
  }

  std::cout << "total runtime " << fmt(seconds_since(t_start), 1) << " s" << std::endl;
  return report.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria runner"};
  app.require_subcommand(1);
  app.add_subcommand("oracles", "Metric, Welch and learner suites");

  DataRun run;
  std::string data_path;
  fs::path spec_path;
  std::string work_dir = (fs::temp_directory_path() / "nidsbench-acceptance").string();
  std::size_t rows = 20000;

  auto* gtcs = app.add_subcommand("gtcs", "Dataset criteria on the GTCS CSV");
  gtcs->add_option("--spec", spec_path, "GTCS dataset spec")->required();
  gtcs->add_option("--data", data_path, "GTCS CSV (default: $NIDSBENCH_GTCS_CSV)");
  gtcs->add_option("--work", work_dir, "Scratch directory for result stores");
  gtcs->add_option("--trials", run.trials, "Trials for criteria 4, 6, 7 and 8");
  gtcs->add_option("--stat-trials", run.stat_trials, "Trials for criterion 5");

  auto* surrogate = app.add_subcommand("surrogate", "Dataset criteria on a synthetic stand-in");
  surrogate->add_option("--spec", spec_path, "GTCS dataset spec")->required();
  surrogate->add_option("--rows", rows, "Synthetic row count");
  surrogate->add_option("--work", work_dir, "Scratch directory for result stores");
  surrogate->add_option("--trials", run.trials, "Trials for criteria 4, 6, 7 and 8");
  surrogate->add_option("--stat-trials", run.stat_trials, "Trials for criterion 5");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("oracles")) {
      Report report;
      metric_oracle(report);
      welch_oracle(report);
      learner_sanity(report);
      return report.exit_code();
    }
    run.spec = spec_path;
    run.work = work_dir;
    if (*gtcs) {
      if (data_path.empty()) {
        if (const char* env = std::getenv("NIDSBENCH_GTCS_CSV")) data_path = env;
      }
      if (data_path.empty() || !fs::exists(data_path)) {
        Report report;
        const std::string why = data_path.empty() ? "GTCS CSV not provided (set NIDSBENCH_GTCS_CSV)"
                                                  : "GTCS CSV not found at " + data_path;
        for (const char* id : {"3", "4", "5", "6", "7", "8", "9", "10"}) report.blocked(id, "on GTCS", why);
        return kBlocked;
      }
      run.data = data_path;
      run.real_dataset = true;
      std::cout << "GTCS run: N = " << run.trials << ", criterion 5 N = " << run.stat_trials << std::endl;
    } else {
      run.real_dataset = false;
      fs::create_directories(run.work);
      run.data = run.work / "surrogate.csv";
      std::ofstream out(run.data);
      write_gtcs_surrogate(load_dataset_spec(run.spec), out, {.rows = rows, .seed = 1});
      out.close();
      std::cout << "Surrogate run (" << rows << " synthetic rows in the GTCS schema, not the GTCS data): N = "
                << run.trials << ", criterion 5 N = " << run.stat_trials
                << ". GTCS-magnitude checks are reported as INFO." << std::endl;
    }
    const int code = run_dataset_criteria(run);
    fs::remove_all(run.work);
    return code;
  } catch (const std::exception& e) {
    std::cout << "FAIL  acceptance aborted: " << e.what() << std::endl;
    return 1;
  }
}
