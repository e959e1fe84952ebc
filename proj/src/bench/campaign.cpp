#include "nidsbench/bench/campaign.hpp"

#include <algorithm>
#include <chrono>
#include <memory>

#include "json_io.hpp"
#include "nidsbench/bench/records.hpp"
#include "nidsbench/parallel.hpp"
#include "nidsbench/rng.hpp"

namespace nidsbench::bench {

namespace {

struct LoadedDataset {
  Dataset data;
  std::map<FeatureSet, FeatureView> views;
};

struct TrialJob {
  const LoadedDataset* dataset = nullptr;
  AvailabilityLevel availability;
  Regime regime = Regime::Static;
  RepetitionPlan plan;
  std::size_t trial = 0;

  TrialFactors factors() const {
    TrialFactors f;
    f.dataset = dataset->data.spec.name;
    f.availability = availability;
    f.regime = regime;
    f.trial = trial;
    return f;
  }
};

TrialRecord skip_record(PipelineKind pipeline, LearnerKind learner, FeatureSet fs, const TrialSplit& split,
                        Scenario scenario, std::string reason) {
  TrialRecord r;
  r.factors.algorithm = learner;
  r.factors.pipeline = pipeline;
  r.factors.feature_set = fs;
  r.factors.availability = split.availability;
  r.factors.regime = split.regime;
  r.factors.scenario = scenario;
  r.factors.split_id = split.id();
  r.skipped = true;
  r.skip_reason = std::move(reason);
  return r;
}

class TrialRunner {
 public:
  TrialRunner(const CampaignConfig& cfg, int fit_workers) : cfg_(cfg), fit_workers_(fit_workers) {}

  StoreWriter::TrialBatch run(const TrialJob& job) const {
    const Dataset& d = job.dataset->data;
    const std::string name = d.spec.name;
    const std::string regime(to_string(job.regime));
    const std::size_t e = job.trial / job.plan.train_draws;
    const std::size_t k = job.trial % job.plan.train_draws;
    // E depends only on the dataset, regime and E draw, so every availability
    // level is scored on the same held-out rows; T also depends on the level.
    const auto eval_seed = derive_seed(cfg_.master_seed, "eval/" + name + "/" + regime + "/" + std::to_string(e));
    const auto train_seed =
        derive_seed(cfg_.master_seed, "train/" + name + "/" + availability_label(job.availability) + "/" + regime +
                                          "/" + std::to_string(e) + "/" + std::to_string(k));
    const auto trial_seed = derive_seed(eval_seed, train_seed);
    const TrialSplit split = job.regime == Regime::Static
                                 ? static_split(d, job.availability, eval_seed, train_seed)
                                 : temporal_split(d, job.availability);

    MemberCache cache;
    PipelineOptions options;
    options.fit.seed = derive_seed(trial_seed, "fit");
    options.fit.workers = fit_workers_;
    options.cache = &cache;

    StoreWriter::TrialBatch batch;
    batch.trial_key = trial_key(job.factors());
    for (auto fs : cfg_.feature_sets) {
      const FeatureView& view = job.dataset->views.at(fs);
      for (auto algo : cfg_.algorithms) {
        const LearnerConfig learner{algo, cfg_.hyperparams};
        for (auto pipe : cfg_.pipelines) {
          std::optional<TrainedPipeline> trained;
          auto pipeline = [&]() -> const TrainedPipeline& {
            if (!trained) trained = train_pipeline(pipe, learner, split, d, view, options);
            return *trained;
          };
          for (auto scenario : cfg_.scenarios) {
            TrialRecord rec;
            switch (scenario) {
              case Scenario::Closed:
                rec = run_closed(pipeline(), split, d, view);
                break;
              case Scenario::Adversarial:
                if (fs != FeatureSet::Essential) {
                  rec = skip_record(pipe, algo, fs, split, scenario,
                                    "adversarial samples are crafted only against Essential-feature detectors");
                } else {
                  rec = run_adversarial(pipeline(), split, d, view, cfg_.perturbation,
                                        derive_seed(trial_seed, "adversarial"));
                }
                break;
              case Scenario::Unknown:
                if (fs != FeatureSet::Complete) {
                  rec = skip_record(pipe, algo, fs, split, scenario,
                                    "unknown-attack retraining uses the Complete feature set only");
                } else {
                  try {
                    rec = run_unknown(pipe, learner, split, d, view, options);
                  } catch (const Error& err) {
                    if (std::string_view(err.what()).find("undefined") == std::string_view::npos) throw;
                    rec = skip_record(pipe, algo, fs, split, scenario, err.what());
                  }
                }
                break;
            }
            rec.factors.dataset = name;
            rec.factors.trial = job.trial;
            rec.factors.seed = trial_seed;
            batch.records.push_back(std::move(rec));
          }
        }
      }
    }
    return batch;
  }

 private:
  const CampaignConfig& cfg_;
  int fit_workers_;
};

}  // namespace

ResultStore run_campaign(const CampaignConfig& cfg, const RunControl& control) {
  cfg.validate();
  auto log = control.log ? control.log : [](const std::string&) {};

  FactorLedger ledger;
  ledger.hardware = capture_hardware(cfg.hardware.overrides, cfg.hardware.allow_unverified);
  if (!ledger.hardware.verified) log("warning: " + ledger.hardware.note);
  ledger.master_seed = cfg.master_seed;
  ledger.repetitions_json = io::json::parse(cfg.to_json())["repetitions"].dump();
  const std::string config_json = cfg.to_json();

  std::vector<std::unique_ptr<LoadedDataset>> datasets;
  std::vector<TrialJob> jobs;
  for (const auto& ref : cfg.datasets) {
    const DatasetSpec spec = load_dataset_spec(ref.spec);
    auto loaded = std::make_unique<LoadedDataset>();
    {
      const Dataset raw = load_dataset(spec, ref.data);
      loaded->data = apply_caps(raw, derive_seed(cfg.master_seed, "caps/" + spec.name));
    }
    log("loaded " + spec.name + ": " + std::to_string(loaded->data.records.size()) + " rows after caps");
    for (auto fs : cfg.feature_sets) loaded->views.emplace(fs, project(loaded->data, fs));

    for (const auto& a : cfg.availabilities) {
      for (auto fs : cfg.feature_sets) {
        for (auto pipe : cfg.pipelines) {
          for (auto algo : cfg.algorithms) {
            TrialFactors f;
            f.dataset = spec.name;
            f.availability = a;
            f.feature_set = fs;
            f.pipeline = pipe;
            f.algorithm = algo;
            ledger.entries[ledger_key(f)] = {spec.netflow_tool, fs, spec.name, a, pipe, algo};
          }
        }
      }
      for (auto regime : cfg.regimes) {
        if (regime == Regime::Temporal && !loaded->data.has_timestamps) {
          ledger.skipped_cells.push_back({spec.name + "|" + availability_label(a) + "|Temporal",
                                          "dataset has no timestamps; the temporal regime is undefined"});
          log("skipping " + ledger.skipped_cells.back().cell + ": no timestamps");
          continue;
        }
        const auto plan = cfg.repetitions.plan(a, regime);
        for (std::size_t t = 0; t < plan.trials(); ++t) jobs.push_back({loaded.get(), a, regime, plan, t});
      }
    }
    datasets.push_back(std::move(loaded));
  }

  StoreWriter writer(cfg.output_dir, control.resume);
  const std::size_t total = jobs.size();
  std::erase_if(jobs, [&](const TrialJob& j) { return writer.existing_trials().count(trial_key(j.factors())); });
  if (control.resume) log("resuming: " + std::to_string(total - jobs.size()) + " trials already stored");
  bool complete = true;
  if (control.stop_after_trials && *control.stop_after_trials < jobs.size()) {
    jobs.resize(*control.stop_after_trials);
    complete = false;
  }

  // Authoritative timings need each trial alone on the machine, with every
  // worker available to the fit.
  const bool concurrent = !cfg.authoritative_timing && cfg.workers > 1;
  const TrialRunner runner(cfg, concurrent ? 1 : cfg.workers);
  std::atomic<std::size_t> done{0};
  auto run_one = [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    auto batch = runner.run(jobs[i]);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::string key = batch.trial_key;
    writer.submit(std::move(batch));
    log("trial " + std::to_string(++done) + "/" + std::to_string(jobs.size()) + " " + key + " (" +
        std::to_string(secs) + " s)");
  };
  try {
    if (concurrent) {
      parallel_for(jobs.size(), cfg.workers, run_one);
    } else {
      for (std::size_t i = 0; i < jobs.size(); ++i) run_one(i);
    }
  } catch (const std::exception& e) {
    std::size_t written = 0;
    try {
      written = writer.finish();
      finalize_store(cfg.output_dir, config_json, ledger, false);
    } catch (const std::exception&) {
    }
    throw Error(std::string("campaign aborted: ") + e.what() + " (" + std::to_string(written) +
                " trials completed and stored)");
  }
  const std::size_t written = writer.finish();
  log("stored " + std::to_string(written) + " trials");
  finalize_store(cfg.output_dir, config_json, ledger, complete);
  return ResultStore::load(cfg.output_dir);
}

}  // namespace nidsbench::bench
