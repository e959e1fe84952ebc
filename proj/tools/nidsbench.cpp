#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "nidsbench/bench/campaign.hpp"
#include "nidsbench/bench/hardware.hpp"
#include "nidsbench/bench/report.hpp"
#include "nidsbench/bench/synth.hpp"

using namespace nidsbench;
using namespace nidsbench::bench;

namespace {

std::map<std::string, std::string> parse_assignments(const std::vector<std::string>& items) {
  std::map<std::string, std::string> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error("expected field=value, got '" + item + "'");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  out << text;
  if (!out) throw Error("cannot write " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reproducible benchmarking of ML-based network intrusion detectors"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a campaign described by a config file");
  std::string config_path, resume_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  run->add_option("--config", config_path, "Campaign config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--resume", resume_dir, "Store directory to resume (defaults to the config's output_dir)")
      ->expected(0, 1);
  run->add_option("--seed", seed, "Override master_seed");
  run->add_option("--workers", workers, "Override the worker pool size");
  bool quiet = false;
  run->add_flag("--quiet", quiet, "No progress output");

  auto* report = app.add_subcommand("report", "Render a result table from a result store");
  std::string store_dir, table, format = "md", out_path;
  report->add_option("--store", store_dir, "Result store directory")->required();
  report->add_option("--table", table, "baseline | open_world | multiclass | train_runtime | test_runtime")
      ->required();
  report->add_option("--format", format, "csv | md");
  report->add_option("--out", out_path, "Output file (default stdout)");

  auto* compare = app.add_subcommand("compare", "Welch's t-test between two result groups");
  std::string key_a, key_b, metric = "tpr";
  double alpha = 0.05;
  compare->add_option("--store", store_dir, "Result store directory")->required();
  compare->add_option("--a", key_a, "Factor filter, e.g. pipeline=BMD,algorithm=HGB")->required();
  compare->add_option("--b", key_b, "Factor filter")->required();
  compare->add_option("--metric", metric, "tpr | fpr | acc | acc_strict | tpr_org | tpr_adv | train_time | test_time");
  compare->add_option("--alpha", alpha, "Significance level");

  auto* hardware = app.add_subcommand("hardware", "Probe and validate the hardware descriptor");
  std::vector<std::string> sets;
  bool allow_unverified = false;
  hardware->add_option("--set", sets, "field=value override (repeatable)");
  hardware->add_flag("--allow-unverified", allow_unverified, "Report instead of failing on a family-only CPU name");

  auto* synth = app.add_subcommand("synth", "Write a synthetic CSV with the GTCS schema");
  std::string spec_path;
  SurrogateOptions synth_options;
  synth->add_option("--spec", spec_path, "Dataset spec (JSON)")->required()->check(CLI::ExistingFile);
  synth->add_option("--rows", synth_options.rows, "Row count");
  synth->add_option("--seed", synth_options.seed, "Generator seed");
  synth->add_option("--out", out_path, "Output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      CampaignConfig cfg = CampaignConfig::load(config_path);
      if (seed) cfg.master_seed = *seed;
      if (workers) cfg.workers = *workers;
      RunControl control;
      if (run->count("--resume")) {
        control.resume = true;
        if (!resume_dir.empty()) cfg.output_dir = resume_dir;
      }
      if (!quiet) control.log = [](const std::string& m) { std::cerr << m << '\n'; };
      const ResultStore store = run_campaign(cfg, control);
      std::cout << "store " << cfg.output_dir.string() << ": " << store.records.size() << " records, "
                << store.completed_trials.size() << " trials, content hash " << store.content_hash() << '\n';
    } else if (*report) {
      const ResultStore store = ResultStore::load(store_dir);
      write_output(emit_table(store, table_kind_from_string(table), table_format_from_string(format)), out_path);
    } else if (*compare) {
      const ResultStore store = ResultStore::load(store_dir);
      const auto c = compare_methods(store, key_a, key_b, metric, alpha);
      const auto& t = c.test;
      std::cout << "metric " << metric << ", " << c.seeds.size() << " paired trials\n"
                << "t = " << t.t_statistic << ", df = " << t.degrees_of_freedom << ", p = " << t.p_value
                << ", alpha = " << t.alpha << "\nverdict: " << to_string(t.verdict) << '\n';
    } else if (*hardware) {
      const auto h = capture_hardware(parse_assignments(sets), allow_unverified);
      std::cout << h.to_json() << '\n';
    } else if (*synth) {
      const DatasetSpec spec = load_dataset_spec(spec_path);
      std::ofstream out(out_path);
      if (!out) throw Error("cannot write " + out_path);
      write_gtcs_surrogate(spec, out, synth_options);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
