#include "nidsbench/bench/config.hpp"

#include <fstream>
#include <sstream>

#include "json_io.hpp"

namespace nidsbench::bench {

using nlohmann::json;

Repetitions Repetitions::preset(std::string_view name) {
  Repetitions r;
  if (name == "full") return r;
  if (name == "sweet_spot") {
    r.limited = {10, 10};
    r.other = {3, 3};
    return r;
  }
  throw Error("unknown repetition preset '" + std::string(name) + "' (expected full or sweet_spot)");
}

RepetitionPlan Repetitions::plan(const AvailabilityLevel& a, Regime r) const {
  if (r == Regime::Temporal) return temporal;
  return a.kind == Availability::Limited ? limited : other;
}

void CampaignConfig::validate() const {
  std::vector<std::string> problems;
  if (datasets.empty()) problems.emplace_back("no datasets");
  if (algorithms.empty()) problems.emplace_back("no algorithms");
  if (pipelines.empty()) problems.emplace_back("no pipelines");
  if (availabilities.empty()) problems.emplace_back("no availability levels");
  if (feature_sets.empty()) problems.emplace_back("no feature sets");
  if (regimes.empty()) problems.emplace_back("no regimes");
  if (scenarios.empty()) problems.emplace_back("no scenarios");
  for (const auto& p : {repetitions.limited, repetitions.other, repetitions.temporal}) {
    if (p.eval_draws < 1 || p.train_draws < 1) problems.emplace_back("repetitions must be >= 1");
  }
  if (repetitions.temporal.trials() != 1) {
    problems.emplace_back("the temporal regime has a single fixed split; its repetitions must be 1");
  }
  if (workers < 1) problems.emplace_back("workers must be >= 1");
  for (const auto& a : availabilities) {
    try {
      a.validate();
    } catch (const Error& e) {
      problems.emplace_back(e.what());
    }
  }
  try {
    hyperparams.validate();
    perturbation.validate();
  } catch (const Error& e) {
    problems.emplace_back(e.what());
  }
  if (output_dir.empty()) problems.emplace_back("output_dir is empty");
  if (!problems.empty()) {
    std::string msg = "invalid campaign config:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw Error(msg);
  }
}

namespace {

json plan_json(const RepetitionPlan& p) {
  if (p.train_draws == 1) return p.eval_draws;
  return json::array({p.eval_draws, p.train_draws});
}

RepetitionPlan plan_from(const json& j) {
  if (j.is_number_integer()) {
    const auto n = j.get<long long>();
    if (n < 1) throw Error("repetitions must be >= 1");
    return {static_cast<std::size_t>(n), 1};
  }
  if (j.is_array() && j.size() == 2) {
    const auto e = j[0].get<long long>(), t = j[1].get<long long>();
    if (e < 1 || t < 1) throw Error("repetitions must be >= 1");
    return {static_cast<std::size_t>(e), static_cast<std::size_t>(t)};
  }
  throw Error("a repetition entry is a count or an [E draws, T draws] pair");
}

template <typename T, typename F>
std::vector<T> list_of(const json& j, const char* key, F parse) {
  std::vector<T> out;
  if (!j.contains(key)) return out;
  for (const auto& v : j.at(key)) out.push_back(parse(v));
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_absolute() || base.empty()) return path;
  return base / path;
}

}  // namespace

std::string CampaignConfig::to_json() const {
  json j;
  for (const auto& d : datasets) j["datasets"].push_back({{"spec", d.spec.string()}, {"data", d.data.string()}});
  for (auto a : algorithms) j["algorithms"].push_back(std::string(to_string(a)));
  for (auto p : pipelines) j["pipelines"].push_back(std::string(to_string(p)));
  for (const auto& a : availabilities) j["availabilities"].push_back(io::availability_to_json(a));
  for (auto f : feature_sets) j["feature_sets"].push_back(std::string(to_string(f)));
  for (auto r : regimes) j["regimes"].push_back(std::string(to_string(r)));
  for (auto s : scenarios) j["scenarios"].push_back(std::string(to_string(s)));
  j["repetitions"] = {{"Limited", plan_json(repetitions.limited)},
                      {"other", plan_json(repetitions.other)},
                      {"temporal", plan_json(repetitions.temporal)}};
  j["master_seed"] = master_seed;
  j["workers"] = workers;
  j["authoritative_timing"] = authoritative_timing;
  j["hyperparams"] = json::parse(hyperparams.to_json());
  j["perturbation"] = json::parse(perturbation.to_json());
  j["hardware"] = {{"overrides", hardware.overrides}, {"allow_unverified", hardware.allow_unverified}};
  j["output_dir"] = output_dir.string();
  return j.dump(2);
}

CampaignConfig CampaignConfig::from_json(std::string_view text, const std::filesystem::path& base_dir) {
  CampaignConfig c;
  try {
    const json j = json::parse(text);
    for (const auto& d : j.at("datasets")) {
      c.datasets.push_back({resolve(base_dir, d.at("spec").get<std::string>()),
                            resolve(base_dir, d.at("data").get<std::string>())});
    }
    c.algorithms = list_of<LearnerKind>(j, "algorithms", [](const json& v) {
      return learner_kind_from_string(v.get<std::string>());
    });
    c.pipelines = list_of<PipelineKind>(j, "pipelines", [](const json& v) {
      return pipeline_kind_from_string(v.get<std::string>());
    });
    c.availabilities = list_of<AvailabilityLevel>(j, "availabilities", io::availability_from_json);
    c.feature_sets = list_of<FeatureSet>(j, "feature_sets", [](const json& v) {
      return feature_set_from_string(v.get<std::string>());
    });
    c.regimes = list_of<Regime>(j, "regimes", [](const json& v) { return regime_from_string(v.get<std::string>()); });
    c.scenarios = list_of<Scenario>(j, "scenarios", [](const json& v) {
      return scenario_from_string(v.get<std::string>());
    });
    if (j.contains("repetitions")) {
      const auto& r = j["repetitions"];
      if (r.is_string()) {
        c.repetitions = Repetitions::preset(r.get<std::string>());
      } else {
        if (r.contains("preset")) c.repetitions = Repetitions::preset(r["preset"].get<std::string>());
        if (r.contains("Limited")) c.repetitions.limited = plan_from(r["Limited"]);
        if (r.contains("other")) c.repetitions.other = plan_from(r["other"]);
        if (r.contains("temporal")) c.repetitions.temporal = plan_from(r["temporal"]);
      }
    }
    c.master_seed = j.value("master_seed", c.master_seed);
    c.workers = j.value("workers", c.workers);
    c.authoritative_timing = j.value("authoritative_timing", c.authoritative_timing);
    if (j.contains("hyperparams")) c.hyperparams = Hyperparams::from_json(j["hyperparams"].dump());
    if (j.contains("perturbation")) c.perturbation = PerturbationRule::from_json(j["perturbation"].dump());
    if (j.contains("hardware")) {
      const auto& h = j["hardware"];
      if (h.contains("overrides")) c.hardware.overrides = h["overrides"].get<std::map<std::string, std::string>>();
      c.hardware.allow_unverified = h.value("allow_unverified", false);
    }
    c.output_dir = resolve(base_dir, j.value("output_dir", std::string("results")));
  } catch (const json::exception& e) {
    throw Error(std::string("campaign config: ") + e.what());
  }
  c.validate();
  return c;
}

CampaignConfig CampaignConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open campaign config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str(), path.parent_path());
}

}  // namespace nidsbench::bench
