#include "nidsbench/bench/records.hpp"

#include <sstream>

#include "json_io.hpp"

namespace nidsbench::bench {

namespace io {

json availability_to_json(const AvailabilityLevel& a) {
  json j = {{"level", std::string(to_string(a.kind))}};
  if (a.kind == Availability::Scarce) j["fraction"] = a.scarce_fraction;
  if (a.kind == Availability::Limited) j["per_class"] = a.limited_per_class;
  return j;
}

AvailabilityLevel availability_from_json(const json& j) {
  AvailabilityLevel a;
  if (j.is_string()) {
    a.kind = availability_from_string(j.get<std::string>());
    return a;
  }
  a.kind = availability_from_string(j.at("level").get<std::string>());
  a.scarce_fraction = j.value("fraction", a.scarce_fraction);
  a.limited_per_class = j.value("per_class", a.limited_per_class);
  return a;
}

json metrics_to_json(const Metrics& m) {
  json j = {{"tpr", m.tpr},
            {"fpr", m.fpr},
            {"tp", m.tp},
            {"fp", m.fp},
            {"n_pos", m.n_pos},
            {"n_neg", m.n_neg},
            {"tpr_undefined", m.tpr_undefined},
            {"fpr_undefined", m.fpr_undefined}};
  if (m.acc_mal) j["acc_mal"] = *m.acc_mal;
  if (m.acc_mal_strict) j["acc_mal_strict"] = *m.acc_mal_strict;
  return j;
}

Metrics metrics_from_json(const json& j) {
  Metrics m;
  m.tpr = j.at("tpr").get<double>();
  m.fpr = j.at("fpr").get<double>();
  m.tp = j.at("tp").get<std::size_t>();
  m.fp = j.at("fp").get<std::size_t>();
  m.n_pos = j.at("n_pos").get<std::size_t>();
  m.n_neg = j.at("n_neg").get<std::size_t>();
  m.tpr_undefined = j.value("tpr_undefined", false);
  m.fpr_undefined = j.value("fpr_undefined", false);
  if (j.contains("acc_mal")) m.acc_mal = j["acc_mal"].get<double>();
  if (j.contains("acc_mal_strict")) m.acc_mal_strict = j["acc_mal_strict"].get<double>();
  return m;
}

json record_to_json(const TrialRecord& r, bool with_timing) {
  const auto& f = r.factors;
  json j;
  j["factors"] = {{"dataset", f.dataset},
                  {"algorithm", std::string(to_string(f.algorithm))},
                  {"pipeline", std::string(to_string(f.pipeline))},
                  {"availability", availability_to_json(f.availability)},
                  {"feature_set", std::string(to_string(f.feature_set))},
                  {"regime", std::string(to_string(f.regime))},
                  {"scenario", std::string(to_string(f.scenario))},
                  {"trial", f.trial},
                  {"seed", f.seed},
                  {"split_id", f.split_id}};
  j["metrics"] = metrics_to_json(r.metrics);
  if (r.adversarial) {
    j["adversarial"] = {{"n_eligible", r.adversarial->n_eligible},
                        {"tpr_org", r.adversarial->tpr_org},
                        {"tpr_adv", r.adversarial->tpr_adv},
                        {"success", r.adversarial->success}};
  }
  if (!r.per_class.empty()) {
    json pc = json::object();
    for (const auto& [c, m] : r.per_class) pc[std::to_string(c)] = metrics_to_json(m);
    j["per_class"] = pc;
  }
  if (with_timing) {
    j["timing"] = {{"train_wall_seconds", r.train_wall_seconds}, {"infer_wall_seconds", r.infer_wall_seconds}};
  }
  j["train_workers"] = r.train_workers;
  j["infer_workers"] = r.infer_workers;
  if (r.skipped) {
    j["skipped"] = true;
    j["skip_reason"] = r.skip_reason;
  }
  if (r.factors.scenario == Scenario::Adversarial && !r.skipped) {
    j["verifier"] = {{"verified_rows", r.verified_rows},
                     {"failures", r.verifier_failures},
                     {"messages", r.verifier_messages}};
  }
  j["ledger_key"] = ledger_key(f);
  return j;
}

TrialRecord record_from_json(const json& j) {
  TrialRecord r;
  const auto& f = j.at("factors");
  r.factors.dataset = f.at("dataset").get<std::string>();
  r.factors.algorithm = learner_kind_from_string(f.at("algorithm").get<std::string>());
  r.factors.pipeline = pipeline_kind_from_string(f.at("pipeline").get<std::string>());
  r.factors.availability = availability_from_json(f.at("availability"));
  r.factors.feature_set = feature_set_from_string(f.at("feature_set").get<std::string>());
  r.factors.regime = regime_from_string(f.at("regime").get<std::string>());
  r.factors.scenario = scenario_from_string(f.at("scenario").get<std::string>());
  r.factors.trial = f.at("trial").get<std::size_t>();
  r.factors.seed = f.at("seed").get<std::uint64_t>();
  r.factors.split_id = f.at("split_id").get<std::string>();
  r.metrics = metrics_from_json(j.at("metrics"));
  if (j.contains("adversarial")) {
    const auto& a = j["adversarial"];
    r.adversarial = AdvResult{a.at("n_eligible").get<std::size_t>(), a.at("tpr_org").get<double>(),
                              a.at("tpr_adv").get<double>(), a.at("success").get<bool>()};
  }
  if (j.contains("per_class")) {
    for (const auto& [c, m] : j["per_class"].items()) r.per_class[std::stoi(c)] = metrics_from_json(m);
  }
  if (j.contains("timing")) {
    r.train_wall_seconds = j["timing"].at("train_wall_seconds").get<double>();
    r.infer_wall_seconds = j["timing"].at("infer_wall_seconds").get<double>();
  }
  r.train_workers = j.value("train_workers", 1);
  r.infer_workers = j.value("infer_workers", 1);
  r.skipped = j.value("skipped", false);
  r.skip_reason = j.value("skip_reason", "");
  if (j.contains("verifier")) {
    const auto& v = j["verifier"];
    r.verified_rows = v.at("verified_rows").get<std::size_t>();
    r.verifier_failures = v.at("failures").get<std::size_t>();
    r.verifier_messages = v.at("messages").get<std::vector<std::string>>();
  }
  return r;
}

}  // namespace io

std::string record_to_json(const TrialRecord& r) { return io::record_to_json(r).dump(); }

TrialRecord record_from_json(std::string_view line) {
  try {
    return io::record_from_json(io::json::parse(line));
  } catch (const io::json::exception& e) {
    throw Error(std::string("malformed trial record: ") + e.what());
  }
}

std::string canonical_record(const TrialRecord& r) { return io::record_to_json(r, false).dump(); }

std::string availability_label(const AvailabilityLevel& a) {
  const AvailabilityLevel defaults;
  std::ostringstream out;
  out << to_string(a.kind);
  if (a.kind == Availability::Scarce && a.scarce_fraction != defaults.scarce_fraction) {
    out << '(' << a.scarce_fraction << ')';
  }
  if (a.kind == Availability::Limited && a.limited_per_class != defaults.limited_per_class) {
    out << '(' << a.limited_per_class << ')';
  }
  return out.str();
}

std::string ledger_key(const TrialFactors& f) {
  return f.dataset + "|" + availability_label(f.availability) + "|" + std::string(to_string(f.feature_set)) + "|" +
         std::string(to_string(f.pipeline)) + "|" + std::string(to_string(f.algorithm));
}

std::string trial_key(const TrialFactors& f) {
  return f.dataset + "|" + availability_label(f.availability) + "|" + std::string(to_string(f.regime)) + "|" +
         std::to_string(f.trial);
}

std::string cell_key(const TrialFactors& f) {
  return ledger_key(f) + "|" + std::string(to_string(f.regime)) + "|" + std::string(to_string(f.scenario));
}

}  // namespace nidsbench::bench
