#include "nidsbench/threats.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "json.hpp"
#include "nidsbench/expression.hpp"
#include "nidsbench/rng.hpp"

namespace nidsbench {

using nlohmann::json;

std::string_view to_string(PerturbMode m) {
  switch (m) {
    case PerturbMode::Duration: return "duration";
    case PerturbMode::Bytes: return "bytes";
    case PerturbMode::Both: return "both";
    case PerturbMode::Packets: return "packets";
  }
  return "?";
}

PerturbMode perturb_mode_from_string(std::string_view s) {
  for (auto m : {PerturbMode::Duration, PerturbMode::Bytes, PerturbMode::Both, PerturbMode::Packets}) {
    if (to_string(m) == s) return m;
  }
  throw Error("unknown perturbation mode '" + std::string(s) + "'");
}

void PerturbationRule::validate() const {
  auto check = [](const std::vector<double>& incs, const char* what) {
    if (incs.empty()) throw Error(std::string("perturbation rule: ") + what + " increments are empty");
    for (double v : incs) {
      if (!std::isfinite(v) || v < 0) throw Error(std::string("perturbation rule: ") + what + " increments must be >= 0");
    }
  };
  if (mode == PerturbMode::Duration || mode == PerturbMode::Both) check(duration_increments, "duration");
  if (mode == PerturbMode::Bytes || mode == PerturbMode::Both) check(byte_increments, "byte");
  if (mode == PerturbMode::Packets) check(packet_increments, "packet");
  if (!(mtu > 0)) throw Error("perturbation rule: mtu must be > 0");
  if (max_flow_duration && !(*max_flow_duration > 0)) throw Error("perturbation rule: max_flow_duration must be > 0");
}

std::string PerturbationRule::to_json() const {
  json j = {{"duration_increments", duration_increments},
            {"byte_increments", byte_increments},
            {"packet_increments", packet_increments},
            {"mtu", mtu},
            {"mode", std::string(nidsbench::to_string(mode))}};
  if (max_flow_duration) j["max_flow_duration"] = *max_flow_duration;
  return j.dump();
}

PerturbationRule PerturbationRule::from_json(std::string_view text) {
  PerturbationRule r;
  try {
    auto j = json::parse(text);
    r.duration_increments = j.value("duration_increments", r.duration_increments);
    r.byte_increments = j.value("byte_increments", r.byte_increments);
    r.packet_increments = j.value("packet_increments", r.packet_increments);
    r.mtu = j.value("mtu", r.mtu);
    if (j.contains("mode")) r.mode = perturb_mode_from_string(j["mode"].get<std::string>());
    if (j.contains("max_flow_duration") && !j["max_flow_duration"].is_null()) {
      r.max_flow_duration = j["max_flow_duration"].get<double>();
    }
  } catch (const json::exception& e) {
    throw Error(std::string("perturbation rule: ") + e.what());
  }
  r.validate();
  return r;
}

std::vector<std::size_t> eligible(const Dataset& d, std::span<const std::size_t> eval_rows) {
  std::vector<std::size_t> out;
  for (auto r : eval_rows) {
    const auto& rec = d.records.at(r);
    if (rec.class_id != kBenign && rec.protocol == kProtocolUdp && rec.src_internal) out.push_back(r);
  }
  return out;
}

namespace {

struct CompiledRule {
  std::size_t target;
  Expression expr;
  std::vector<std::size_t> inputs;  // feature index, or npos for a base alias
  std::vector<int> alias;           // 0 duration, 1 bytes, 2 packets, -1 column
};

std::vector<CompiledRule> compile_rules(const Dataset& d) {
  std::vector<CompiledRule> out;
  for (const auto& rule : d.spec.derived_rules) {
    CompiledRule c{d.require_feature(rule.feature), Expression::parse(rule.formula), {}, {}};
    for (const auto& v : c.expr.variables()) {
      if (v == "duration") {
        c.alias.push_back(0);
      } else if (v == "tot_bytes") {
        c.alias.push_back(1);
      } else if (v == "tot_packets") {
        c.alias.push_back(2);
      } else {
        c.alias.push_back(-1);
      }
      c.inputs.push_back(c.alias.back() < 0 ? d.require_feature(v) : 0);
    }
    out.push_back(std::move(c));
  }
  return out;
}

double evaluate(const CompiledRule& rule, const FlowRecord& r) {
  std::vector<double> values(rule.inputs.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    switch (rule.alias[i]) {
      case 0: values[i] = r.base.duration; break;
      case 1: values[i] = r.base.tot_bytes; break;
      case 2: values[i] = r.base.tot_packets; break;
      default: values[i] = r.features[rule.inputs[i]];
    }
  }
  return rule.expr.evaluate(values);
}

double pick(Rng& rng, const std::vector<double>& grid) { return grid[rng.below(grid.size())]; }

}  // namespace

std::vector<FlowRecord> perturb(const Dataset& d, std::span<const std::size_t> rows, const PerturbationRule& rule,
                                std::uint64_t seed, FeatureSet attacked) {
  rule.validate();
  const auto& spec = d.spec;
  std::vector<std::string> blocked;
  for (const auto& f : spec.feature_list(attacked)) {
    if (std::find(spec.unpredictable_features.begin(), spec.unpredictable_features.end(), f) !=
        spec.unpredictable_features.end()) {
      blocked.push_back(f);
    }
  }
  if (!blocked.empty()) {
    std::string msg = "perturb: the attacked feature set contains features without a recompute rule:";
    for (const auto& b : blocked) msg += " '" + b + "'";
    throw Error(msg);
  }
  const bool touch_duration = rule.mode == PerturbMode::Duration || rule.mode == PerturbMode::Both;
  const bool touch_bytes = rule.mode == PerturbMode::Bytes || rule.mode == PerturbMode::Both;
  const bool touch_packets = rule.mode == PerturbMode::Packets;
  if (touch_duration && spec.base.duration_column.empty()) throw Error("perturb: dataset has no duration column");
  if ((touch_bytes || touch_packets) && spec.base.byte_columns.empty()) {
    throw Error("perturb: dataset has no byte columns");
  }

  const auto rules = compile_rules(d);
  const double max_duration = rule.max_flow_duration.value_or(d.max_flow_duration());
  const std::optional<std::size_t> dur_col =
      spec.base.duration_column.empty() ? std::nullopt : std::optional(d.require_feature(spec.base.duration_column));
  const std::optional<std::size_t> byte_col =
      spec.base.byte_columns.empty() ? std::nullopt : std::optional(d.require_feature(spec.base.byte_columns.front()));
  const std::optional<std::size_t> pkt_col =
      spec.base.packet_columns.empty() ? std::nullopt
                                       : std::optional(d.require_feature(spec.base.packet_columns.front()));
  const double scale = spec.base.duration_scale;
  std::vector<std::size_t> byte_cols, pkt_cols;
  for (const auto& c : spec.base.byte_columns) byte_cols.push_back(d.require_feature(c));
  for (const auto& c : spec.base.packet_columns) pkt_cols.push_back(d.require_feature(c));

  std::vector<FlowRecord> out;
  out.reserve(rows.size());
  for (auto idx : rows) {
    FlowRecord r = d.records.at(idx);
    const BaseFields before = r.base;
    Rng rng(derive_seed(seed, idx));

    if (touch_packets) {
      const double inc = pick(rng, rule.packet_increments);
      r.features[*pkt_col] += inc;
      r.base.tot_packets += inc;
      // Keep at least one byte per packet.
      if (r.base.tot_bytes < r.base.tot_packets) {
        const double need = r.base.tot_packets - r.base.tot_bytes;
        r.features[*byte_col] += need;
        r.base.tot_bytes += need;
      }
    }
    if (touch_duration) {
      const double inc = pick(rng, rule.duration_increments);
      double target = std::min(before.duration + inc, max_duration);
      if (target > before.duration) {
        r.features[*dur_col] = target / scale;
        r.base.duration = r.features[*dur_col] * scale;
        if (r.base.duration < before.duration) {  // rounding through the column unit
          r.features[*dur_col] = d.records[idx].features[*dur_col];
          r.base.duration = before.duration;
        }
      }
    }
    if (touch_bytes) {
      const double inc = pick(rng, rule.byte_increments);
      const double target = std::min(r.base.tot_bytes + inc, rule.mtu * r.base.tot_packets);
      if (target > r.base.tot_bytes) {
        r.features[*byte_col] += target - r.base.tot_bytes;
        r.base.tot_bytes = target;
      }
    }

    // Re-sum in column order so the base fields match the columns bit for bit.
    r.base.tot_bytes = 0.0;
    for (auto i : byte_cols) r.base.tot_bytes += r.features[i];
    r.base.tot_packets = 0.0;
    for (auto i : pkt_cols) r.base.tot_packets += r.features[i];

    const bool changed = r.base.duration != before.duration || r.base.tot_bytes != before.tot_bytes ||
                         r.base.tot_packets != before.tot_packets;
    if (changed) {
      for (const auto& cr : rules) r.features[cr.target] = evaluate(cr, r);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::string> verify_perturbation(const Dataset& d, const FlowRecord& original,
                                             const FlowRecord& perturbed, const PerturbationRule& rule) {
  std::vector<std::string> v;
  const auto& spec = d.spec;
  if (perturbed.features.size() != original.features.size()) return {"feature vector width changed"};
  if (perturbed.class_id != original.class_id || perturbed.protocol != original.protocol ||
      perturbed.src_internal != original.src_internal || perturbed.timestamp != original.timestamp) {
    v.emplace_back("non-feature fields changed");
  }

  // Base fields straight from the columns.
  auto column = [&](const FlowRecord& r, const std::string& name) { return r.features[*d.feature_index(name)]; };
  auto sum = [&](const FlowRecord& r, const std::vector<std::string>& cols) {
    double s = 0.0;
    for (const auto& c : cols) s += column(r, c);
    return s;
  };
  const double dur0 = spec.base.duration_column.empty() ? 0.0 : column(original, spec.base.duration_column) *
                                                                     spec.base.duration_scale;
  const double dur1 = spec.base.duration_column.empty() ? 0.0 : column(perturbed, spec.base.duration_column) *
                                                                     spec.base.duration_scale;
  const double bytes0 = sum(original, spec.base.byte_columns);
  const double bytes1 = sum(perturbed, spec.base.byte_columns);
  const double pkts0 = sum(original, spec.base.packet_columns);
  const double pkts1 = sum(perturbed, spec.base.packet_columns);
  if (perturbed.base.duration != dur1 || perturbed.base.tot_bytes != bytes1 || perturbed.base.tot_packets != pkts1) {
    v.emplace_back("base fields disagree with their columns");
  }
  if (dur1 < dur0) v.emplace_back("duration decreased");
  if (bytes1 < bytes0) v.emplace_back("bytes decreased");
  if (pkts1 < pkts0) v.emplace_back("packets decreased");
  if (rule.mode != PerturbMode::Packets && pkts1 != pkts0) v.emplace_back("packet count changed");
  const double tol = 1e-9;
  if (bytes1 > bytes0 && bytes1 > rule.mtu * pkts1 * (1 + tol)) v.emplace_back("bytes exceed mtu x packets");
  const double max_duration = rule.max_flow_duration.value_or(d.max_flow_duration());
  if (dur1 > dur0 && dur1 > max_duration * (1 + tol)) v.emplace_back("duration exceeds the maximum flow duration");
  if (pkts1 > 0 && bytes1 < pkts1 && bytes0 >= pkts0) v.emplace_back("fewer bytes than packets");

  std::vector<bool> derived(perturbed.features.size(), false);
  std::vector<bool> base_col(perturbed.features.size(), false);
  if (!spec.base.duration_column.empty()) base_col[*d.feature_index(spec.base.duration_column)] = true;
  for (const auto& c : spec.base.byte_columns) base_col[*d.feature_index(c)] = true;
  for (const auto& c : spec.base.packet_columns) base_col[*d.feature_index(c)] = true;

  const bool changed = dur1 != dur0 || bytes1 != bytes0 || pkts1 != pkts0;
  for (const auto& rule_def : spec.derived_rules) {
    const std::size_t target = *d.feature_index(rule_def.feature);
    derived[target] = true;
    if (!changed) continue;
    const Expression e = Expression::parse(rule_def.formula);
    std::vector<double> values;
    for (const auto& name : e.variables()) {
      if (name == "duration") {
        values.push_back(dur1);
      } else if (name == "tot_bytes") {
        values.push_back(bytes1);
      } else if (name == "tot_packets") {
        values.push_back(pkts1);
      } else {
        values.push_back(column(perturbed, name));
      }
    }
    const double expect = e.evaluate(values);
    if (perturbed.features[target] != expect) {
      v.push_back("derived feature '" + rule_def.feature + "' is " + std::to_string(perturbed.features[target]) +
                  ", formula gives " + std::to_string(expect));
    }
  }
  for (std::size_t i = 0; i < perturbed.features.size(); ++i) {
    const bool may_change = changed && (derived[i] || base_col[i]);
    if (!may_change && std::memcmp(&perturbed.features[i], &original.features[i], sizeof(double)) != 0) {
      v.push_back("feature '" + d.feature_names[i] + "' changed");
    }
  }
  return v;
}

AdvResult assess_robustness(const TrainedPipeline& p, const FeatureView& clean, const FeatureView& adv) {
  if (p.feature_set != FeatureSet::Essential || clean.feature_set != FeatureSet::Essential ||
      adv.feature_set != FeatureSet::Essential) {
    throw Error("assess_robustness: adversarial robustness is only defined for the Essential feature set");
  }
  if (clean.rows() != adv.rows() || clean.row_index != adv.row_index) {
    throw Error("assess_robustness: clean and perturbed views are not row-aligned");
  }
  AdvResult out;
  out.n_eligible = clean.rows();
  if (out.n_eligible == 0) return out;
  auto rate = [&](const FeatureView& v) {
    const auto hits = detect(p, v);
    return static_cast<double>(std::count(hits.begin(), hits.end(), 1)) / static_cast<double>(hits.size());
  };
  out.tpr_org = rate(clean);
  out.tpr_adv = rate(adv);
  out.success = out.tpr_adv < out.tpr_org;
  return out;
}

}  // namespace nidsbench
