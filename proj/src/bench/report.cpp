#include "nidsbench/bench/report.hpp"

#include <cstdio>
#include <set>
#include <sstream>
#include <tuple>

#include "nidsbench/bench/records.hpp"

namespace nidsbench::bench {

std::string_view to_string(TableKind k) {
  switch (k) {
    case TableKind::Baseline: return "baseline";
    case TableKind::OpenWorld: return "open_world";
    case TableKind::Multiclass: return "multiclass";
    case TableKind::TrainRuntime: return "train_runtime";
    case TableKind::TestRuntime: return "test_runtime";
  }
  return "?";
}

TableKind table_kind_from_string(std::string_view s) {
  for (auto k : {TableKind::Baseline, TableKind::OpenWorld, TableKind::Multiclass, TableKind::TrainRuntime,
                 TableKind::TestRuntime}) {
    if (to_string(k) == s) return k;
  }
  throw Error("unknown table '" + std::string(s) +
              "' (expected baseline, open_world, multiclass, train_runtime or test_runtime)");
}

TableFormat table_format_from_string(std::string_view s) {
  if (s == "csv") return TableFormat::Csv;
  if (s == "md" || s == "markdown") return TableFormat::Markdown;
  throw Error("unknown table format '" + std::string(s) + "' (expected csv or md)");
}

bool lower_is_better(std::string_view metric) {
  return metric == "fpr" || metric == "train_time" || metric == "test_time";
}

namespace {

constexpr Availability kColumns[] = {Availability::Limited, Availability::Scarce, Availability::Moderate,
                                     Availability::Abundant};
constexpr FeatureSet kSubColumns[] = {FeatureSet::Complete, FeatureSet::Essential};

using RowKey = std::tuple<std::string, Regime, LearnerKind, PipelineKind>;
using ColKey = std::pair<Availability, FeatureSet>;

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

// Scenario feeding a table column, or nullopt when the column is not used.
std::optional<Scenario> source_scenario(TableKind kind, FeatureSet fs) {
  if (kind != TableKind::OpenWorld) return Scenario::Closed;
  return fs == FeatureSet::Complete ? Scenario::Unknown : Scenario::Adversarial;
}

std::vector<std::string> cell_metrics(TableKind kind, FeatureSet fs) {
  switch (kind) {
    case TableKind::Baseline: return {"fpr", "tpr"};
    case TableKind::OpenWorld:
      return fs == FeatureSet::Complete ? std::vector<std::string>{"fpr", "tpr"}
                                        : std::vector<std::string>{"tpr_org", "tpr_adv"};
    case TableKind::Multiclass: return {"acc_mal"};
    case TableKind::TrainRuntime: return {"train_time"};
    case TableKind::TestRuntime: return {"test_time"};
  }
  return {};
}

std::string render_cell(const std::vector<const TrialRecord*>& recs, const std::vector<std::string>& metrics,
                        Regime regime) {
  std::vector<std::string> parts;
  for (const auto& m : metrics) {
    std::vector<double> v;
    for (const auto* r : recs) {
      if (auto x = ResultStore::metric_value(*r, m)) v.push_back(*x);
    }
    if (v.empty()) return "";
    const auto a = aggregate(v, m);
    parts.push_back(regime == Regime::Temporal ? fmt3(a.mean) : fmt3(a.mean) + " (" + fmt3(a.std) + ")");
  }
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? " / " : "") + parts[i];
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

}  // namespace

std::string emit_table(const ResultStore& store, TableKind kind, TableFormat format) {
  std::map<RowKey, std::map<ColKey, std::vector<const TrialRecord*>>> grid;
  for (const auto& r : store.records) {
    const auto& f = r.factors;
    if (r.skipped || source_scenario(kind, f.feature_set) != f.scenario) continue;
    if (kind == TableKind::Multiclass && f.pipeline != PipelineKind::MD && f.pipeline != PipelineKind::BMD) continue;
    grid[{f.dataset, f.regime, f.algorithm, f.pipeline}][{f.availability.kind, f.feature_set}].push_back(&r);
  }

  std::vector<std::string> header{"dataset", "regime", "algorithm", "pipeline"};
  for (auto a : kColumns) {
    for (auto fs : kSubColumns) header.push_back(std::string(to_string(a)) + "/" + std::string(to_string(fs)));
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& [key, cols] : grid) {
    const auto& [dataset, regime, algo, pipe] = key;
    std::vector<std::string> row{dataset, std::string(to_string(regime)), std::string(to_string(algo)),
                                 std::string(to_string(pipe))};
    for (auto a : kColumns) {
      for (auto fs : kSubColumns) {
        const auto it = cols.find({a, fs});
        row.push_back(it == cols.end() ? "" : render_cell(it->second, cell_metrics(kind, fs), regime));
      }
    }
    rows.push_back(std::move(row));
  }

  std::ostringstream out;
  if (format == TableFormat::Csv) {
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_field(cells[i]);
      out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
  } else {
    auto line = [&](const std::vector<std::string>& cells) {
      out << '|';
      for (const auto& c : cells) out << ' ' << c << " |";
      out << '\n';
    };
    line(header);
    out << '|';
    for (std::size_t i = 0; i < header.size(); ++i) out << " --- |";
    out << '\n';
    for (const auto& r : rows) line(r);
  }
  return out.str();
}

namespace {

std::map<std::string, std::string> parse_key(std::string_view key) {
  static const std::set<std::string> kFactors = {"dataset",     "algorithm", "pipeline", "availability",
                                                 "feature_set", "regime",    "scenario"};
  std::map<std::string, std::string> filters;
  std::stringstream ss{std::string(key)};
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error("key item '" + item + "' is not factor=value");
    const auto name = item.substr(0, eq);
    if (!kFactors.count(name)) throw Error("unknown factor '" + name + "' in key");
    filters[name] = item.substr(eq + 1);
  }
  if (filters.empty()) throw Error("empty comparison key");
  return filters;
}

bool matches(const TrialFactors& f, const std::map<std::string, std::string>& filters) {
  for (const auto& [name, value] : filters) {
    std::string actual;
    if (name == "dataset") actual = f.dataset;
    if (name == "algorithm") actual = to_string(f.algorithm);
    if (name == "pipeline") actual = to_string(f.pipeline);
    if (name == "feature_set") actual = to_string(f.feature_set);
    if (name == "regime") actual = to_string(f.regime);
    if (name == "scenario") actual = to_string(f.scenario);
    if (name == "availability") {
      if (value == to_string(f.availability.kind) || value == availability_label(f.availability)) continue;
      return false;
    }
    if (actual != value) return false;
  }
  return true;
}

std::map<std::uint64_t, double> samples_for(const ResultStore& store, std::string_view key, std::string_view metric) {
  auto filters = parse_key(key);
  if (!filters.count("scenario")) {
    filters["scenario"] = (metric == "tpr_org" || metric == "tpr_adv") ? "Adversarial" : "Closed";
  }
  std::map<std::uint64_t, double> by_seed;
  std::set<std::string> cells;
  for (const auto& r : store.records) {
    if (!matches(r.factors, filters)) continue;
    const auto v = ResultStore::metric_value(r, metric);
    if (!v) continue;
    cells.insert(cell_key(r.factors));
    if (!by_seed.emplace(r.factors.seed, *v).second) {
      std::string list;
      for (const auto& c : cells) list += "\n  " + c;
      throw Error("key '" + std::string(key) + "' selects more than one result per trial; narrow it down:" + list);
    }
  }
  return by_seed;
}

}  // namespace

Comparison compare_methods(const ResultStore& store, std::string_view key_a, std::string_view key_b,
                           std::string_view metric, double alpha) {
  const auto a = samples_for(store, key_a, metric);
  const auto b = samples_for(store, key_b, metric);
  if (a.size() < 2 || b.size() < 2) {
    throw Error("insufficient samples: " + std::to_string(a.size()) + " and " + std::to_string(b.size()) +
                " trials of '" + std::string(metric) + "'; at least 2 each are needed");
  }
  Comparison c;
  for (const auto& [seed, v] : a) {
    const auto it = b.find(seed);
    if (it == b.end()) {
      throw Error("fairness violation: the two keys were not evaluated on the same trials (seed " +
                  std::to_string(seed) + " only in A)");
    }
    c.seeds.push_back(seed);
    c.a.push_back(v);
    c.b.push_back(it->second);
  }
  if (a.size() != b.size()) throw Error("fairness violation: the two keys were not evaluated on the same trials");
  c.test = welch(c.a, c.b, alpha, lower_is_better(metric));
  return c;
}

}  // namespace nidsbench::bench
