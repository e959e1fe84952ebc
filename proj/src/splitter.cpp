#include "nidsbench/splitter.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

#include "json.hpp"
#include "nidsbench/hash.hpp"
#include "nidsbench/rng.hpp"

namespace nidsbench {

std::string_view to_string(Availability a) {
  switch (a) {
    case Availability::Limited:
      return "Limited";
    case Availability::Scarce:
      return "Scarce";
    case Availability::Moderate:
      return "Moderate";
    case Availability::Abundant:
      return "Abundant";
  }
  return "?";
}

Availability availability_from_string(std::string_view s) {
  for (auto a : {Availability::Limited, Availability::Scarce, Availability::Moderate, Availability::Abundant}) {
    if (to_string(a) == s) return a;
  }
  throw Error("unknown availability level '" + std::string(s) + "'");
}

std::string_view to_string(Regime r) { return r == Regime::Static ? "Static" : "Temporal"; }

Regime regime_from_string(std::string_view s) {
  if (s == "Static") return Regime::Static;
  if (s == "Temporal") return Regime::Temporal;
  throw Error("unknown regime '" + std::string(s) + "'");
}

double AvailabilityLevel::train_fraction() const {
  switch (kind) {
    case Availability::Scarce:
      return scarce_fraction;
    case Availability::Moderate:
      return 0.40;
    case Availability::Abundant:
      return 0.80;
    case Availability::Limited:
      break;
  }
  return 0.0;
}

void AvailabilityLevel::validate() const {
  if (kind == Availability::Scarce && !(scarce_fraction > 0.0 && scarce_fraction <= 0.8)) {
    throw Error("scarce fraction must lie in (0, 0.8]");
  }
  if (kind == Availability::Limited && limited_per_class == 0) throw Error("limited_per_class must be >= 1");
}

std::size_t eval_size(std::size_t n) {
  return static_cast<std::size_t>(std::floor(kEvalFraction * static_cast<double>(n) + 1e-9));
}

std::size_t train_size(std::size_t n, const AvailabilityLevel& a, std::size_t remaining) {
  if (remaining == 0) return 0;
  switch (a.kind) {
    case Availability::Limited:
      return std::min(a.limited_per_class, remaining);
    case Availability::Abundant:
      return remaining;
    default: {
      auto k = static_cast<std::size_t>(std::floor(a.train_fraction() * static_cast<double>(n) + 1e-9));
      return std::clamp<std::size_t>(k, 1, remaining);
    }
  }
}

namespace {

std::vector<std::size_t> flatten(const ClassIndexSets& sets) {
  std::vector<std::size_t> out;
  for (const auto& [_, rows] : sets) out.insert(out.end(), rows.begin(), rows.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::map<ClassId, std::vector<std::size_t>> rows_by_class(const Dataset& d) {
  std::map<ClassId, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < d.records.size(); ++i) out[d.records[i].class_id].push_back(i);
  for (const auto& [c, rows] : out) {
    if (rows.size() < 2) {
      throw Error("class " + std::to_string(c) + " has " + std::to_string(rows.size()) +
                  " sample(s); splitting needs at least 2");
    }
  }
  return out;
}

void note_limited_shortfall(TrialSplit& s, ClassId c, std::size_t remaining) {
  if (s.availability.kind == Availability::Limited && remaining < s.availability.limited_per_class) {
    s.warnings.push_back("class " + std::to_string(c) + ": only " + std::to_string(remaining) +
                         " samples left for Limited training; took all");
  }
}

}  // namespace

std::vector<std::size_t> TrialSplit::train_rows() const { return flatten(train_idx); }
std::vector<std::size_t> TrialSplit::eval_rows() const { return flatten(eval_idx); }

std::size_t TrialSplit::train_count(ClassId c) const {
  auto it = train_idx.find(c);
  return it == train_idx.end() ? 0 : it->second.size();
}

std::size_t TrialSplit::eval_count(ClassId c) const {
  auto it = eval_idx.find(c);
  return it == eval_idx.end() ? 0 : it->second.size();
}

std::string TrialSplit::id() const {
  std::string canon;
  canon += "seed=" + std::to_string(seed) + ";avail=" + std::string(to_string(availability.kind));
  if (availability.kind == Availability::Scarce) canon += ":" + std::to_string(availability.scarce_fraction);
  canon += ";regime=" + std::string(to_string(regime));
  if (excluded_class) canon += ";excl=" + std::to_string(*excluded_class);
  for (const auto* sets : {&train_idx, &eval_idx}) {
    canon += sets == &train_idx ? "|T" : "|E";
    for (const auto& [c, rows] : *sets) {
      canon += ";" + std::to_string(c) + ":";
      for (auto r : rows) canon += std::to_string(r) + ",";
    }
  }
  return sha256_hex(canon).substr(0, 16);
}

std::string TrialSplit::manifest_json() const {
  nlohmann::json j;
  j["split_id"] = id();
  j["seed"] = seed;
  j["availability"] = to_string(availability.kind);
  j["regime"] = to_string(regime);
  if (excluded_class) j["excluded_class"] = *excluded_class;
  j["warnings"] = warnings;
  nlohmann::json classes = nlohmann::json::object();
  for (const auto& [c, rows] : eval_idx) {
    auto t = train_idx.find(c);
    classes[std::to_string(c)] = {{"train", t == train_idx.end() ? std::vector<std::size_t>{} : t->second},
                                  {"eval", rows}};
  }
  j["classes"] = classes;
  if (!temporal_gap.empty()) {
    nlohmann::json gaps = nlohmann::json::object();
    for (const auto& [c, g] : temporal_gap) gaps[std::to_string(c)] = g;
    j["temporal_gap"] = gaps;
  }
  return j.dump();
}

TrialSplit static_split(const Dataset& d, const AvailabilityLevel& a, std::uint64_t seed) {
  TrialSplit s = static_split(d, a, derive_seed(seed, "eval"), derive_seed(seed, "train"));
  s.seed = seed;
  return s;
}

TrialSplit static_split(const Dataset& d, const AvailabilityLevel& a, std::uint64_t eval_seed,
                        std::uint64_t train_seed) {
  a.validate();
  TrialSplit s;
  s.seed = derive_seed(eval_seed, train_seed);
  s.availability = a;
  s.regime = Regime::Static;
  for (const auto& [c, rows] : rows_by_class(d)) {
    Rng erng(derive_seed(eval_seed, "E/" + std::to_string(c)));
    auto eval = erng.sample(rows, eval_size(rows.size()));
    std::vector<std::size_t> remaining;
    std::set_difference(rows.begin(), rows.end(), eval.begin(), eval.end(), std::back_inserter(remaining));
    note_limited_shortfall(s, c, remaining.size());
    Rng trng(derive_seed(train_seed, "T/" + std::to_string(c)));
    s.train_idx[c] = trng.sample(remaining, train_size(rows.size(), a, remaining.size()));
    s.eval_idx[c] = std::move(eval);
  }
  return s;
}

TrialSplit temporal_split(const Dataset& d, const AvailabilityLevel& a) {
  a.validate();
  if (!d.has_timestamps) throw Error("temporal regime unsupported for this dataset");
  TrialSplit s;
  s.availability = a;
  s.regime = Regime::Temporal;
  for (auto [c, rows] : rows_by_class(d)) {
    // Ties keep file order.
    std::stable_sort(rows.begin(), rows.end(), [&](std::size_t x, std::size_t y) {
      return *d.records[x].timestamp < *d.records[y].timestamp;
    });
    std::size_t n = rows.size();
    std::size_t ne = eval_size(n);
    std::size_t remaining = n - ne;
    std::size_t nt = train_size(n, a, remaining);
    note_limited_shortfall(s, c, remaining);
    std::vector<std::size_t> train(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(nt));
    std::vector<std::size_t> eval(rows.end() - static_cast<std::ptrdiff_t>(ne), rows.end());
    std::sort(train.begin(), train.end());
    std::sort(eval.begin(), eval.end());
    s.train_idx[c] = std::move(train);
    s.eval_idx[c] = std::move(eval);
    s.temporal_gap[c] = remaining - nt;
  }
  return s;
}

TrialSplit exclude_class(const TrialSplit& s, ClassId c) {
  if (c == kBenign) throw Error("cannot exclude the benign class");
  if (s.train_count(c) == 0 && s.eval_count(c) == 0) {
    throw Error("class " + std::to_string(c) + " is not present in the split");
  }
  TrialSplit out = s;
  out.train_idx[c].clear();
  out.excluded_class = c;
  return out;
}

}  // namespace nidsbench
