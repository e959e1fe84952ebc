#include "nidsbench/flowstore.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "nidsbench/rng.hpp"

namespace nidsbench {

using nlohmann::json;

namespace {

const std::set<std::string, std::less<>> kBaseAliases = {"duration", "tot_bytes", "tot_packets"};

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += "'" + n + "'";
  }
  return out;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? fallback : it->get<T>();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Splits one CSV line; double quotes group commas, "" is a literal quote.
std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.emplace_back(trim(cur));
  return fields;
}

bool is_nonfinite_token(std::string_view s) {
  std::string lower;
  for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (!lower.empty() && (lower[0] == '-' || lower[0] == '+')) lower.erase(0, 1);
  return lower.empty() || lower == "nan" || lower == "inf" || lower == "infinity";
}

std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_timestamp(std::string_view s, const std::string& format) {
  if (s.empty()) return std::nullopt;
  if (format == "epoch") return parse_number(s);
  std::tm tm{};
  std::string buf(s);
  const char* end = strptime(buf.c_str(), format.c_str(), &tm);
  if (end == nullptr) return std::nullopt;
  return static_cast<double>(timegm(&tm));
}

std::vector<std::string> stored_columns(const DatasetSpec& spec) {
  std::vector<std::string> cols;
  auto add = [&](const std::string& c) {
    if (!c.empty() && std::find(cols.begin(), cols.end(), c) == cols.end()) cols.push_back(c);
  };
  for (const auto& c : spec.complete) add(c);
  for (const auto& c : spec.essential) add(c);
  for (const auto& c : spec.port_columns) add(c);
  add(spec.protocol_column);
  add(spec.base.duration_column);
  for (const auto& c : spec.base.byte_columns) add(c);
  for (const auto& c : spec.base.packet_columns) add(c);
  for (const auto& rule : spec.derived_rules) {
    add(rule.feature);
    const auto expr = Expression::parse(rule.formula);
    for (const auto& v : expr.variables()) {
      if (!kBaseAliases.contains(v)) add(v);
    }
  }
  return cols;
}

ClassId parse_label(const DatasetSpec& spec, std::string_view raw) {
  if (!spec.label_map.empty()) {
    auto it = spec.label_map.find(std::string(raw));
    if (it != spec.label_map.end()) return it->second;
  } else {
    int id = 0;
    auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), id);
    if (ec == std::errc() && ptr == raw.data() + raw.size() && spec.class_table.contains(id)) return id;
  }
  throw Error("unknown class label '" + std::string(raw) + "'");
}

void refresh_metadata(Dataset& d) {
  d.class_counts.clear();
  for (const auto& [id, _] : d.spec.class_table) d.class_counts[id] = 0;
  d.has_timestamps = !d.records.empty();
  for (const auto& r : d.records) {
    ++d.class_counts[r.class_id];
    if (!r.timestamp) d.has_timestamps = false;
  }
  d.chronologically_sorted = d.has_timestamps;
  for (std::size_t i = 1; d.chronologically_sorted && i < d.records.size(); ++i) {
    if (*d.records[i].timestamp < *d.records[i - 1].timestamp) d.chronologically_sorted = false;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// DatasetSpec

std::vector<Ipv4Cidr> DatasetSpec::parsed_subnets() const {
  std::vector<Ipv4Cidr> out;
  out.reserve(internal_subnets.size());
  for (const auto& s : internal_subnets) out.push_back(Ipv4Cidr::parse(s));
  return out;
}

bool DatasetSpec::is_port_column(std::string_view name) const {
  return std::find(port_columns.begin(), port_columns.end(), name) != port_columns.end();
}

void DatasetSpec::validate() const {
  std::vector<std::string> problems;
  if (name.empty()) problems.emplace_back("name is empty");
  if (!class_table.contains(kBenign)) problems.emplace_back("class_table lacks benign id 0");
  if (class_table.size() < 2) problems.emplace_back("class_table needs at least one attack family");
  for (const auto& [label, id] : label_map) {
    if (!class_table.contains(id)) {
      problems.push_back("label '" + label + "' maps to undeclared class " + std::to_string(id));
    }
  }
  if (label_column.empty()) problems.emplace_back("label_column is empty");
  if (complete.empty()) problems.emplace_back("complete feature list is empty");
  if (essential.empty()) problems.emplace_back("essential feature list is empty");
  for (const auto& e : essential) {
    if (std::find(complete.begin(), complete.end(), e) == complete.end()) {
      problems.push_back("essential feature '" + e + "' is not in the complete list");
    }
  }
  // Essential is "about half" of Complete; only meaningful for realistic widths.
  if (complete.size() >= 8) {
    double ratio = static_cast<double>(essential.size()) / static_cast<double>(complete.size());
    if (ratio < 0.3 || ratio > 0.7) {
      problems.push_back("essential list has " + std::to_string(essential.size()) +
                         " of " + std::to_string(complete.size()) +
                         " complete features; expected about half");
    }
  }
  for (const auto& ip : ip_columns) {
    if (std::find(complete.begin(), complete.end(), ip) != complete.end()) {
      problems.push_back("IP column '" + ip + "' must not be a feature");
    }
  }
  if (src_ip_column && std::find(ip_columns.begin(), ip_columns.end(), *src_ip_column) == ip_columns.end()) {
    problems.push_back("src_ip_column '" + *src_ip_column + "' is not listed in ip_columns");
  }
  for (const auto& s : internal_subnets) {
    try {
      Ipv4Cidr::parse(s);
    } catch (const Error& e) {
      problems.emplace_back(e.what());
    }
  }
  for (const auto& rule : derived_rules) {
    try {
      Expression::parse(rule.formula);
    } catch (const Error& e) {
      problems.emplace_back(e.what());
    }
    if (rule.feature == base.duration_column ||
        (!base.byte_columns.empty() && rule.feature == base.byte_columns.front())) {
      problems.push_back("derived rule overwrites base column '" + rule.feature + "'");
    }
  }
  if (!base.byte_columns.empty() && base.packet_columns.empty()) {
    problems.emplace_back("base byte columns declared without packet columns");
  }
  if (base.duration_scale <= 0.0) problems.emplace_back("duration_scale must be > 0");
  if (max_flow_duration && *max_flow_duration <= 0.0) problems.emplace_back("max_flow_duration must be > 0");
  if (caps.benign_cap == 0 || caps.per_class_malicious_cap == 0) problems.emplace_back("caps must be >= 1");
  if (!problems.empty()) {
    std::string msg = "invalid dataset spec '" + name + "':";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw Error(msg);
  }
}

DatasetSpec parse_dataset_spec(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(std::string("dataset spec is not valid JSON: ") + e.what());
  }
  DatasetSpec s;
  try {
    s.name = j.at("name").get<std::string>();
    s.netflow_tool = get_or<std::string>(j, "netflow_tool", "");
    for (const auto& [k, v] : j.at("class_table").items()) s.class_table[std::stoi(k)] = v.get<std::string>();
    if (j.contains("label_map")) {
      for (const auto& [k, v] : j["label_map"].items()) s.label_map[k] = v.get<ClassId>();
    }
    s.complete = j.at("feature_lists").at("complete").get<std::vector<std::string>>();
    s.essential = j.at("feature_lists").at("essential").get<std::vector<std::string>>();
    s.label_column = j.at("label_column").get<std::string>();
    if (j.contains("timestamp_column") && !j["timestamp_column"].is_null()) {
      s.timestamp_column = j["timestamp_column"].get<std::string>();
    }
    s.timestamp_format = get_or<std::string>(j, "timestamp_format", "epoch");
    s.protocol_column = get_or<std::string>(j, "protocol_column", "");
    if (j.contains("src_ip_column") && !j["src_ip_column"].is_null()) {
      s.src_ip_column = j["src_ip_column"].get<std::string>();
    }
    s.port_columns = get_or<std::vector<std::string>>(j, "port_columns", {});
    s.ip_columns = get_or<std::vector<std::string>>(j, "ip_columns", {});
    s.ignore_columns = get_or<std::vector<std::string>>(j, "ignore_columns", {});
    s.internal_subnets = get_or<std::vector<std::string>>(j, "internal_subnets", {});
    if (j.contains("base_fields")) {
      const auto& b = j["base_fields"];
      s.base.duration_column = get_or<std::string>(b, "duration_column", "");
      s.base.duration_scale = get_or<double>(b, "duration_scale", 1.0);
      s.base.byte_columns = get_or<std::vector<std::string>>(b, "byte_columns", {});
      s.base.packet_columns = get_or<std::vector<std::string>>(b, "packet_columns", {});
    }
    if (j.contains("derived_rules")) {
      for (const auto& r : j["derived_rules"]) {
        s.derived_rules.push_back({r.at("feature").get<std::string>(), r.at("formula").get<std::string>()});
      }
    }
    s.unpredictable_features = get_or<std::vector<std::string>>(j, "unpredictable_features", {});
    if (j.contains("max_flow_duration") && !j["max_flow_duration"].is_null()) {
      s.max_flow_duration = j["max_flow_duration"].get<double>();
    }
    if (j.contains("caps")) {
      s.caps.benign_cap = get_or<std::size_t>(j["caps"], "benign_cap", s.caps.benign_cap);
      s.caps.per_class_malicious_cap =
          get_or<std::size_t>(j["caps"], "per_class_malicious_cap", s.caps.per_class_malicious_cap);
    }
    s.nonfinite_to_zero = get_or<bool>(j, "nonfinite_to_zero", false);
    std::string policy = get_or<std::string>(j, "invalid_rows", "error");
    if (policy == "drop") {
      s.invalid_rows = InvalidRowPolicy::Drop;
    } else if (policy != "error") {
      throw Error("invalid_rows must be 'error' or 'drop'");
    }
  } catch (const json::exception& e) {
    throw Error(std::string("dataset spec: ") + e.what());
  }
  s.validate();
  return s;
}

DatasetSpec load_dataset_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset spec " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_dataset_spec(ss.str());
}

std::string dataset_spec_to_json(const DatasetSpec& s) {
  json j;
  j["name"] = s.name;
  j["netflow_tool"] = s.netflow_tool;
  json table = json::object();
  for (const auto& [id, n] : s.class_table) table[std::to_string(id)] = n;
  j["class_table"] = table;
  if (!s.label_map.empty()) j["label_map"] = s.label_map;
  j["feature_lists"] = {{"complete", s.complete}, {"essential", s.essential}};
  j["label_column"] = s.label_column;
  if (s.timestamp_column) j["timestamp_column"] = *s.timestamp_column;
  j["timestamp_format"] = s.timestamp_format;
  j["protocol_column"] = s.protocol_column;
  if (s.src_ip_column) j["src_ip_column"] = *s.src_ip_column;
  j["port_columns"] = s.port_columns;
  j["ip_columns"] = s.ip_columns;
  j["ignore_columns"] = s.ignore_columns;
  j["internal_subnets"] = s.internal_subnets;
  j["base_fields"] = {{"duration_column", s.base.duration_column},
                      {"duration_scale", s.base.duration_scale},
                      {"byte_columns", s.base.byte_columns},
                      {"packet_columns", s.base.packet_columns}};
  json rules = json::array();
  for (const auto& r : s.derived_rules) rules.push_back({{"feature", r.feature}, {"formula", r.formula}});
  j["derived_rules"] = rules;
  j["unpredictable_features"] = s.unpredictable_features;
  if (s.max_flow_duration) j["max_flow_duration"] = *s.max_flow_duration;
  j["caps"] = {{"benign_cap", s.caps.benign_cap}, {"per_class_malicious_cap", s.caps.per_class_malicious_cap}};
  j["nonfinite_to_zero"] = s.nonfinite_to_zero;
  j["invalid_rows"] = s.invalid_rows == InvalidRowPolicy::Drop ? "drop" : "error";
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Dataset

std::optional<std::size_t> Dataset::feature_index(std::string_view name) const {
  auto it = std::find(feature_names.begin(), feature_names.end(), name);
  if (it == feature_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - feature_names.begin());
}

std::size_t Dataset::require_feature(std::string_view name) const {
  auto idx = feature_index(name);
  if (!idx) throw Error("dataset '" + spec.name + "' has no feature '" + std::string(name) + "'");
  return *idx;
}

std::vector<std::size_t> Dataset::rows_of_class(ClassId c) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].class_id == c) out.push_back(i);
  }
  return out;
}

std::vector<ClassId> Dataset::malicious_classes() const {
  std::vector<ClassId> out;
  for (const auto& [id, count] : class_counts) {
    if (id != kBenign && count > 0) out.push_back(id);
  }
  return out;
}

double Dataset::max_flow_duration() const {
  if (spec.max_flow_duration) return *spec.max_flow_duration;
  double m = 0.0;
  for (const auto& r : records) m = std::max(m, r.base.duration);
  return m;
}

Dataset load_dataset(const DatasetSpec& spec, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset file " + path.string());
  return load_dataset(spec, in, path.string());
}

Dataset load_dataset(const DatasetSpec& spec, std::istream& csv, std::string_view source_name) {
  spec.validate();
  const std::string src(source_name);
  std::string line;
  if (!std::getline(csv, line)) throw Error(src + ": missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const std::vector<std::string> header = split_csv(line);

  auto column_of = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };

  auto label_col = column_of(spec.label_column);
  if (!label_col) throw Error(src + ": missing label column '" + spec.label_column + "'");

  Dataset d;
  d.spec = spec;
  d.feature_names = stored_columns(spec);

  std::vector<std::string> missing;
  std::vector<std::size_t> feature_cols;
  for (const auto& f : d.feature_names) {
    auto c = column_of(f);
    if (!c) {
      missing.push_back(f);
    } else {
      feature_cols.push_back(*c);
    }
  }
  std::optional<std::size_t> ts_col, src_ip_col;
  if (spec.timestamp_column) {
    ts_col = column_of(*spec.timestamp_column);
    if (!ts_col) missing.push_back(*spec.timestamp_column);
  }
  if (spec.src_ip_column) {
    src_ip_col = column_of(*spec.src_ip_column);
    if (!src_ip_col) missing.push_back(*spec.src_ip_column);
  }
  std::optional<std::size_t> dst_ip_col;
  for (const auto& ip : spec.ip_columns) {
    if (spec.src_ip_column && ip == *spec.src_ip_column) continue;
    if (!dst_ip_col) dst_ip_col = column_of(ip);
  }
  if (!missing.empty()) throw Error(src + ": header lacks spec columns " + join(missing));

  auto fidx = [&](const std::string& n) { return *d.feature_index(n); };
  std::vector<bool> is_port(d.feature_names.size(), false);
  for (std::size_t i = 0; i < d.feature_names.size(); ++i) is_port[i] = spec.is_port_column(d.feature_names[i]);
  const std::optional<std::size_t> proto_idx =
      spec.protocol_column.empty() ? std::nullopt : std::optional(fidx(spec.protocol_column));
  const std::optional<std::size_t> dur_idx =
      spec.base.duration_column.empty() ? std::nullopt : std::optional(fidx(spec.base.duration_column));
  std::vector<std::size_t> byte_idx, pkt_idx;
  for (const auto& c : spec.base.byte_columns) byte_idx.push_back(fidx(c));
  for (const auto& c : spec.base.packet_columns) pkt_idx.push_back(fidx(c));
  const auto subnets = spec.parsed_subnets();

  std::size_t line_no = 1;
  while (std::getline(csv, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto where = [&] { return src + " line " + std::to_string(line_no); };
    auto fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw Error(where() + ": expected " + std::to_string(header.size()) + " fields, found " +
                  std::to_string(fields.size()));
    }
    FlowRecord r;
    r.source_line = line_no;
    try {
      r.class_id = parse_label(spec, fields[*label_col]);
    } catch (const Error& e) {
      throw Error(where() + ": " + e.what());
    }
    r.features.resize(d.feature_names.size());
    for (std::size_t i = 0; i < feature_cols.size(); ++i) {
      const std::string& raw = fields[feature_cols[i]];
      auto v = parse_number(raw);
      if (!v || !std::isfinite(*v)) {
        if (spec.nonfinite_to_zero && (v || is_nonfinite_token(raw))) {
          v = 0.0;
        } else {
          throw Error(where() + ": non-numeric value '" + raw + "' in column '" + d.feature_names[i] + "'");
        }
      }
      if (is_port[i] && (*v < 0 || *v > 65535 || *v != std::floor(*v))) {
        throw Error(where() + ": invalid port '" + raw + "' in column '" + d.feature_names[i] + "'");
      }
      r.features[i] = *v;
    }
    if (proto_idx) r.protocol = static_cast<int>(r.features[*proto_idx]);
    if (ts_col) r.timestamp = parse_timestamp(fields[*ts_col], spec.timestamp_format);
    if (ts_col && !r.timestamp && !fields[*ts_col].empty()) {
      throw Error(where() + ": unparseable timestamp '" + fields[*ts_col] + "'");
    }
    if (src_ip_col) {
      r.src_ip = parse_ipv4(fields[*src_ip_col]);
      if (r.src_ip) {
        r.src_internal = std::any_of(subnets.begin(), subnets.end(),
                                     [&](const Ipv4Cidr& c) { return c.contains(*r.src_ip); });
      }
    }
    if (dst_ip_col) r.dst_ip = parse_ipv4(fields[*dst_ip_col]);
    if (dur_idx) r.base.duration = r.features[*dur_idx] * spec.base.duration_scale;
    for (auto i : byte_idx) r.base.tot_bytes += r.features[i];
    for (auto i : pkt_idx) r.base.tot_packets += r.features[i];

    const auto& b = r.base;
    const char* violation = nullptr;
    if (b.duration < 0) {
      violation = "negative duration";
    } else if (b.tot_bytes < 0) {
      violation = "negative byte count";
    } else if (b.tot_packets < 0) {
      violation = "negative packet count";
    } else if (b.tot_packets > 0 && b.tot_bytes < b.tot_packets) {
      violation = "fewer bytes than packets";
    }
    if (violation) {
      if (spec.invalid_rows == InvalidRowPolicy::Drop) {
        ++d.dropped_rows;
        continue;
      }
      throw Error(where() + ": " + violation);
    }
    d.records.push_back(std::move(r));
  }
  refresh_metadata(d);
  return d;
}

Dataset apply_caps(const Dataset& d, std::uint64_t seed) {
  std::vector<std::size_t> keep;
  keep.reserve(d.records.size());
  for (const auto& [id, count] : d.class_counts) {
    std::size_t cap = id == kBenign ? d.spec.caps.benign_cap : d.spec.caps.per_class_malicious_cap;
    auto rows = d.rows_of_class(id);
    if (rows.size() <= cap) {
      keep.insert(keep.end(), rows.begin(), rows.end());
    } else {
      Rng rng(derive_seed(seed, "cap/" + std::to_string(id)));
      auto picked = rng.sample(rows, cap);
      keep.insert(keep.end(), picked.begin(), picked.end());
    }
  }
  std::sort(keep.begin(), keep.end());
  Dataset out;
  out.spec = d.spec;
  out.feature_names = d.feature_names;
  out.dropped_rows = d.dropped_rows;
  out.records.reserve(keep.size());
  for (auto i : keep) out.records.push_back(d.records[i]);
  refresh_metadata(out);
  return out;
}

int encode_port(long long port) {
  if (port < 0 || port > 65535) throw Error("port " + std::to_string(port) + " outside 0..65535");
  if (port <= 1023) return 0;
  if (port <= 49151) return 1;
  return 2;
}

FeatureView project_records(const Dataset& d, std::span<const FlowRecord> records,
                            std::span<const std::size_t> row_ids, FeatureSet fs) {
  if (row_ids.size() != records.size()) throw Error("project: row id count does not match record count");
  const auto& names = d.spec.feature_list(fs);
  std::vector<std::size_t> src;
  std::vector<std::string> missing;
  for (const auto& n : names) {
    auto idx = d.feature_index(n);
    if (!idx) {
      missing.push_back(n);
    } else {
      src.push_back(*idx);
    }
  }
  if (!missing.empty()) throw Error("project: dataset lacks features " + join(missing));
  for (const auto& n : names) {
    if (std::find(d.spec.ip_columns.begin(), d.spec.ip_columns.end(), n) != d.spec.ip_columns.end()) {
      throw Error("project: IP column '" + n + "' cannot be a feature");
    }
  }
  std::vector<bool> port(names.size());
  for (std::size_t c = 0; c < names.size(); ++c) port[c] = d.spec.is_port_column(names[c]);

  FeatureView v;
  v.feature_set = fs;
  v.column_names = names;
  v.row_index.assign(row_ids.begin(), row_ids.end());
  v.values.resize(records.size() * names.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& f = records[r].features;
    double* out = v.values.data() + r * names.size();
    for (std::size_t c = 0; c < names.size(); ++c) {
      double x = f[src[c]];
      out[c] = port[c] ? encode_port(static_cast<long long>(x)) : x;
    }
  }
  return v;
}

FeatureView project(const Dataset& d, FeatureSet fs) {
  std::vector<std::size_t> ids(d.records.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  return project_records(d, d.records, ids, fs);
}

}  // namespace nidsbench
