#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nidsbench/cidr.hpp"
#include "nidsbench/common.hpp"
#include "nidsbench/expression.hpp"

namespace nidsbench {

inline constexpr int kProtocolUdp = 17;

/// The three quantities an attacker controls (or is constrained by).
struct BaseFields {
  double duration = 0.0;     // seconds
  double tot_bytes = 0.0;    // bytes, both directions
  double tot_packets = 0.0;  // packets, both directions
};

/// One NetFlow sample. `features` is aligned with Dataset::feature_names.
struct FlowRecord {
  std::vector<double> features;
  ClassId class_id = kBenign;
  std::optional<double> timestamp;
  int protocol = 0;
  bool src_internal = false;
  std::optional<std::uint32_t> src_ip;
  std::optional<std::uint32_t> dst_ip;
  BaseFields base;
  std::size_t source_line = 0;
};

struct DerivedRule {
  std::string feature;
  std::string formula;
};

/// How the BaseFields are read from (and written back to) feature columns.
struct BaseFieldMap {
  std::string duration_column;
  double duration_scale = 1.0;              // column value * scale = seconds
  std::vector<std::string> byte_columns;    // summed; the first one receives injected bytes
  std::vector<std::string> packet_columns;  // summed
};

struct SamplingCaps {
  std::size_t benign_cap = 500'000;
  std::size_t per_class_malicious_cap = 166'000;
};

enum class InvalidRowPolicy { Error, Drop };

struct DatasetSpec {
  std::string name;
  std::string netflow_tool;
  std::map<ClassId, std::string> class_table;
  std::map<std::string, ClassId> label_map;  // raw label -> id; empty means labels are ids
  std::vector<std::string> complete;
  std::vector<std::string> essential;
  std::string label_column;
  std::optional<std::string> timestamp_column;
  std::string timestamp_format = "epoch";  // "epoch" or a strptime pattern
  std::string protocol_column;
  std::optional<std::string> src_ip_column;
  std::vector<std::string> port_columns;
  std::vector<std::string> ip_columns;
  std::vector<std::string> ignore_columns;
  std::vector<std::string> internal_subnets;  // CIDR strings
  BaseFieldMap base;
  std::vector<DerivedRule> derived_rules;
  std::vector<std::string> unpredictable_features;
  std::optional<double> max_flow_duration;  // seconds; defaults to the max observed
  SamplingCaps caps;
  bool nonfinite_to_zero = false;
  InvalidRowPolicy invalid_rows = InvalidRowPolicy::Error;

  const std::vector<std::string>& feature_list(FeatureSet fs) const {
    return fs == FeatureSet::Complete ? complete : essential;
  }
  std::vector<Ipv4Cidr> parsed_subnets() const;
  bool is_port_column(std::string_view name) const;

  /// Throws Error describing every violated invariant.
  void validate() const;
};

DatasetSpec parse_dataset_spec(std::string_view json_text);
DatasetSpec load_dataset_spec(const std::filesystem::path& path);
std::string dataset_spec_to_json(const DatasetSpec& spec);

struct Dataset {
  DatasetSpec spec;
  std::vector<std::string> feature_names;
  std::vector<FlowRecord> records;
  std::map<ClassId, std::size_t> class_counts;
  bool has_timestamps = false;
  bool chronologically_sorted = false;
  std::size_t dropped_rows = 0;

  std::optional<std::size_t> feature_index(std::string_view name) const;
  std::size_t require_feature(std::string_view name) const;
  std::vector<std::size_t> rows_of_class(ClassId c) const;
  std::vector<ClassId> malicious_classes() const;
  /// Spec value if set, else the largest observed duration.
  double max_flow_duration() const;
};

Dataset load_dataset(const DatasetSpec& spec, const std::filesystem::path& path);
Dataset load_dataset(const DatasetSpec& spec, std::istream& csv, std::string_view source_name = "<stream>");

/// Uniformly down-samples (without replacement) every class above its cap.
/// Retained rows keep their original relative order.
Dataset apply_caps(const Dataset& d, std::uint64_t seed);

/// IANA category: 0 well-known (0-1023), 1 registered (1024-49151), 2 dynamic.
int encode_port(long long port);

/// Column-projected numeric matrix (row-major) over a subset of records.
struct FeatureView {
  FeatureSet feature_set = FeatureSet::Complete;
  std::vector<std::string> column_names;
  std::vector<double> values;
  std::vector<std::size_t> row_index;  // view row -> record index

  std::size_t rows() const { return row_index.size(); }
  std::size_t cols() const { return column_names.size(); }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * cols(), cols()};
  }
};

FeatureView project(const Dataset& d, FeatureSet fs);
/// Projects arbitrary records sharing `d`'s feature layout; `row_ids` label the rows.
FeatureView project_records(const Dataset& d, std::span<const FlowRecord> records,
                            std::span<const std::size_t> row_ids, FeatureSet fs);

}  // namespace nidsbench
