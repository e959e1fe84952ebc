#pragma once

#include <string>

#include "nidsbench/bench/store.hpp"
#include "nidsbench/stats.hpp"

namespace nidsbench::bench {

enum class TableKind { Baseline, OpenWorld, Multiclass, TrainRuntime, TestRuntime };
enum class TableFormat { Csv, Markdown };

std::string_view to_string(TableKind k);
TableKind table_kind_from_string(std::string_view s);
TableFormat table_format_from_string(std::string_view s);

/// Rows are (dataset, regime, algorithm, pipeline); columns are availability
/// levels with Complete / Essential sub-columns. Static cells read
/// "mean (std)", temporal cells a single value, missing cells are blank.
///   baseline:   closed world, "fpr / tpr"
///   open_world: Complete = unknown attacks "fpr / tpr",
///               Essential = adversarial "tpr_org / tpr_adv"
///   multiclass: closed world malicious accuracy (MD, BMD)
///   *_runtime:  wall seconds per trial
std::string emit_table(const ResultStore& store, TableKind kind, TableFormat format);

/// Whether `metric` improves downwards (fpr and runtimes).
bool lower_is_better(std::string_view metric);

struct Comparison {
  TestResult test;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<std::uint64_t> seeds;
};

/// Keys filter records by factors: "pipeline=BMD,algorithm=HGB,availability=Limited".
/// Unset scenario defaults to Closed (Adversarial for tpr_org / tpr_adv).
/// Samples pair by trial seed; each key must select one cell and both keys
/// the same trials.
Comparison compare_methods(const ResultStore& store, std::string_view key_a, std::string_view key_b,
                           std::string_view metric, double alpha = 0.05);

}  // namespace nidsbench::bench
