#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nidsbench/bench/hardware.hpp"
#include "nidsbench/evaluator.hpp"
#include "nidsbench/stats.hpp"

namespace nidsbench::bench {

/// Provenance of one group of results: preprocessing (P), data (D) and
/// system (S) per entry; hardware (H) and unpredictability (U) per campaign.
struct LedgerEntry {
  std::string netflow_tool;  // P
  FeatureSet feature_set = FeatureSet::Complete;
  std::string dataset;  // D
  AvailabilityLevel availability;
  PipelineKind pipeline = PipelineKind::BD;  // S
  LearnerKind learner = LearnerKind::DT;
};

struct SkippedCell {
  std::string cell;
  std::string reason;
};

struct FactorLedger {
  std::map<std::string, LedgerEntry> entries;  // keyed by ledger_key()
  HardwareDescriptor hardware;
  std::uint64_t master_seed = 0;
  std::string repetitions_json;
  std::vector<SkippedCell> skipped_cells;

  std::string to_json() const;
  static FactorLedger from_json(std::string_view text);
};

using CellAggregates = std::map<std::string, Aggregate>;  // metric -> aggregate

struct ResultStore {
  std::vector<TrialRecord> records;
  std::string config_json;
  FactorLedger ledger;
  std::set<std::string> completed_trials;
  bool complete = false;

  /// SHA-256 over the sorted canonical records (wall times excluded).
  std::string content_hash() const;
  /// Per cell_key(), aggregates of every metric present in its non-skipped
  /// records: tpr, fpr, acc_mal, acc_mal_strict, tpr_org, tpr_adv,
  /// train_time, test_time.
  std::map<std::string, CellAggregates> aggregates() const;
  /// Values of `metric` for one record; empty when absent.
  static std::optional<double> metric_value(const TrialRecord& r, std::string_view metric);

  /// Writes every file from scratch.
  void save(const std::filesystem::path& dir) const;
  /// Reads a store directory, drops a trailing incomplete trial, and checks
  /// the manifest hash and that every record resolves in the ledger.
  static ResultStore load(const std::filesystem::path& dir);
};

/// Files of a store directory.
struct StoreLayout {
  static constexpr const char* kRecords = "records.jsonl";
  static constexpr const char* kConfig = "config.json";
  static constexpr const char* kLedger = "ledger.json";
  static constexpr const char* kManifest = "manifest.json";
};

/// Incremental persistence: producers hand over whole trials; one thread
/// appends them to the records file, each followed by a completion marker.
class StoreWriter {
 public:
  struct TrialBatch {
    std::string trial_key;
    std::vector<TrialRecord> records;
  };

  /// Opens `dir`, keeping the complete trials already there when `resume`.
  StoreWriter(std::filesystem::path dir, bool resume, std::size_t queue_capacity = 8);
  ~StoreWriter();
  StoreWriter(const StoreWriter&) = delete;
  StoreWriter& operator=(const StoreWriter&) = delete;

  /// Trials persisted by an earlier run (resume only).
  const std::set<std::string>& existing_trials() const;
  /// Blocks when the queue is full. Throws if the writer has failed.
  void submit(TrialBatch batch);
  /// Drains the queue and stops the thread. Returns the number of trials
  /// written by this writer; rethrows a write failure with that count.
  std::size_t finish();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

/// Writes config, ledger and manifest next to an existing records file.
void finalize_store(const std::filesystem::path& dir, const std::string& config_json, const FactorLedger& ledger,
                    bool complete);

}  // namespace nidsbench::bench
