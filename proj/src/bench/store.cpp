#include "nidsbench/bench/store.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include "json_io.hpp"
#include "nidsbench/bench/records.hpp"
#include "nidsbench/hash.hpp"
#include "nidsbench/parallel.hpp"

namespace nidsbench::bench {

using io::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kFormat = "nidsbench-store/1";
constexpr const char* kTrialMarker = "trial_complete";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    out.flush();
    if (!out) throw Error("cannot write " + p.string());
  }
  fs::rename(tmp, p);
}

std::string marker_line(const std::string& trial_key) { return json{{kTrialMarker, trial_key}}.dump(); }

struct ParsedRecords {
  std::vector<TrialRecord> records;
  std::set<std::string> trials;
  std::string complete_text;  // file prefix up to the last completion marker
};

// A trial's records only count once its marker follows them; anything after
// the last marker is an interrupted trial and is dropped.
ParsedRecords parse_records(const std::string& text) {
  ParsedRecords out;
  std::vector<TrialRecord> pending;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string::npos) break;  // torn final line
    const std::string line = text.substr(pos, nl - pos);
    const std::size_t next = nl + 1;
    if (!line.empty()) {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception&) {
        // A torn write can only be the final line.
        if (text.find('\n', next) == std::string::npos) break;
        throw Error("records file: malformed line at byte " + std::to_string(pos));
      }
      if (j.contains(kTrialMarker)) {
        out.trials.insert(j[kTrialMarker].get<std::string>());
        for (auto& r : pending) out.records.push_back(std::move(r));
        pending.clear();
        out.complete_text = text.substr(0, next);
      } else {
        pending.push_back(io::record_from_json(j));
      }
    }
    pos = next;
  }
  return out;
}

}  // namespace

std::string FactorLedger::to_json() const {
  json j;
  j["entries"] = json::object();
  for (const auto& [key, e] : entries) {
    j["entries"][key] = {
        {"P", {{"netflow_tool", e.netflow_tool}, {"feature_set", std::string(nidsbench::to_string(e.feature_set))}}},
        {"D", {{"dataset", e.dataset}, {"availability", io::availability_to_json(e.availability)}}},
        {"S",
         {{"pipeline", std::string(nidsbench::to_string(e.pipeline))},
          {"learner", std::string(nidsbench::to_string(e.learner))}}}};
  }
  j["H"] = json::parse(hardware.to_json());
  j["U"] = {{"master_seed", master_seed},
            {"repetitions", repetitions_json.empty() ? json() : json::parse(repetitions_json)}};
  j["skipped_cells"] = json::array();
  for (const auto& s : skipped_cells) j["skipped_cells"].push_back({{"cell", s.cell}, {"reason", s.reason}});
  return j.dump(2);
}

FactorLedger FactorLedger::from_json(std::string_view text) {
  FactorLedger l;
  try {
    const json j = json::parse(text);
    for (const auto& [key, e] : j.at("entries").items()) {
      LedgerEntry le;
      le.netflow_tool = e.at("P").at("netflow_tool").get<std::string>();
      le.feature_set = feature_set_from_string(e.at("P").at("feature_set").get<std::string>());
      le.dataset = e.at("D").at("dataset").get<std::string>();
      le.availability = io::availability_from_json(e.at("D").at("availability"));
      le.pipeline = pipeline_kind_from_string(e.at("S").at("pipeline").get<std::string>());
      le.learner = learner_kind_from_string(e.at("S").at("learner").get<std::string>());
      l.entries[key] = le;
    }
    l.hardware = HardwareDescriptor::from_json(j.at("H").dump());
    l.master_seed = j.at("U").at("master_seed").get<std::uint64_t>();
    if (!j["U"]["repetitions"].is_null()) l.repetitions_json = j["U"]["repetitions"].dump();
    for (const auto& s : j.value("skipped_cells", json::array())) {
      l.skipped_cells.push_back({s.at("cell").get<std::string>(), s.at("reason").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw Error(std::string("ledger: ") + e.what());
  }
  return l;
}

std::string ResultStore::content_hash() const {
  std::vector<std::string> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(canonical_record(r));
  std::sort(lines.begin(), lines.end());
  std::string all;
  for (const auto& l : lines) all += l + "\n";
  return sha256_hex(all);
}

std::optional<double> ResultStore::metric_value(const TrialRecord& r, std::string_view metric) {
  if (r.skipped) return std::nullopt;
  const bool rates = r.factors.scenario != Scenario::Adversarial;
  if (metric == "tpr" && rates) return r.metrics.tpr;
  if (metric == "fpr" && rates) return r.metrics.fpr;
  if (metric == "acc_mal" || metric == "acc") return r.metrics.acc_mal;
  if (metric == "acc_mal_strict" || metric == "acc_strict") return r.metrics.acc_mal_strict;
  if (metric == "tpr_org" && r.adversarial) return r.adversarial->tpr_org;
  if (metric == "tpr_adv" && r.adversarial) return r.adversarial->tpr_adv;
  if (metric == "train_time") return r.train_wall_seconds;
  if (metric == "test_time") return r.infer_wall_seconds;
  return std::nullopt;
}

std::map<std::string, CellAggregates> ResultStore::aggregates() const {
  static const char* kMetrics[] = {"tpr",     "fpr",     "acc_mal",    "acc_mal_strict",
                                   "tpr_org", "tpr_adv", "train_time", "test_time"};
  std::map<std::string, std::map<std::string, std::vector<double>>> samples;
  for (const auto& r : records) {
    for (const char* m : kMetrics) {
      if (auto v = metric_value(r, m)) samples[cell_key(r.factors)][m].push_back(*v);
    }
  }
  std::map<std::string, CellAggregates> out;
  for (const auto& [cell, metrics] : samples) {
    for (const auto& [m, v] : metrics) out[cell][m] = aggregate(v, m);
  }
  return out;
}

void ResultStore::save(const fs::path& dir) const {
  fs::create_directories(dir);
  // Group records by trial so the file keeps the marker discipline.
  std::map<std::string, std::vector<const TrialRecord*>> by_trial;
  for (const auto& r : records) {
    by_trial[trial_key(r.factors)].push_back(&r);
  }
  std::string text;
  for (const auto& key : completed_trials) {
    for (const auto* r : by_trial[key]) text += record_to_json(*r) + "\n";
    text += marker_line(key) + "\n";
  }
  write_file(dir / StoreLayout::kRecords, text);
  finalize_store(dir, config_json, ledger, complete);
}

void finalize_store(const fs::path& dir, const std::string& config_json, const FactorLedger& ledger, bool complete) {
  write_file(dir / StoreLayout::kConfig, config_json);
  write_file(dir / StoreLayout::kLedger, ledger.to_json());
  const std::string records_text = read_file(dir / StoreLayout::kRecords);
  const auto parsed = parse_records(records_text);
  ResultStore tmp;
  tmp.records = parsed.records;
  json manifest = {{"format", kFormat},
                   {"content_hash", tmp.content_hash()},
                   {"record_count", parsed.records.size()},
                   {"trial_count", parsed.trials.size()},
                   {"complete", complete},
                   {"files",
                    {{StoreLayout::kRecords, sha256_hex(records_text)},
                     {StoreLayout::kConfig, sha256_hex(config_json)},
                     {StoreLayout::kLedger, sha256_hex(ledger.to_json())}}}};
  write_file(dir / StoreLayout::kManifest, manifest.dump(2));
}

ResultStore ResultStore::load(const fs::path& dir) {
  ResultStore s;
  const std::string records_text = read_file(dir / StoreLayout::kRecords);
  auto parsed = parse_records(records_text);
  s.records = std::move(parsed.records);
  s.completed_trials = std::move(parsed.trials);
  s.config_json = read_file(dir / StoreLayout::kConfig);
  const std::string ledger_text = read_file(dir / StoreLayout::kLedger);
  s.ledger = FactorLedger::from_json(ledger_text);
  const json manifest = json::parse(read_file(dir / StoreLayout::kManifest));
  if (manifest.value("format", "") != kFormat) throw Error("store " + dir.string() + ": unknown format");
  const auto& files = manifest.at("files");
  const std::pair<const char*, const std::string*> checked[] = {{StoreLayout::kRecords, &records_text},
                                                                {StoreLayout::kConfig, &s.config_json},
                                                                {StoreLayout::kLedger, &ledger_text}};
  for (const auto& [name, text] : checked) {
    if (files.at(name).get<std::string>() != sha256_hex(*text)) {
      throw Error("store " + dir.string() + ": " + name + " does not match the manifest");
    }
  }
  if (manifest.at("content_hash").get<std::string>() != s.content_hash()) {
    throw Error("store " + dir.string() + ": content hash mismatch");
  }
  s.complete = manifest.value("complete", false);
  for (const auto& r : s.records) {
    if (!s.ledger.entries.count(ledger_key(r.factors))) {
      throw Error("store " + dir.string() + ": record '" + ledger_key(r.factors) + "' has no ledger entry");
    }
  }
  return s;
}

struct StoreWriter::State {
  fs::path dir;
  std::set<std::string> existing;
  std::ofstream out;
  BoundedQueue<TrialBatch> queue;
  std::thread thread;
  std::size_t written = 0;
  std::string error;  // set by the writer thread
  std::mutex mu;
  bool finished = false;

  explicit State(std::size_t capacity) : queue(capacity) {}

  void run() {
    while (auto batch = queue.pop()) {
      {
        std::lock_guard lock(mu);
        if (!error.empty()) continue;  // drain after a failure
      }
      for (const auto& r : batch->records) out << record_to_json(r) << '\n';
      out << marker_line(batch->trial_key) << '\n';
      out.flush();
      std::lock_guard lock(mu);
      if (!out) {
        error = "write to " + (dir / StoreLayout::kRecords).string() + " failed";
      } else {
        ++written;
      }
    }
  }
};

StoreWriter::StoreWriter(fs::path dir, bool resume, std::size_t queue_capacity)
    : state_(std::make_unique<State>(queue_capacity)) {
  state_->dir = dir;
  fs::create_directories(dir);
  const fs::path records = dir / StoreLayout::kRecords;
  std::string keep;
  if (fs::exists(records) && fs::file_size(records) > 0) {
    if (!resume) throw Error("store " + dir.string() + " already holds results; resume it or choose a new directory");
    auto parsed = parse_records(read_file(records));
    state_->existing = std::move(parsed.trials);
    keep = std::move(parsed.complete_text);
  }
  write_file(records, keep);
  state_->out.open(records, std::ios::binary | std::ios::app);
  if (!state_->out) throw Error("cannot open " + records.string());
  state_->thread = std::thread([s = state_.get()] { s->run(); });
}

StoreWriter::~StoreWriter() {
  if (!state_->finished) {
    state_->queue.close();
    if (state_->thread.joinable()) state_->thread.join();
  }
}

const std::set<std::string>& StoreWriter::existing_trials() const { return state_->existing; }

void StoreWriter::submit(TrialBatch batch) {
  {
    std::lock_guard lock(state_->mu);
    if (!state_->error.empty()) {
      throw Error(state_->error + " after " + std::to_string(state_->written) + " completed trials");
    }
  }
  state_->queue.push(std::move(batch));
}

std::size_t StoreWriter::finish() {
  if (!state_->finished) {
    state_->queue.close();
    state_->thread.join();
    state_->out.close();
    state_->finished = true;
  }
  if (!state_->error.empty()) {
    throw Error(state_->error + " after " + std::to_string(state_->written) + " completed trials");
  }
  return state_->written;
}

}  // namespace nidsbench::bench
