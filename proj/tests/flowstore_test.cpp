#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "nidsbench/flowstore.hpp"
#include "test_support.hpp"

using namespace nidsbench;
using namespace nidsbench::testing;

namespace {

Dataset load_text(const std::string& text, const DatasetSpec& spec = toy_spec()) {
  std::istringstream in(text);
  return load_dataset(spec, in, "t.csv");
}

// Counts label values by splitting lines directly, independent of the loader.
std::map<int, std::size_t> count_labels(const std::string& csv) {
  std::map<int, std::size_t> counts;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++counts[std::stoi(line.substr(line.rfind(',') + 1))];
  }
  return counts;
}

ToyRow row(int label, double ts = 1.0) { return {ts, "10.1.2.3", 5000, 80, 6, 1.5, 300, 100, 3, 1, label}; }

}  // namespace

TEST(Flowstore, CountsMatchLineCounting) {
  std::string csv = std::string(toy_header()) + "\n";
  const int labels[] = {0, 1, 0, 0, 1, 0, 1, 0, 1, 0};
  for (int i = 0; i < 10; ++i) csv += toy_line(row(labels[i], i)) + "\n";
  auto d = load_text(csv);
  auto oracle = count_labels(csv);
  EXPECT_EQ(d.records.size(), 10u);
  EXPECT_EQ(d.class_counts.at(0), oracle[0]);
  EXPECT_EQ(d.class_counts.at(1), oracle[1]);
  EXPECT_EQ(d.class_counts.at(0), 6u);
  EXPECT_EQ(d.class_counts.at(1), 4u);
  EXPECT_EQ(d.class_counts.at(2), 0u);
}

TEST(Flowstore, LargerRandomFileCounts) {
  auto csv = toy_csv({300, 120, 55, 7}, 4);
  auto d = load_text(csv);
  auto oracle = count_labels(csv);
  std::size_t total = 0;
  for (const auto& [c, n] : d.class_counts) {
    EXPECT_EQ(n, oracle[c]) << "class " << c;
    total += n;
  }
  EXPECT_EQ(total, d.records.size());
}

TEST(Flowstore, EmptyFileHasZeroCounts) {
  auto d = load_text(std::string(toy_header()) + "\n");
  EXPECT_TRUE(d.records.empty());
  for (const auto& [c, n] : d.class_counts) EXPECT_EQ(n, 0u);
  EXPECT_EQ(d.class_counts.size(), toy_spec().class_table.size());
  auto v = project(d, FeatureSet::Complete);
  EXPECT_EQ(v.rows(), 0u);
  EXPECT_EQ(v.column_names, toy_spec().complete);
}

TEST(Flowstore, RowErrorsNameTheLine) {
  std::string csv = std::string(toy_header()) + "\n" + toy_line(row(0)) + "\n" + toy_line(row(7)) + "\n";
  try {
    load_text(csv);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("unknown class label"), std::string::npos);
  }
  auto bad = toy_line(row(0));
  bad.replace(bad.find(",300,"), 5, ",abc,");
  try {
    load_text(std::string(toy_header()) + "\n" + bad + "\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("fwd_bytes"), std::string::npos) << e.what();
  }
}

TEST(Flowstore, MissingLabelColumnIsAnError) {
  std::string header = toy_header();
  header.replace(header.find("label"), 5, "klass");
  EXPECT_THROW(load_text(header + "\n"), Error);
}

TEST(Flowstore, BaseFieldInvariants) {
  auto r = row(1);
  r.fwd_bytes = 1;
  r.bwd_bytes = 0;  // 1 byte for 4 packets
  std::string csv = std::string(toy_header()) + "\n" + toy_line(r) + "\n";
  EXPECT_THROW(load_text(csv), Error);
  auto spec = toy_spec();
  spec.invalid_rows = InvalidRowPolicy::Drop;
  auto d = load_text(csv + toy_line(row(0)) + "\n", spec);
  EXPECT_EQ(d.records.size(), 1u);
  EXPECT_EQ(d.dropped_rows, 1u);
  const auto& b = d.records[0].base;
  EXPECT_DOUBLE_EQ(b.duration, 1.5);
  EXPECT_DOUBLE_EQ(b.tot_bytes, 400);
  EXPECT_DOUBLE_EQ(b.tot_packets, 4);
}

TEST(Flowstore, InternalSourcesFromCidr) {
  auto a = row(1);
  auto b = row(1);
  b.src = "11.0.0.1";
  auto d = load_text(std::string(toy_header()) + "\n" + toy_line(a) + "\n" + toy_line(b) + "\n");
  EXPECT_TRUE(d.records[0].src_internal);
  EXPECT_FALSE(d.records[1].src_internal);
}

TEST(Flowstore, TimestampsAndOrdering) {
  std::string csv = std::string(toy_header()) + "\n" + toy_line(row(0, 5)) + "\n" + toy_line(row(1, 3)) + "\n";
  auto d = load_text(csv);
  EXPECT_TRUE(d.has_timestamps);
  EXPECT_FALSE(d.chronologically_sorted);
  EXPECT_EQ(*d.records[0].timestamp, 5.0);  // file order kept
  auto sorted = load_text(toy_csv({20, 20}, 3));
  EXPECT_TRUE(sorted.chronologically_sorted);
}

TEST(Flowstore, CapsAreExactAndReproducible) {
  auto spec = toy_spec();
  spec.caps.benign_cap = 100;
  spec.caps.per_class_malicious_cap = 1000;
  std::istringstream in(toy_csv({1000, 40}, 8));
  auto d = load_dataset(spec, in);
  auto a = apply_caps(d, 99);
  auto b = apply_caps(d, 99);
  EXPECT_EQ(a.class_counts.at(0), 100u);
  EXPECT_EQ(a.class_counts.at(1), 40u);
  auto lines = [](const Dataset& x) {
    std::vector<std::size_t> out;
    for (const auto& r : x.records) out.push_back(r.source_line);
    return out;
  };
  EXPECT_EQ(lines(a), lines(b));
  auto c = apply_caps(d, 100);
  EXPECT_NE(lines(a), lines(c));
  // Idempotent, and retained rows keep file order.
  EXPECT_EQ(lines(apply_caps(a, 99)), lines(a));
  auto kept = lines(a);
  EXPECT_TRUE(std::is_sorted(kept.begin(), kept.end()));
  // Under every cap: nothing changes.
  auto small = toy_dataset({30, 20});
  EXPECT_EQ(lines(apply_caps(small, 5)), lines(small));
}

TEST(Flowstore, PortCategories) {
  EXPECT_EQ(encode_port(80), 0);
  EXPECT_EQ(encode_port(0), 0);
  EXPECT_EQ(encode_port(1023), 0);
  EXPECT_EQ(encode_port(1024), 1);
  EXPECT_EQ(encode_port(8080), 1);
  EXPECT_EQ(encode_port(49151), 1);
  EXPECT_EQ(encode_port(49152), 2);
  EXPECT_EQ(encode_port(65535), 2);
  EXPECT_THROW(encode_port(65536), Error);
  EXPECT_THROW(encode_port(-1), Error);
}

TEST(Flowstore, ProjectionMatchesSourceCells) {
  std::string csv = toy_csv({40, 30}, 12);
  auto d = load_text(csv);
  auto v = project(d, FeatureSet::Essential);
  const auto& names = toy_spec().essential;
  ASSERT_EQ(v.cols(), names.size());
  ASSERT_EQ(v.rows(), d.records.size());
  // Re-read the CSV cells by header position.
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream hs(line);
    std::string h;
    while (std::getline(hs, h, ',')) header.push_back(h);
  }
  for (std::size_t r = 0; std::getline(in, line); ++r) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    EXPECT_EQ(v.row_index[r], r);
    for (std::size_t j = 0; j < names.size(); ++j) {
      auto pos = std::find(header.begin(), header.end(), names[j]) - header.begin();
      double raw = std::stod(cells[static_cast<std::size_t>(pos)]);
      if (names[j] == "dport") raw = encode_port(static_cast<long long>(raw));
      EXPECT_DOUBLE_EQ(v.at(r, j), raw) << names[j] << " row " << r;
    }
  }
}

TEST(Flowstore, ViewsAreIpFreeWithEncodedPorts) {
  auto d = toy_dataset({50, 50, 50});
  for (auto fs : {FeatureSet::Complete, FeatureSet::Essential}) {
    auto v = project(d, fs);
    for (const auto& ip : toy_spec().ip_columns) {
      EXPECT_EQ(std::find(v.column_names.begin(), v.column_names.end(), ip), v.column_names.end());
    }
    for (std::size_t j = 0; j < v.cols(); ++j) {
      if (!toy_spec().is_port_column(v.column_names[j])) continue;
      for (std::size_t r = 0; r < v.rows(); ++r) {
        double x = v.at(r, j);
        EXPECT_TRUE(x == 0 || x == 1 || x == 2);
      }
    }
  }
}

TEST(Flowstore, SpecValidation) {
  auto s = toy_spec();
  s.essential.push_back("nope");
  EXPECT_THROW(s.validate(), Error);
  s = toy_spec();
  s.complete.push_back("src");
  EXPECT_THROW(s.validate(), Error);
  s = toy_spec();
  s.internal_subnets = {"10.0.0.0/40"};
  EXPECT_THROW(s.validate(), Error);
  s = toy_spec();
  s.essential = {"dport"};  // 1 of 9 is not "about half"
  EXPECT_THROW(s.validate(), Error);
  EXPECT_NO_THROW(toy_spec().validate());
}

TEST(Flowstore, SpecJsonRoundTrip) {
  auto s = toy_spec();
  s.caps.benign_cap = 1234;
  auto back = parse_dataset_spec(dataset_spec_to_json(s));
  EXPECT_EQ(back.complete, s.complete);
  EXPECT_EQ(back.essential, s.essential);
  EXPECT_EQ(back.caps.benign_cap, 1234u);
  EXPECT_EQ(back.class_table, s.class_table);
  EXPECT_EQ(back.derived_rules.size(), 1u);
  EXPECT_EQ(back.base.byte_columns, s.base.byte_columns);
}

TEST(Flowstore, ProjectReportsMissingFeatures) {
  auto d = toy_dataset({10, 10});
  d.spec.essential.push_back("ghost");
  try {
    project(d, FeatureSet::Essential);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
}
