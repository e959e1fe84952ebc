#include "nidsbench/bench/hardware.hpp"

#include <sys/utsname.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <limits>
#include <chrono>
#include <ctime>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include "json.hpp"
#include "nidsbench/common.hpp"

namespace nidsbench::bench {

using nlohmann::json;

std::string HardwareDescriptor::to_json() const {
  return json{{"cpu_model_exact", cpu_model_exact},
              {"core_count", core_count},
              {"base_frequency_mhz", base_frequency_mhz},
              {"ram_bytes", ram_bytes},
              {"os_name_version", os_name_version},
              {"captured_at", captured_at},
              {"verified", verified},
              {"note", note}}
      .dump();
}

HardwareDescriptor HardwareDescriptor::from_json(std::string_view text) {
  const json j = json::parse(text);
  HardwareDescriptor h;
  h.cpu_model_exact = j.value("cpu_model_exact", "");
  h.core_count = j.value("core_count", 0);
  h.base_frequency_mhz = j.value("base_frequency_mhz", 0.0);
  h.ram_bytes = j.value("ram_bytes", std::uint64_t{0});
  h.os_name_version = j.value("os_name_version", "");
  h.captured_at = j.value("captured_at", "");
  h.verified = j.value("verified", true);
  h.note = j.value("note", "");
  return h;
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> model_tokens(std::string_view cpu_model) {
  std::string s = lower(std::string(cpu_model));
  for (const char* mark : {"(r)", "(tm)", "®", "™"}) {
    for (auto pos = s.find(mark); pos != std::string::npos; pos = s.find(mark)) s.replace(pos, std::strlen(mark), " ");
  }
  // "@ 2.30GHz" and similar frequency suffixes do not identify a part.
  s = std::regex_replace(s, std::regex(R"(@?\s*[0-9.]+\s*[gm]hz)"), " ");
  for (auto& c : s) {
    if (c == ',' || c == '@' || c == '(' || c == ')') c = ' ';
  }
  std::istringstream in(s);
  std::vector<std::string> tokens;
  for (std::string t; in >> t;) {
    if (t == "cpu" || t == "processor" || t == "with" || t == "radeon" || t == "graphics") continue;
    tokens.push_back(t);
  }
  return tokens;
}

// Family tiers that alone span parts an order of magnitude apart in speed.
const std::set<std::string> kFamilyTiers = {"i3", "i5", "i7", "i9", "3", "5", "7", "9", "ultra"};

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

bool is_specific_cpu_model(std::string_view cpu_model) {
  for (const auto& t : model_tokens(cpu_model)) {
    const bool has_digit = std::any_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); });
    if (has_digit && !kFamilyTiers.count(t)) return true;
  }
  return false;
}

HardwareDescriptor probe_hardware() {
  HardwareDescriptor h;
  std::ifstream cpuinfo("/proc/cpuinfo");
  for (std::string line; std::getline(cpuinfo, line);) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const auto key = trim(line.substr(0, colon));
    const auto value = trim(line.substr(colon + 1));
    if (key == "model name" && h.cpu_model_exact.empty()) h.cpu_model_exact = value;
    if (key == "cpu MHz" && h.base_frequency_mhz == 0.0) h.base_frequency_mhz = std::atof(value.c_str());
  }
  h.core_count = static_cast<int>(std::thread::hardware_concurrency());
  std::ifstream meminfo("/proc/meminfo");
  for (std::string key; meminfo >> key;) {
    if (key == "MemTotal:") {
      std::uint64_t kb = 0;
      meminfo >> kb;
      h.ram_bytes = kb * 1024;
      break;
    }
    meminfo.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
  }
  utsname u{};
  if (uname(&u) == 0) h.os_name_version = std::string(u.sysname) + " " + u.release;
  h.captured_at = utc_now();
  return h;
}

HardwareDescriptor capture_hardware(const std::map<std::string, std::string>& overrides, bool allow_unverified) {
  HardwareDescriptor h = probe_hardware();
  for (const auto& [key, value] : overrides) {
    try {
      if (key == "cpu_model_exact") {
        h.cpu_model_exact = value;
      } else if (key == "core_count") {
        h.core_count = std::stoi(value);
      } else if (key == "base_frequency_mhz") {
        h.base_frequency_mhz = std::stod(value);
      } else if (key == "ram_bytes") {
        h.ram_bytes = std::stoull(value);
      } else if (key == "os_name_version") {
        h.os_name_version = value;
      } else {
        throw Error("unknown hardware field '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw Error("hardware field '" + key + "' has an invalid value '" + value + "'");
    }
  }
  if (!is_specific_cpu_model(h.cpu_model_exact)) {
    const std::string why = "CPU model '" + h.cpu_model_exact +
                            "' names only a brand family; runtimes are comparable only when the exact model "
                            "(e.g. 'Intel Core i5-12600KF', not 'Intel Core i5') is reported, because parts "
                            "within one family differ in speed by more than an order of magnitude. "
                            "Set cpu_model_exact explicitly.";
    if (!allow_unverified) throw Error(why);
    h.verified = false;
    h.note = why;
  }
  return h;
}

}  // namespace nidsbench::bench
