#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace nidsbench::bench {

struct HardwareDescriptor {
  std::string cpu_model_exact;
  int core_count = 0;
  double base_frequency_mhz = 0.0;
  std::uint64_t ram_bytes = 0;
  std::string os_name_version;
  std::string captured_at;  // UTC, ISO 8601
  /// False when the CPU string failed the specificity check and the campaign
  /// ran anyway; `note` then says why.
  bool verified = true;
  std::string note;

  std::string to_json() const;
  static HardwareDescriptor from_json(std::string_view text);
};

/// True when `cpu_model` names a concrete part rather than a brand family
/// such as "Intel Core i5" or "AMD Ryzen 7".
bool is_specific_cpu_model(std::string_view cpu_model);

/// Best-effort OS probe; no validation.
HardwareDescriptor probe_hardware();

/// Probe, merge `overrides` (keys: cpu_model_exact, core_count,
/// base_frequency_mhz, ram_bytes, os_name_version) and validate. A CPU string
/// that is only a family throws unless `allow_unverified` is set.
HardwareDescriptor capture_hardware(const std::map<std::string, std::string>& overrides = {},
                                    bool allow_unverified = false);

}  // namespace nidsbench::bench
