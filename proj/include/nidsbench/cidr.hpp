#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace nidsbench {

/// Parses dotted-quad IPv4. Returns nullopt for anything else (IPv6, junk).
std::optional<std::uint32_t> parse_ipv4(std::string_view text);

class Ipv4Cidr {
 public:
  /// Accepts "a.b.c.d/n" with 0 <= n <= 32; throws Error otherwise.
  static Ipv4Cidr parse(std::string_view text);

  bool contains(std::uint32_t address) const { return (address & mask_) == network_; }
  std::string to_string() const;

 private:
  std::uint32_t network_ = 0;
  std::uint32_t mask_ = 0;
  int prefix_ = 0;
};

}  // namespace nidsbench
