#include "nidsbench/cidr.hpp"

#include <charconv>

#include "nidsbench/common.hpp"

namespace nidsbench {

std::optional<std::uint32_t> parse_ipv4(std::string_view text) {
  std::uint32_t addr = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int octet = 0; octet < 4; ++octet) {
    unsigned value = 0;
    auto [next, ec] = std::from_chars(p, end, value);
    if (ec != std::errc() || next == p || next - p > 3 || value > 255) return std::nullopt;
    addr = (addr << 8) | value;
    p = next;
    if (octet < 3) {
      if (p == end || *p != '.') return std::nullopt;
      ++p;
    }
  }
  if (p != end) return std::nullopt;
  return addr;
}

Ipv4Cidr Ipv4Cidr::parse(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) throw Error("CIDR '" + std::string(text) + "' lacks '/n'");
  auto addr = parse_ipv4(text.substr(0, slash));
  int prefix = -1;
  auto tail = text.substr(slash + 1);
  auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), prefix);
  if (!addr || ec != std::errc() || ptr != tail.data() + tail.size() || prefix < 0 || prefix > 32) {
    throw Error("malformed CIDR '" + std::string(text) + "'");
  }
  Ipv4Cidr c;
  c.prefix_ = prefix;
  c.mask_ = prefix == 0 ? 0u : ~std::uint32_t{0} << (32 - prefix);
  c.network_ = *addr & c.mask_;
  return c;
}

std::string Ipv4Cidr::to_string() const {
  return std::to_string(network_ >> 24) + "." + std::to_string((network_ >> 16) & 255) + "." +
         std::to_string((network_ >> 8) & 255) + "." + std::to_string(network_ & 255) + "/" +
         std::to_string(prefix_);
}

}  // namespace nidsbench
