#include "nidsbench/rng.hpp"

#include <algorithm>
#include <cmath>

namespace nidsbench {

std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
  // FNV-1a over the tag, folded into the base through the mixer.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : tag) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return mix64(base ^ mix64(h));
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(base ^ mix64(index + 0x632be59bd9b4e019ULL));
}

std::uint64_t Rng::below(std::uint64_t bound) {
  // Lemire's nearly-divisionless method.
  unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    std::uint64_t threshold = -bound % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

std::vector<std::size_t> Rng::sample(std::span<const std::size_t> pool, std::size_t k) {
  if (k >= pool.size()) return {pool.begin(), pool.end()};
  // Partial Fisher-Yates over positions, then restore pool order.
  std::vector<std::size_t> pos(pool.size());
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + below(pos.size() - i);
    std::swap(pos[i], pos[j]);
  }
  pos.resize(k);
  std::sort(pos.begin(), pos.end());
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t p : pos) out.push_back(pool[p]);
  return out;
}

}  // namespace nidsbench
