#pragma once

#include <chrono>
#include <type_traits>
#include <utility>

namespace nidsbench {

template <typename T>
struct Timed {
  T result;
  double wall_seconds = 0.0;
  int cpu_core_count = 1;
};

template <>
struct Timed<void> {
  double wall_seconds = 0.0;
  int cpu_core_count = 1;
};

/// Runs `phase` once and measures it on the monotonic clock. `workers` is the
/// worker count the phase was allowed to use; it is recorded, not enforced.
template <typename F>
auto time_phase(F&& phase, int workers = 1) -> Timed<std::invoke_result_t<F>> {
  using R = std::invoke_result_t<F>;
  const auto start = std::chrono::steady_clock::now();
  auto seconds = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  if constexpr (std::is_void_v<R>) {
    std::forward<F>(phase)();
    return Timed<void>{seconds(), workers};
  } else {
    R r = std::forward<F>(phase)();
    const double s = seconds();
    return Timed<R>{std::move(r), s, workers};
  }
}

}  // namespace nidsbench
