#pragma once

#include <cstddef>
#include <cstdint>

namespace pfreq {

/// Selects between the OpenMP kernel and its serial reference.
///
/// Every data-parallel loop in the library writes into a pre-sized slot per
/// index and never reduces across threads, so both paths produce bitwise
/// identical results. The serial path is kept for tests and benchmarks.
enum class Execution { Serial, Parallel };

template <typename Fn>
void parallel_for(Execution exec, std::size_t n, Fn&& fn) {
  const auto count = static_cast<std::int64_t>(n);
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
  } else {
    for (std::int64_t i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
  }
}

}  // namespace pfreq
