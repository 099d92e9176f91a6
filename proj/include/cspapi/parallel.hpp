#pragma once

#include <cstdint>

namespace cspapi {

/// Execution mode for the data-parallel kernels. Every kernel computes each
/// output element with a fixed, schedule-independent summation order, so
/// Serial and Parallel produce bitwise identical results.
enum class ExecMode { Serial, Parallel };

/// Runs fn(i) for i in [0, count). With ExecMode::Parallel the iterations are
/// distributed over OpenMP threads; fn must write only to index-i outputs.
template <class F>
void parallel_for(std::int64_t count, ExecMode mode, F&& fn) {
  if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) fn(i);
  } else {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
  }
}

}  // namespace cspapi
