#pragma once

#include <cstddef>
#include <exception>
#include <type_traits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pcalign {

enum class Execution { Serial, Parallel };

/// Evaluates fn(0..n-1) into a vector ordered by index.
///
/// The serial loop is the reference implementation. The parallel loop
/// distributes cells over OpenMP threads; each cell must be a pure function
/// of its index, so both paths produce identical results. The first
/// exception thrown by any cell (lowest index) is rethrown after the loop.
template <class Fn>
auto map_cells(std::size_t n, Fn&& fn, Execution execution = Execution::Parallel)
    -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  using Result = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<Result> out(n);
  if (execution == Execution::Serial) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }

  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      out[idx] = fn(idx);
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

inline int available_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace pcalign
