#pragma once
#include <cstdlib>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kahlerflow::par {

// Execution policy for the data-parallel kernels. Every parallel kernel has
// a serial twin selected by this flag; tests compare the two bitwise.
enum class Exec { Serial, Parallel };

inline int max_threads() {
#ifdef _OPENMP
  static int cached = [] {
    int n = omp_get_max_threads();
    if (const char* env = std::getenv("KAHLERFLOW_THREADS")) {
      const int cap = std::atoi(env);
      if (cap >= 1 && cap < n) n = cap;
    }
    return n;
  }();
  return cached;
#else
  return 1;
#endif
}

// Parallel loop over [0, n). Bodies must write disjoint outputs; iteration
// order is unobservable so serial and parallel runs agree bitwise.
template <typename Fn>
void for_index(std::int64_t n, Exec exec, Fn&& fn) {
#ifdef _OPENMP
  if (exec == Exec::Parallel && n > 1) {
    const int nt = max_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
#else
  (void)exec;
#endif
  for (std::int64_t i = 0; i < n; ++i) fn(i);
}

}  // namespace kahlerflow::par
