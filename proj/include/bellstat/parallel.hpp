#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bellstat {

// Number of workers a parallel kernel will use when asked for `requested`
// threads (0 or negative means "library default").
inline int resolve_threads(int requested) noexcept {
#ifdef _OPENMP
  if (requested > 0) return requested;
  return omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

// Process-wide default used by kernels when a caller passes 0.
inline void set_default_threads(int n) noexcept {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace bellstat
