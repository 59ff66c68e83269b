#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace aqm {

// Every data-parallel kernel in the library takes one of these. Serial is
// the reference path used by the consistency tests and the benchmark; the
// results must agree (bit-identical where the kernel promises it).
enum class ExecMode { Serial, Parallel };

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

}  // namespace aqm
