#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bettiml::detail {

// Worker count for an OpenMP region; <= 0 means "all available".
inline int resolve_workers(int workers) {
    if (workers > 0) return workers;
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace bettiml::detail
