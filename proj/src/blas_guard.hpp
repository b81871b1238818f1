#pragma once

// We parallelize across blocks/panels ourselves, so BLAS must not spawn its
// own threads underneath.

#include <mutex>

extern "C" void openblas_set_num_threads(int);

namespace lbphy {

inline void blas_serial() {
    static std::once_flag once;
    std::call_once(once, [] { openblas_set_num_threads(1); });
}

} // namespace lbphy
