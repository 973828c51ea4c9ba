#pragma once

#include <cstdlib>
#include <string>

#include <omp.h>

namespace volspill {

/// Selects between the OpenMP kernel and its serial reference. Both produce
/// bit-identical output; the serial path exists for testing and benchmarking.
enum class Exec { Serial, Parallel };

/// Worker cap: VOLSPILL_THREADS if set and positive, else the OpenMP default.
inline int worker_count() {
  if (const char* env = std::getenv("VOLSPILL_THREADS")) {
    try {
      int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  return omp_get_max_threads();
}

}  // namespace volspill
