#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fkmc/simulate.hpp"

namespace fkmc {

// Fan paths out to workers. Every path writes only its own slot, keyed by the
// path index, so results are identical for any worker count; the serial body
// is the reference implementation the parallel one is tested against.
template <typename Body>  // void(std::size_t path, PathOut& scratch)
void run_paths_serial(std::size_t n_paths, Body&& body) {
  PathOut scratch;
  for (std::size_t i = 0; i < n_paths; ++i) body(i, scratch);
}

template <typename Body>
void run_paths_parallel(std::size_t n_paths, int workers, Body&& body) {
#ifdef _OPENMP
  const long n = static_cast<long>(n_paths);
#pragma omp parallel num_threads(workers > 0 ? workers : omp_get_max_threads())
  {
    PathOut scratch;
#pragma omp for schedule(static)
    for (long i = 0; i < n; ++i) body(static_cast<std::size_t>(i), scratch);
  }
#else
  (void)workers;
  run_paths_serial(n_paths, body);
#endif
}

template <typename Body>
void run_paths(std::size_t n_paths, int workers, Body&& body) {
  if (workers == 1)
    run_paths_serial(n_paths, body);
  else
    run_paths_parallel(n_paths, workers, body);
}

}  // namespace fkmc
