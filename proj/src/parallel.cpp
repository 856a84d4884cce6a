#include "flipflow/parallel.hpp"

namespace flipflow {

namespace {

Exec g_default =
#ifdef _OPENMP
    Exec::openmp;
#else
    Exec::serial;
#endif

}  // namespace

Exec default_exec() { return g_default; }

void set_default_exec(Exec e) {
#ifndef _OPENMP
  e = Exec::serial;
#endif
  g_default = e;
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace flipflow
