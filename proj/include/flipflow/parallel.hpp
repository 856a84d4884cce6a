#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace flipflow {

enum class Exec { serial, openmp };

// Process-wide default used when kernels are called without an explicit
// policy. Falls back to serial when the build has no OpenMP.
Exec default_exec();
void set_default_exec(Exec e);
int max_threads();

struct GridMin {
  std::int64_t index = -1;
  double value = 0.0;
};

namespace detail {

inline bool better(double v, std::int64_t i, const GridMin& best) {
  return v < best.value || (v == best.value && i < best.index);
}

}  // namespace detail

// Argmin of f(i) over i in [0, n). Ties break to the lowest index, so the
// result does not depend on the execution policy or thread count.
template <class F>
GridMin grid_argmin(std::int64_t n, F&& f, Exec exec) {
  GridMin best;
  if (n <= 0) return best;
  if (exec == Exec::serial) {
    best = {0, f(std::int64_t{0})};
    for (std::int64_t i = 1; i < n; ++i) {
      double v = f(i);
      if (detail::better(v, i, best)) best = {i, v};
    }
    return best;
  }
#ifdef _OPENMP
  best = {0, f(std::int64_t{0})};
#pragma omp parallel
  {
    GridMin local{-1, 0.0};
#pragma omp for nowait schedule(static)
    for (std::int64_t i = 1; i < n; ++i) {
      double v = f(i);
      if (local.index < 0 || detail::better(v, i, local)) local = {i, v};
    }
#pragma omp critical(flipflow_grid_argmin)
    {
      if (local.index >= 0 && detail::better(local.value, local.index, best)) {
        best = local;
      }
    }
  }
  return best;
#else
  return grid_argmin(n, std::forward<F>(f), Exec::serial);
#endif
}

template <class F>
GridMin grid_argmin(std::int64_t n, F&& f) {
  return grid_argmin(n, std::forward<F>(f), default_exec());
}

// Sum of f(i) over i in [0, n). Chunk partials are accumulated in index
// order with a fixed chunk width, so the rounding pattern is identical for
// the serial and parallel paths and for any thread count.
template <class F>
double chunked_sum(std::int64_t n, F&& f, Exec exec,
                   std::int64_t chunk = 4096) {
  if (n <= 0) return 0.0;
  std::int64_t n_chunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(static_cast<std::size_t>(n_chunks), 0.0);
  auto body = [&](std::int64_t c) {
    std::int64_t lo = c * chunk;
    std::int64_t hi = lo + chunk < n ? lo + chunk : n;
    double s = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) s += f(i);
    partial[static_cast<std::size_t>(c)] = s;
  };
  if (exec == Exec::serial) {
    for (std::int64_t c = 0; c < n_chunks; ++c) body(c);
  } else {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < n_chunks; ++c) body(c);
#else
    for (std::int64_t c = 0; c < n_chunks; ++c) body(c);
#endif
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

template <class F>
double chunked_sum(std::int64_t n, F&& f) {
  return chunked_sum(n, std::forward<F>(f), default_exec());
}

// f(i) must write only to slot i of the caller's output.
template <class F>
void parallel_for_index(std::int64_t n, F&& f, Exec exec) {
  if (exec == Exec::serial) {
    for (std::int64_t i = 0; i < n; ++i) f(i);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) f(i);
#else
  for (std::int64_t i = 0; i < n; ++i) f(i);
#endif
}

template <class F>
void parallel_for_index(std::int64_t n, F&& f) {
  parallel_for_index(n, std::forward<F>(f), default_exec());
}

}  // namespace flipflow
