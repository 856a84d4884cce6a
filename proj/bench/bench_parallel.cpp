// Timing harness for the serial and OpenMP execution policies. Not part of
// the test suite; numbers depend on hardware and thread count. Each section
// also cross-checks that both policies produce identical results, since the
// kernels are specified to be bitwise deterministic.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "flipflow/parallel.hpp"
#include "flipflow/pdmp.hpp"
#include "flipflow/system.hpp"

using namespace flipflow;

namespace {

template <class Fn>
double time_best_of(int reps, Fn&& fn) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    best = std::min(best, secs);
  }
  return best;
}

void row(const char* name, double serial, double openmp, bool identical) {
  std::printf("%-22s %10.4fs %10.4fs %6.2fx %s\n", name, serial, openmp,
              serial / openmp, identical ? "identical" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("threads available: %d\n\n", max_threads());
  std::printf("%-22s %11s %11s %7s\n", "kernel", "serial", "openmp",
              "speedup");

  {
    const std::int64_t n = 20'000'000;
    auto value = [](std::int64_t i) {
      const double t = 1e-6 * static_cast<double>(i);
      return std::cos(3.7 * t) + 0.1 * std::sin(41.0 * t);
    };
    GridMin a, b;
    const double ts = time_best_of(
        3, [&] { a = grid_argmin(n, value, Exec::serial); });
    const double tp = time_best_of(
        3, [&] { b = grid_argmin(n, value, Exec::openmp); });
    row("grid_argmin", ts, tp, a.index == b.index && a.value == b.value);
  }

  {
    const std::int64_t n = 20'000'000;
    auto term = [](std::int64_t i) {
      return std::sin(1e-3 * static_cast<double>(i));
    };
    double a = 0.0, b = 0.0;
    const double ts =
        time_best_of(3, [&] { a = chunked_sum(n, term, Exec::serial); });
    const double tp =
        time_best_of(3, [&] { b = chunked_sum(n, term, Exec::openmp); });
    row("chunked_sum", ts, tp, a == b);
  }

  {
    SystemSpec spec = decompose(random_spd(4, 7), 0.5);
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 8; ++i) seeds.push_back(i);
    std::vector<Observable> fs = {Observable::hamiltonian(),
                                  Observable::action_sq(0)};
    std::vector<SeedResult> a, b;
    const double ts = time_best_of(2, [&] {
      set_default_exec(Exec::serial);
      a = multi_trajectory(spec, g_star(spec), 20000.0,
                           WaitingLaw::exponential(1.0), seeds, fs);
    });
    const double tp = time_best_of(2, [&] {
      set_default_exec(Exec::openmp);
      b = multi_trajectory(spec, g_star(spec), 20000.0,
                           WaitingLaw::exponential(1.0), seeds, fs);
    });
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i)
      for (std::size_t f = 0; f < a[i].averages.size(); ++f)
        same = same && a[i].averages[f].mean == b[i].averages[f].mean;
    row("multi_trajectory", ts, tp, same);
  }

  return 0;
}
