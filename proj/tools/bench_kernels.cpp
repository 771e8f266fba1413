// Times the parallel kernels against their serial references and reports
// the speedup at the current thread setting.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "spike/ensembles.hpp"
#include "spike/kernels.hpp"

namespace {

using spike::ComplexMatrix;
using spike::CVector;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, seconds_since(t0));
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t d = 600;
  int reps = 3;
  if (argc > 1) d = static_cast<std::size_t>(std::atoll(argv[1]));
  if (argc > 2) reps = std::atoi(argv[2]);
  if (d == 0 || reps <= 0) {
    std::fprintf(stderr, "usage: %s [dimension] [repetitions]\n", argv[0]);
    return 1;
  }

  const ComplexMatrix a =
      spike::sample_iid(d, spike::EntryLaw::complex_gaussian, {42, 0});
  const ComplexMatrix b =
      spike::sample_iid(d, spike::EntryLaw::complex_gaussian, {42, 1});
  CVector x(d);
  for (std::size_t i = 0; i < d; ++i) x[i] = spike::cdouble(1.0, -0.5);

  std::printf("d=%zu reps=%d threads=%d\n", d, reps, spike::get_threads());
  std::printf("%-12s %12s %12s %8s\n", "kernel", "parallel(s)", "serial(s)",
              "speedup");

  struct Row {
    const char* name;
    double par;
    double ser;
  };
  const Row rows[] = {
      {"matvec", time_best_of(reps, [&] { spike::matvec(a, x); }),
       time_best_of(reps, [&] { spike::ref::matvec(a, x); })},
      {"matvec_adj", time_best_of(reps, [&] { spike::matvec_adj(a, x); }),
       time_best_of(reps, [&] { spike::ref::matvec_adj(a, x); })},
      {"matmul", time_best_of(reps, [&] { spike::matmul(a, b); }),
       time_best_of(reps, [&] { spike::ref::matmul(a, b); })},
      {"lu_factor", time_best_of(reps, [&] { spike::lu_factor(a); }),
       time_best_of(reps, [&] { spike::ref::lu_factor(a); })},
  };
  for (const Row& r : rows)
    std::printf("%-12s %12.6f %12.6f %8.2f\n", r.name, r.par, r.ser,
                r.ser / r.par);
  return 0;
}
