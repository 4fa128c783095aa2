// Serial vs OpenMP timings for the dense kernels.
//   kernels_bench [--threads N] [--reps R]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "CLI11.hpp"
#include "drm/kernels.hpp"
#include "drm/rng.hpp"

namespace k = drm::kernels;
using drm::Tensor;

namespace {

Tensor random(drm::Rng& rng, std::size_t r, std::size_t c) {
  Tensor t(r, c);
  for (double& v : t.data()) v = rng.normal();
  return t;
}

double seconds(const std::function<void()>& f, int reps) {
  f();
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

volatile double sink = 0;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel benchmark"};
  int threads = omp_get_max_threads(), reps = 5;
  app.add_option("--threads", threads, "OpenMP threads")->check(CLI::PositiveNumber);
  app.add_option("--reps", reps, "timed repetitions")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  omp_set_num_threads(threads);

  drm::Rng rng(1);
  const Tensor a = random(rng, 1024, 256), b = random(rng, 256, 256), c = random(rng, 1024, 256);
  const Tensor p = random(rng, 2000, 2), q = random(rng, 2000, 2);

  struct Row {
    const char* name;
    std::function<void()> serial, parallel;
  };
  const Row rows[] = {
      {"matmul 1024x256x256", [&] { sink = k::serial::matmul(a, b)[0]; }, [&] { sink = k::matmul(a, b)[0]; }},
      {"matmul_tn 256x1024x256", [&] { sink = k::serial::matmul_tn(a, c)[0]; }, [&] { sink = k::matmul_tn(a, c)[0]; }},
      {"matmul_nt 1024x256x1024", [&] { sink = k::serial::matmul_nt(a, c)[0]; }, [&] { sink = k::matmul_nt(a, c)[0]; }},
      {"gaussian_kernel 2000x2000", [&] { sink = k::serial::gaussian_kernel(p, q, 1.0)[0]; },
       [&] { sink = k::gaussian_kernel(p, q, 1.0)[0]; }},
      {"kernel_mean 2000x2000", [&] { sink = k::serial::gaussian_kernel_mean(p, q, 1.0); },
       [&] { sink = k::gaussian_kernel_mean(p, q, 1.0); }},
      {"kde 2000 queries", [&] { sink = k::serial::kde_log_density(p, q, 0.3, 1e-300)[0]; },
       [&] { sink = k::kde_log_density(p, q, 0.3, 1e-300)[0]; }},
  };
  std::printf("threads %d, reps %d\n%-26s %12s %12s %8s\n", threads, reps, "kernel", "serial ms", "openmp ms", "speedup");
  for (const auto& r : rows) {
    const double s = seconds(r.serial, reps), o = seconds(r.parallel, reps);
    std::printf("%-26s %12.3f %12.3f %8.2f\n", r.name, 1e3 * s, 1e3 * o, s / o);
  }
}
