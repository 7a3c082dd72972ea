// Timing comparison of the OpenMP kernels against their serial references.
// Run: ./bench_kernels [point_count]

#include "crn/kernels.hpp"
#include "crn/parser.hpp"

#include <chrono>
#include <cstdio>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using crn::Vector;

double time_of(const std::function<double()>& body, int repeats, double& result) {
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    const auto start = std::chrono::steady_clock::now();
    result = body();
    const auto stop = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(stop - start).count());
  }
  return best;
}

std::vector<Vector> random_points(std::size_t count, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.1, 4.0);
  std::vector<Vector> out(count);
  for (auto& p : out) {
    p.resize(dim);
    for (int i = 0; i < dim; ++i) p[i] = unit(rng);
  }
  return out;
}

} // namespace

int main(int argc, char** argv) {
  const std::size_t count = argc > 1 ? std::stoul(argv[1]) : 1500;
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both columns run serially\n");
#endif

  const auto a = random_points(count, 6, 1);
  const auto b = random_points(count, 6, 2);

  double r_serial = 0, r_parallel = 0;
  double t_serial = time_of([&] { return crn::kernels::hausdorff_distance_serial(a, b); }, 3, r_serial);
  double t_parallel = time_of([&] { return crn::kernels::hausdorff_distance(a, b); }, 3, r_parallel);
  std::printf("%-22s serial %8.4fs  parallel %8.4fs  speedup %5.2fx  (values match: %s)\n", "hausdorff_distance",
              t_serial, t_parallel, t_serial / t_parallel, r_serial == r_parallel ? "yes" : "NO");

  const auto heavy = [](const Vector& p) {
    double acc = 0;
    for (int i = 0; i < 200; ++i) acc += std::pow(p[i % p.size()], 1.0 + 1e-3 * i);
    return acc;
  };
  const auto pts = random_points(count * 40, 6, 3);
  t_serial = time_of([&] { return crn::kernels::max_over_points_serial(pts, heavy); }, 3, r_serial);
  t_parallel = time_of([&] { return crn::kernels::max_over_points(pts, heavy); }, 3, r_parallel);
  std::printf("%-22s serial %8.4fs  parallel %8.4fs  speedup %5.2fx  (values match: %s)\n", "max_over_points",
              t_serial, t_parallel, t_serial / t_parallel, r_serial == r_parallel ? "yes" : "NO");

  const std::string r1 =
      "X + Y -> 2 Y @ r1\nY + Z -> X @ r2\n0 -> X @ r3\nX -> 0 @ r4\n0 -> Y @ r5\nY -> 0 @ r6\n0 -> Z @ r7\nZ -> 0 @ "
      "r8\n";
  crn::MassActionSystem sys(crn::parse_network(r1).net, {0.5, 3.0, 2.5, 0.2, 0.6, 2.4, 1.8, 0.4});
  const auto states = random_points(count * 100, 3, 4);
  crn::Matrix out1, out2;
  t_serial = time_of(
      [&] {
        crn::kernels::batch_rhs_serial(sys, states, out1);
        return out1(0, 0);
      },
      3, r_serial);
  t_parallel = time_of(
      [&] {
        crn::kernels::batch_rhs(sys, states, out2);
        return out2(0, 0);
      },
      3, r_parallel);
  std::printf("%-22s serial %8.4fs  parallel %8.4fs  speedup %5.2fx  (values match: %s)\n", "batch_rhs", t_serial,
              t_parallel, t_serial / t_parallel, out1 == out2 ? "yes" : "NO");
  return 0;
}
