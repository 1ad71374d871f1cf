// Serial reference vs OpenMP for the two grid kernels.
#include "mqed/constants.hpp"
#include "mqed/greens_grid.hpp"
#include "mqed/greens_homogeneous.hpp"
#include "mqed/rates.hpp"

#include <benchmark/benchmark.h>

using namespace mqed;

namespace {

constexpr double kOmega = 2.0 * constants::pi * 384e12;

GridAxes square_axes(int n) {
  GridAxes a;
  for (int i = 0; i < n; ++i) {
    a.coords[0].push_back(-200e-9 + 400e-9 * i / (n - 1));
    a.coords[1].push_back(-200e-9 + 400e-9 * i / (n - 1));
  }
  a.coords[2] = {0.0};
  a.fixed[2] = true;
  return a;
}

const TensorGrid &shared_grid() {
  static const TensorGrid g = [] {
    const GridAxes a = square_axes(64);
    return sample_homogeneous_grid(kOmega, 1.5, a, {a.min_spacing() / 2, true, 0});
  }();
  return g;
}

MultipoleEmitter emitter() {
  MultipoleEmitter e;
  e.omega0 = kOmega;
  e.d = {cplx(1.0), cplx(0.0, 0.5), cplx(0.2)};
  for (auto &x : e.d)
    x *= constants::dipole_au;
  e.m = {cplx(0.0), cplx(constants::mu_B), cplx(0.0)};
  e.Q(0, 0) = e.Q(1, 1) = constants::quadrupole_au;
  e.Q(2, 2) = -2.0 * constants::quadrupole_au;
  return e;
}

void fd_blocks(benchmark::State &st, bool parallel) {
  const GridAxes a = square_axes(static_cast<int>(st.range(0)));
  const Medium medium = Medium::constant(1.5);
  const PairSampler s = [&](const Vec3 &r, const Vec3 &rp) {
    return im_homogeneous(r - rp, kOmega, medium);
  };
  FDOptions opt{a.min_spacing() / 2, parallel, 0};
  for (auto _ : st)
    benchmark::DoNotOptimize(finite_difference_blocks(s, a, opt));
  st.SetItemsProcessed(st.iterations() * a.node_count());
}

void map(benchmark::State &st, bool parallel) {
  const TensorGrid &g = shared_grid();
  const MultipoleEmitter e = emitter();
  MapOptions opt;
  opt.parallel = parallel;
  for (auto _ : st)
    benchmark::DoNotOptimize(enhancement_map(g, e, opt));
  st.SetItemsProcessed(st.iterations() * g.axes.node_count());
}

} // namespace

BENCHMARK_CAPTURE(fd_blocks, serial, false)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(fd_blocks, omp, true)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(map, serial, false)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(map, omp, true)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
