// Timing comparison of the serial reference kernels against their
// OpenMP-parallel counterparts. Both paths compute each output element in a
// fixed order, so the results are bitwise identical; only throughput differs.

#include <chrono>
#include <cstdio>
#include <omp.h>

#include "cspapi/acquisition.hpp"
#include "cspapi/cli.hpp"
#include "cspapi/csdesign.hpp"
#include "cspapi/recon.hpp"
#include "cspapi/wave.hpp"

using namespace cspapi;

namespace {

double seconds(const std::function<void()>& fn) {
  auto t0 = std::chrono::steady_clock::now();
  fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-24s %9.3f s %9.3f s %8.2fx\n", name, serial, parallel, serial / parallel);
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-24s %11s %11s %9s\n", "kernel", "serial", "openmp", "speedup");

  ExperimentConfig cfg;
  SourceImage phantom = build_phantom(cfg);
  SensorGeometry geom = make_sensor_geometry(cfg.geometry.n, cfg.geometry.R, cfg.geometry.omega);
  TimeGrid times = make_time_grid(cfg.geometry.q, cfg.geometry.R);

  report("circular_means",
         seconds([&] { circular_means(phantom, geom, times, 0, ExecMode::Serial); }),
         seconds([&] { circular_means(phantom, geom, times, 0, ExecMode::Parallel); }));

  PressureData p = wave_forward(phantom, geom, times);
  report("wave_forward",
         seconds([&] { wave_forward(phantom, geom, times, 0, ExecMode::Serial); }),
         seconds([&] { wave_forward(phantom, geom, times, 0, ExecMode::Parallel); }));

  ImageGrid grid = make_image_grid(cfg.geometry.n_r, cfg.geometry.R);
  report("fbp_from_pressure",
         seconds([&] { fbp_from_pressure(p, geom, grid, ExecMode::Serial); }),
         seconds([&] { fbp_from_pressure(p, geom, grid, ExecMode::Parallel); }));

  DesignResult design = optimize_sin(cfg.design.spec, cfg.design.k, 100, 7, ExecMode::Serial);
  std::vector<StructuredCsMatrix> groups(4, design.best_matrix);
  StructuredCsMatrix a = assemble_block_diagonal(groups);
  CsData y = apply_cs(a, p);
  CsData yt = y;
  yt.values = apply_T_rows(y.values, y.times);
  TvOptions opts;
  opts.lambda = 1e-6 * yt.values.cwiseAbs().maxCoeff();
  report("tv_recover_means",
         seconds([&] { tv_recover_means(a, yt, geom, opts, ExecMode::Serial); }),
         seconds([&] { tv_recover_means(a, yt, geom, opts, ExecMode::Parallel); }));

  report("optimize_sin(1000)",
         seconds([&] { optimize_sin(cfg.design.spec, cfg.design.k, 1000, 11, ExecMode::Serial); }),
         seconds([&] { optimize_sin(cfg.design.spec, cfg.design.k, 1000, 11, ExecMode::Parallel); }));

  return 0;
}
