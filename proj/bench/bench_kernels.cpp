// Timing comparison of the OpenMP kernels against their serial references.
// Build target only; not part of the test suite.
#include <chrono>
#include <cstdio>

#include "kahlerflow/diagnostics.hpp"
#include "kahlerflow/geometry.hpp"
#include "kahlerflow/parallel.hpp"
#include "kahlerflow/training.hpp"

using namespace kahlerflow;

namespace {

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best,
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const char* name, double serial_s, double parallel_s) {
  std::printf("%-34s %9.3f ms %9.3f ms %6.2fx\n", name, serial_s * 1e3, parallel_s * 1e3,
              serial_s / parallel_s);
}

}  // namespace

int main() {
  std::printf("threads: %d\n", par::max_threads());
  std::printf("%-34s %12s %12s %7s\n", "kernel", "serial", "openmp", "speedup");

  {
    PotentialGrid p = sample_potential_1d(fubini_study_potential, 512, 512, -2.0, -2.0, 0.008);
    HermitianMetricField h = metric_from_potential(p, par::Exec::Serial);
    row("metric_from_potential 512x512",
        time_best_of(3, [&] { metric_from_potential(p, par::Exec::Serial); }),
        time_best_of(3, [&] { metric_from_potential(p, par::Exec::Parallel); }));
    row("ricci 512x512", time_best_of(3, [&] { ricci(h, par::Exec::Serial); }),
        time_best_of(3, [&] { ricci(h, par::Exec::Parallel); }));
  }

  {
    Dataset ds = sample_two_moons(1000000, 0.1, 11);
    GridSpec g{256, 256, -2.5, -2.5, 0.02};
    row("histogram+smooth 1e6 pts, 256^2",
        time_best_of(3, [&] { histogram_density(ds, g, 2.0, 0, par::Exec::Serial); }),
        time_best_of(3, [&] { histogram_density(ds, g, 2.0, 0, par::Exec::Parallel); }));
    DensityField d = histogram_density(ds, g, 2.0);
    row("fig1 curvature map 256^2",
        time_best_of(3, [&] { fig1_scalar_curvature(d, par::Exec::Serial); }),
        time_best_of(3, [&] { fig1_scalar_curvature(d, par::Exec::Parallel); }));
  }

  {
    FlowStack s = make_flow_stack(8, 8, 12, 0.2);
    Dataset batch = sample_complex_gaussian(4096, 2, 13);
    row("nll_grad K=8, batch 4096",
        time_best_of(3, [&] { nll_grad(s, batch, par::Exec::Serial); }),
        time_best_of(3, [&] { nll_grad(s, batch, par::Exec::Parallel); }));
    row("nll_loss K=8, batch 4096",
        time_best_of(3, [&] { nll_loss(s, batch, par::Exec::Serial); }),
        time_best_of(3, [&] { nll_loss(s, batch, par::Exec::Parallel); }));
  }

  {
    FlowStack s = make_flow_stack(8, 8, 14, 0.2);
    row("holomorphy probe 2000 samples",
        time_best_of(2, [&] { holomorphy_probe(s, 2000, 15, par::Exec::Serial); }),
        time_best_of(2, [&] { holomorphy_probe(s, 2000, 15, par::Exec::Parallel); }));
  }
  return 0;
}
