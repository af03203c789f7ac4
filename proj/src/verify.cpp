#include "kahlerflow/verify.hpp"

#include <chrono>
#include <optional>
#include <cmath>
#include <limits>

#include "kahlerflow/artifacts.hpp"
#include "kahlerflow/diagnostics.hpp"
#include "kahlerflow/geometry.hpp"
#include "kahlerflow/kahler_ricci_lab.hpp"
#include "kahlerflow/training.hpp"

namespace kahlerflow {

namespace {

using Clock = std::chrono::steady_clock;

struct Suite {
  std::vector<CheckResult> results;

  template <typename Fn>
  void check(const std::string& name, double threshold, Fn&& measure) {
    CheckResult r;
    r.name = name;
    r.threshold = threshold;
    const auto t0 = Clock::now();
    try {
      r.measured = measure();
      r.pass = r.measured <= threshold;
    } catch (const std::exception&) {
      r.measured = std::numeric_limits<double>::infinity();
      r.pass = false;
    }
    r.runtime_s = std::chrono::duration<double>(Clock::now() - t0).count();
    results.push_back(r);
  }
};

double cov_affine_exactness() {
  const Cx a{2, 1};
  const Cx b{0.4, -0.3};
  FlowStack s = make_elementwise_affine_stack(a, b);
  Rng rng(1001);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    ComplexVec w = {{rng.normal(), rng.normal()}, {rng.normal(), rng.normal()}};
    ComplexVec z = {(w[0] - b) / a, (w[1] - b) / a};
    const double expect = base_log_density(z) - 2.0 * 2.0 * std::log(cabs(a));
    worst = std::max(worst, std::abs(log_prob(s, w) - expect));
  }
  return worst;
}

double fisher_pullback_worst(double step) {
  FlowStack s = make_flow_stack(4, 8, 1002, 0.2, Activation::None);
  Rng rng(1003);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    ComplexVec z = {{rng.normal(), rng.normal()}, {rng.normal(), rng.normal()}};
    worst = std::max(worst, fisher_pullback_check(s, z, step).diff);
  }
  return worst;
}

double fisher_pullback_rate() {
  // Error must fall by >= 3.5x when the step halves; return the worst
  // deficit (3.5 - ratio), clipped at 0 when satisfied.
  FlowStack s = make_flow_stack(4, 8, 1002, 0.2, Activation::None);
  Rng rng(1004);
  double worst_deficit = 0.0;
  for (int t = 0; t < 10; ++t) {
    ComplexVec z = {{rng.normal(), rng.normal()}, {rng.normal(), rng.normal()}};
    const double coarse = fisher_pullback_check(s, z, 2e-3).diff;
    const double fine = fisher_pullback_check(s, z, 1e-3).diff;
    if (fine < 1e-12) continue;  // at roundoff floor, rate is meaningless
    worst_deficit = std::max(worst_deficit, 3.5 - coarse / fine);
  }
  return std::max(0.0, worst_deficit);
}

double ricci_fubini_study() {
  PotentialGrid p = sample_potential_1d(fubini_study_potential, 200, 200, -1.0, -1.0, 0.01);
  HermitianMetricField h = metric_from_potential(p);
  HermitianMetricField ric = ricci(h);
  double worst = 0.0;
  for (int i = 0; i < ric.shape[0]; ++i)
    for (int j = 0; j < ric.shape[1]; ++j) {
      const std::int64_t n = ric.index({i, j, 0, 0});
      const Cx z{ric.origin[0] + ric.spacing * i, ric.origin[1] + ric.spacing * j};
      const double hv = std::pow(1.0 + abs2(z), -2.0);
      worst = std::max(worst, std::abs(ric.h[n](0, 0).re - 2.0 * hv) / hv);
    }
  return worst;
}

double ricci_flat() {
  PotentialGrid p =
      sample_potential_1d([](const Cx& z) { return abs2(z); }, 20, 20, -1.0, -1.0, 0.1);
  HermitianMetricField ric = ricci(metric_from_potential(p));
  double worst = 0.0;
  for (const ComplexMatrix& m : ric.h) worst = std::max(worst, max_abs(m));
  return worst;
}

double jacobi_identity() {
  MatrixPath smooth = [](double t) {
    ComplexMatrix j(2, 2);
    j(0, 0) = {1.0 + 0.3 * std::sin(t), 0.1 * std::cos(2 * t)};
    j(0, 1) = {0.2 * std::cos(t), -0.1 * std::sin(t)};
    j(1, 0) = {-0.15 * std::sin(3 * t), 0.05};
    j(1, 1) = {1.2 - 0.2 * std::cos(t), 0.08 * std::sin(t)};
    return gram(j);
  };
  double worst = 0.0;
  for (double t : {0.2, 0.7, 1.3, 2.9}) {
    auto [lhs, rhs] = jacobi_check(smooth, t);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

double nkrf_nu0_bitexact() {
  Rng rng(1005);
  TorusField logq(1024), logdet(1024);
  for (auto& v : logq) v = rng.normal();
  for (auto& v : logdet) v = 0.3 * rng.normal();
  TorusField out = nkrf_density_step(logq, logdet, 0.0, 0.17);
  double worst = 0.0;
  for (size_t k = 0; k < out.size(); ++k)
    worst = std::max(worst, std::abs(out[k] - (logq[k] - logdet[k])));
  return worst;  // must be exactly zero
}

double nkrf_cancellation() {
  Rng rng(1006);
  TorusField logq(1024), zero(1024, 0.0);
  for (auto& v : logq) v = rng.normal();
  TorusField out = nkrf_density_step(logq, zero, 4.0, 0.25);
  double worst = 0.0;
  for (double v : out) worst = std::max(worst, std::abs(v));
  return worst;
}

struct KlOutcome {
  double worst_rel = 0.0;
  double max_lhs = -1e300;
};

KlOutcome kl_outcome() {
  TorusGrid g{128, 2 * kPi};
  TorusField q0(g.size());
  TorusField p(g.size(), 1.0 / (g.L * g.L));
  const double cx = g.L / 2, cy = g.L / 2, sig = 0.15 * g.L;
  double mass = 0.0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const double dx = g.x(i) - cx, dy = g.y(j) - cy;
      q0[g.index(i, j)] = std::exp(0.5 * std::exp(-(dx * dx + dy * dy) / (2 * sig * sig)));
      mass += q0[g.index(i, j)] * g.cell_area();
    }
  for (double& v : q0) v /= mass;
  KlOutcome out;
  for (const KlStep& r : kl_dissipation_check(g, q0, p, 50, 1e-4)) {
    out.worst_rel = std::max(out.worst_rel,
                             std::abs(r.lhs - r.rhs) / std::max(std::abs(r.lhs), 1e-8));
    out.max_lhs = std::max(out.max_lhs, r.lhs);
  }
  return out;
}

KRFState perelman_state(bool stationary) {
  TorusGrid g{64, 2 * kPi};
  KRFState st;
  st.grid = g;
  st.phi.resize(g.size());
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      st.phi[g.index(i, j)] =
          0.3 * std::cos(2 * kPi * g.x(i) / g.L) * std::sin(2 * kPi * g.y(j) / g.L);
  if (stationary) {
    const TorusField h0 = metric_of(st);
    st.f.resize(g.size());
    for (std::int64_t k = 0; k < g.size(); ++k) st.f[k] = std::log(h0[k]);
  } else {
    st.f.assign(g.size(), 0.0);
  }
  return st;
}

double perelman_stationary() {
  PerelmanRun run = perelman_flow(perelman_state(true), 100, 1e-3);
  double worst = 0.0;
  for (size_t s = 1; s < run.fk.size(); ++s)
    worst = std::max(worst, std::abs(run.fk[s] - run.fk[s - 1]));
  for (double sup : run.phidot_sup) worst = std::max(worst, sup);
  return worst;
}

double perelman_dt_sign() {
  const KRFState st = perelman_state(false);
  PerelmanRun coarse = perelman_flow(st, 200, 1e-3);
  PerelmanRun fine = perelman_flow(st, 400, 5e-4);
  const double dc = coarse.fk.back() - coarse.fk.front();
  const double df = fine.fk.back() - fine.fk.front();
  // 0 when signs agree and the change is resolved, 1 otherwise
  return (dc * df > 0 && std::abs(dc) > 1e-9) ? 0.0 : 1.0;
}

struct SurgeryOutcome {
  double trigger_miss = 1.0;       // 0 iff the forced layer triggered
  double mass_err = 1.0;           // |1 - rescued mass|
  double monge_ampere_min = -1.0;  // min over nodes of 1 + ddzbar(phi)
};

SurgeryOutcome surgery_outcome() {
  FlowStack s = make_flow_stack(6, 8, 1007, 0.2);
  s.layers[4].s_net.l2.w.assign(s.layers[4].s_net.l2.w.size(), Cx{0, 0});
  s.layers[4].s_net.l2.b[0] = {-30.0, 0};
  Dataset batch = sample_complex_gaussian(64, 2, 1008);
  auto ev = singularity_monitor(s, batch, 1e-12);
  SurgeryOutcome out;
  if (!ev || ev->trigger_layer != 4) return out;
  out.trigger_miss = 0.0;

  const TorusGrid& g = ev->probe_grid;
  const TorusField bump = ddzbar_dz(g, ev->phi);
  out.monge_ampere_min = 1e300;
  for (std::int64_t k = 0; k < g.size(); ++k)
    out.monge_ampere_min = std::min(out.monge_ampere_min, 1.0 + bump[k]);

  TorusField logq(g.size(), kLogqClipFloor);
  TorusField ones(g.size(), 1.0);
  TorusDensity rescued = surgery_rescue(g, logq, ev->phi, ones);
  double mass = 0.0;
  double min_q = 1e300;
  for (std::int64_t k = 0; k < g.size(); ++k) {
    mass += rescued.q[k] * g.cell_area();
    min_q = std::min(min_q, rescued.q[k]);
  }
  out.mass_err = std::abs(mass - 1.0);
  if (!(min_q > 0)) out.mass_err = 1.0;
  return out;
}

double gradcheck_worst() {
  FlowStack s = make_flow_stack(8, 8, 1009, 0.2);
  const int P = param_count(s);
  Rng rng(1010);
  double worst = 0.0;
  for (int probe = 0; probe < 100; ++probe) {
    ComplexVec w = {{rng.normal(), rng.normal()}, {rng.normal(), rng.normal()}};
    auto [rev, fd] = grad_check(s, w, static_cast<int>(rng.index(P)));
    const double mag = std::max(std::abs(rev), std::abs(fd));
    if (mag < 1e-6) continue;
    worst = std::max(worst, std::abs(rev - fd) / mag);
  }
  return worst;
}

double diagnostics_zero_maps() {
  GridSpec g{64, 64, -3.2, -3.2, 0.1};
  DensityField d;
  d.g = g;
  d.p.resize(g.size());
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const double x = g.x(i), y = g.y(j);
      d.p[g.index(i, j)] = std::exp(-(x * x + y * y)) / kPi;
    }
  double sup = 0.0;
  CurvatureMap m1 = fig1_scalar_curvature(d);
  for (size_t n = 0; n < m1.raw.size(); ++n)
    if (!m1.mask[n]) sup = std::max(sup, std::abs(m1.raw[n]));
  CurvatureMap m2 = score_curvature_proxy(d);
  for (size_t n = 0; n < m2.raw.size(); ++n)
    if (!m2.mask[n]) sup = std::max(sup, std::abs(m2.raw[n]));
  return sup;
}

}  // namespace

std::vector<CheckResult> run_identity_suite() {
  Suite suite;
  suite.check("change_of_variables_affine", 1e-9, cov_affine_exactness);
  suite.check("fisher_pullback", 1e-4, [] { return fisher_pullback_worst(1e-3); });
  suite.check("fisher_pullback_rate", 0.0, fisher_pullback_rate);
  suite.check("ricci_fubini_study", 1e-3, ricci_fubini_study);
  suite.check("ricci_flat", 1e-8, ricci_flat);
  suite.check("jacobi_formula", 1e-5, jacobi_identity);
  suite.check("nkrf_nu0_bitexact", 0.0, nkrf_nu0_bitexact);
  suite.check("nkrf_cancellation", 0.0, nkrf_cancellation);
  {
    // shared run, timed under the first check
    std::optional<KlOutcome> kl;
    auto kl_ref = [&]() -> const KlOutcome& {
      if (!kl) kl = kl_outcome();
      return *kl;
    };
    suite.check("kl_dissipation_identity", 5e-3, [&] { return kl_ref().worst_rel; });
    suite.check("kl_monotone", 1e-6, [&] { return kl_ref().max_lhs; });
  }
  suite.check("perelman_stationary", 1e-10, perelman_stationary);
  suite.check("perelman_dt_sign", 0.0, perelman_dt_sign);
  {
    std::optional<SurgeryOutcome> sg;
    auto sg_ref = [&]() -> const SurgeryOutcome& {
      if (!sg) sg = surgery_outcome();
      return *sg;
    };
    suite.check("surgery_trigger", 0.0, [&] { return sg_ref().trigger_miss; });
    suite.check("surgery_mass", 1e-6, [&] { return sg_ref().mass_err; });
    suite.check("surgery_monge_ampere", 0.0, [&] { return -sg_ref().monge_ampere_min; });
  }
  suite.check("gradient_correctness", 1e-4, gradcheck_worst);
  suite.check("diagnostics_gaussian_zero", 1e-6, diagnostics_zero_maps);
  return suite.results;
}

void write_check_csv(const std::vector<CheckResult>& results, const std::string& path) {
  CsvWriter csv(path);
  csv.header({"name", "measured", "threshold", "status", "runtime_s"});
  for (const CheckResult& r : results) {
    char line[256];
    std::snprintf(line, sizeof line, "%s,%.17g,%.17g,%s,%.3f", r.name.c_str(), r.measured,
                  r.threshold, r.pass ? "PASS" : "FAIL", r.runtime_s);
    csv.raw_row(line);
  }
}

}  // namespace kahlerflow
