#include "kahlerflow/kahler_ricci_lab.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kahlerflow/geometry.hpp"

namespace kahlerflow {

double torus_ddx(const TorusGrid& g, const TorusField& f, int i, int j) {
  return (f[g.index(i + 1, j)] - f[g.index(i - 1, j)]) / (2.0 * g.spacing());
}

double torus_ddy(const TorusGrid& g, const TorusField& f, int i, int j) {
  return (f[g.index(i, j + 1)] - f[g.index(i, j - 1)]) / (2.0 * g.spacing());
}

double torus_laplacian(const TorusGrid& g, const TorusField& f, int i, int j) {
  const double h2 = g.spacing() * g.spacing();
  return (f[g.index(i + 1, j)] + f[g.index(i - 1, j)] + f[g.index(i, j + 1)] +
          f[g.index(i, j - 1)] - 4.0 * f[g.index(i, j)]) /
         h2;
}

TorusField ddzbar_dz(const TorusGrid& g, const TorusField& f) {
  TorusField out(g.size());
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) out[g.index(i, j)] = 0.25 * torus_laplacian(g, f, i, j);
  return out;
}

TorusField nkrf_density_step(const TorusField& logq_prev, const TorusField& logdet_term, double nu,
                             double dt) {
  if (logq_prev.size() != logdet_term.size())
    fail(NumErr::NonFinite, "nkrf_density_step: field size mismatch");
  TorusField out(logq_prev.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = logq_prev[k] - (logdet_term[k] + nu * dt * logq_prev[k]);
    if (!std::isfinite(out[k])) fail(NumErr::NonFinite, "nkrf_density_step: non-finite output");
  }
  return out;
}

TorusField metric_of(const KRFState& state) {
  const TorusGrid& g = state.grid;
  TorusField h(g.size());
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      h[g.index(i, j)] = 1.0 + 0.25 * torus_laplacian(g, state.phi, i, j);
  return h;
}

std::vector<Cx> velocity_from_potential(const KRFState& state, const TorusField& phidot) {
  const TorusGrid& g = state.grid;
  const TorusField h = metric_of(state);
  std::vector<Cx> v(g.size());
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const std::int64_t n = g.index(i, j);
      if (!(h[n] > 0)) fail(NumErr::NotPositive, "velocity_from_potential: metric not positive");
      // ∂_z̄ = ½(∂_x + i ∂_y)
      const Cx dzbar{0.5 * torus_ddx(g, phidot, i, j), 0.5 * torus_ddy(g, phidot, i, j)};
      v[n] = (-1.0 / h[n]) * dzbar;
    }
  return v;
}

namespace {

// Second-order upwind-biased finite-volume divergence of (q u) on the
// torus; unlimited central slopes, upwind face selection.
TorusField fv_divergence(const TorusGrid& g, const TorusField& q, const std::vector<double>& ux,
                         const std::vector<double>& uy) {
  const double h = g.spacing();
  TorusField div(g.size(), 0.0);
  auto slope_x = [&](int i, int j) {
    return 0.5 * (q[g.index(i + 1, j)] - q[g.index(i - 1, j)]);
  };
  auto slope_y = [&](int i, int j) {
    return 0.5 * (q[g.index(i, j + 1)] - q[g.index(i, j - 1)]);
  };
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      // faces (i+1/2, j) and (i, j+1/2); each cell's divergence uses its
      // right/top face minus the left/bottom neighbour's.
      const double uxf = 0.5 * (ux[g.index(i, j)] + ux[g.index(i + 1, j)]);
      const double qxf = uxf >= 0 ? q[g.index(i, j)] + 0.5 * slope_x(i, j)
                                  : q[g.index(i + 1, j)] - 0.5 * slope_x(i + 1, j);
      const double uyf = 0.5 * (uy[g.index(i, j)] + uy[g.index(i, j + 1)]);
      const double qyf = uyf >= 0 ? q[g.index(i, j)] + 0.5 * slope_y(i, j)
                                  : q[g.index(i, j + 1)] - 0.5 * slope_y(i, j + 1);
      const double fx = uxf * qxf;
      const double fy = uyf * qyf;
      div[g.index(i, j)] += (fx + fy) / h;
      div[g.index(i + 1, j)] -= fx / h;
      div[g.index(i, j + 1)] -= fy / h;
    }
  return div;
}

}  // namespace

std::vector<KlStep> kl_dissipation_check(const TorusGrid& grid, TorusField q0, const TorusField& p,
                                         int steps, double dt) {
  const double area = grid.cell_area();
  const std::int64_t N = grid.size();
  for (std::int64_t k = 0; k < N; ++k)
    if (!(q0[k] > 0) || !(p[k] > 0))
      fail(NumErr::NotPositive, "kl_dissipation_check: fields must be strictly positive");

  std::vector<double> kl_series;
  std::vector<double> fisher_series;
  std::vector<double> corr_series;
  std::vector<double> t_series;

  TorusField q = std::move(q0);
  TorusField phidot(N), logq_over_p(N);
  std::vector<double> ux(N), uy(N);

  for (int s = 0; s <= steps; ++s) {
    // Φ̇ = log(q/p); flat static metric, so h ≡ 1 below.
    double kl = 0.0;
    for (std::int64_t k = 0; k < N; ++k) {
      if (q[k] < -1e-12) fail(NumErr::NegativeDensity, "kl_dissipation_check: q went negative");
      const double qk = std::max(q[k], 1e-300);
      phidot[k] = std::log(qk / p[k]);
      kl += qk * phidot[k] * area;
    }
    // velocity u = ½(Re V, Im V) with V = −∂_z̄Φ̇: u = −¼∇Φ̇; this is the
    // scaling for which dKL/dt = −∫|∂_zΦ̇|² q dA on the flat torus.
    double fisher = 0.0;
    double max_u = 0.0;
    for (int i = 0; i < grid.n; ++i)
      for (int j = 0; j < grid.n; ++j) {
        const std::int64_t k = grid.index(i, j);
        const double gx = torus_ddx(grid, phidot, i, j);
        const double gy = torus_ddy(grid, phidot, i, j);
        ux[k] = -0.25 * gx;
        uy[k] = -0.25 * gy;
        fisher += 0.25 * (gx * gx + gy * gy) * q[k] * area;
        max_u = std::max(max_u, std::max(std::abs(ux[k]), std::abs(uy[k])));
      }
    if (max_u * dt > 0.4 * grid.spacing())
      fail(NumErr::NonFinite, "kl_dissipation_check: CFL 0.4 violated, reduce dt");

    kl_series.push_back(kl);
    fisher_series.push_back(fisher);
    t_series.push_back(s * dt);
    if (s == steps) break;

    const TorusField div = fv_divergence(grid, q, ux, uy);
    double mass_rate = 0.0;
    for (std::int64_t k = 0; k < N; ++k) {
      q[k] -= dt * div[k];
      mass_rate -= div[k] * area;
    }
    corr_series.push_back(mass_rate);  // ∫q̇ dA; telescopes to ~0 exactly
  }

  std::vector<KlStep> out;
  for (int s = 1; s < steps; ++s) {
    KlStep st;
    st.t = t_series[s];
    st.kl = kl_series[s];
    st.lhs = (kl_series[s + 1] - kl_series[s - 1]) / (2.0 * dt);
    st.fisher = fisher_series[s];
    st.correction = corr_series[s];
    st.rhs = -st.fisher + st.correction;
    out.push_back(st);
  }
  return out;
}

PerelmanRun perelman_flow(const KRFState& state, int steps, double dt) {
  const TorusGrid& g = state.grid;
  const double area = g.cell_area();
  KRFState cur = state;
  PerelmanRun run;
  run.fk.reserve(steps + 1);
  run.phidot_sup.reserve(steps);

  for (int s = 0; s <= steps; ++s) {
    const TorusField h = metric_of(cur);
    double fk = 0.0;
    for (std::int64_t k = 0; k < g.size(); ++k) {
      if (!(h[k] > 0))
        fail(NumErr::PositivityLost, "perelman_flow: metric positivity lost at step " +
                                         std::to_string(s));
      fk += (std::log(h[k]) - cur.f[k]) * h[k] * area;
    }
    run.fk.push_back(fk);
    if (s == steps) break;

    double sup = 0.0;
    for (std::int64_t k = 0; k < g.size(); ++k) {
      const double phidot = std::log(h[k]) - cur.f[k];
      cur.phi[k] += dt * phidot;
      sup = std::max(sup, std::abs(phidot));
    }
    run.phidot_sup.push_back(sup);
    cur.t += dt;
  }
  run.phi_final = std::move(cur.phi);
  return run;
}

TorusDensity surgery_rescue(const TorusGrid& grid, const TorusField& logq_clipped,
                            const TorusField& phi, const TorusField& h_field) {
  const std::int64_t N = grid.size();
  const TorusField bump = ddzbar_dz(grid, phi);
  for (std::int64_t k = 0; k < N; ++k)
    if (!(h_field[k] + bump[k] > 0))
      fail(NumErr::MongeAmpereViolation, "surgery_rescue: det(h + ddzbar(phi)) not positive");

  TorusDensity out;
  out.grid = grid;
  out.q.resize(N);
  double z = 0.0;
  for (std::int64_t k = 0; k < N; ++k) {
    const double lq = std::max(logq_clipped[k], kLogqClipFloor);
    out.q[k] = std::exp(lq) + std::exp(phi[k]);
    z += out.q[k] * h_field[k] * grid.cell_area();
  }
  if (!(z > 1e-300)) fail(NumErr::ZeroMass, "surgery_rescue: zero mass");
  for (double& v : out.q) v /= z;
  out.Z = z;
  return out;
}

std::optional<SurgeryEvent> singularity_monitor(const FlowStack& stack, const Dataset& batch,
                                                double det_floor) {
  if (batch.points.empty()) return std::nullopt;
  std::vector<ComplexVec> inputs = batch.points;
  int trigger = -1;
  double mean_det = 0.0;
  for (std::size_t k = 0; k < stack.layers.size(); ++k) {
    // Unclamped maps: the monitor watches the singular regime the
    // training-time clamp hides.
    const CMap layer = layer_forward_map_raw(stack.layers[k]);
    double acc = 0.0;
    std::vector<ComplexVec> next(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      WirtingerJet jet = wirtinger_fd(layer, inputs[i]);
      acc += det_c(gram(jet.d_dz)).re;
      next[i] = jet.value;
    }
    acc /= static_cast<double>(inputs.size());
    if (acc < det_floor) {
      trigger = static_cast<int>(k);
      mean_det = acc;
      break;
    }
    inputs = std::move(next);
  }
  if (trigger < 0) return std::nullopt;

  SurgeryEvent ev;
  ev.trigger_layer = trigger;
  ev.det_floor = det_floor;
  ev.batch_mean_det = mean_det;

  // Probe grid sized from the batch extent of the plotted coordinate.
  double extent = 1.0;
  for (const ComplexVec& pnt : batch.points)
    extent = std::max({extent, std::abs(pnt[0].re), std::abs(pnt[0].im)});
  ev.probe_grid = {64, 2.0 * extent + 2.0};
  const TorusGrid& g = ev.probe_grid;

  // Gaussian-bump rescue potential. Validity is against the unit
  // background metric (the restart re-seeds the flat base); a is walked
  // down until 1 + ∂∂̄φ > 0 everywhere, b normalizes ∫e^φ dA to 1.
  const double cx = g.L / 2.0, cy = g.L / 2.0;
  const double sigma = g.L / 8.0;
  double a = 1.0;
  TorusField phi(g.size());
  for (int attempt = 0; attempt < 60; ++attempt) {
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) {
        const double dx = g.x(i) - cx, dy = g.y(j) - cy;
        phi[g.index(i, j)] = a * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      }
    const TorusField bump = ddzbar_dz(g, phi);
    double worst = 1e300;
    for (std::int64_t k = 0; k < g.size(); ++k) worst = std::min(worst, 1.0 + bump[k]);
    if (worst > 1e-6) break;
    a *= 0.5;
  }
  double mass = 0.0;
  for (std::int64_t k = 0; k < g.size(); ++k) mass += std::exp(phi[k]) * g.cell_area();
  const double b = -std::log(mass);
  for (double& v : phi) v += b;
  ev.phi = phi;

  // Rescued normalization of the clipped model density on the probe grid.
  TorusField logq(g.size());
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const Cx z{g.x(i) - cx, g.y(j) - cy};
      double lp;
      try {
        lp = log_prob(stack, {z, z});
      } catch (const NumericError&) {
        lp = kLogqClipFloor;
      }
      logq[g.index(i, j)] = std::max(lp, kLogqClipFloor);
    }
  TorusField ones(g.size(), 1.0);
  ev.rescued_Z = surgery_rescue(g, logq, ev.phi, ones).Z;
  return ev;
}

}  // namespace kahlerflow
