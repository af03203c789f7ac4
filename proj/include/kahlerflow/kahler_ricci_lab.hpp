#pragma once
#include <optional>

#include "kahlerflow/discrete_flow.hpp"

namespace kahlerflow {

// N×N periodic grid on [0,L)², the flat 1-complex-dim torus all PDE
// identity checks run on.
struct TorusGrid {
  int n = 0;
  double L = 1.0;

  double spacing() const { return L / n; }
  double cell_area() const { return spacing() * spacing(); }
  std::int64_t size() const { return static_cast<std::int64_t>(n) * n; }
  int wrap(int i) const { return ((i % n) + n) % n; }
  std::int64_t index(int i, int j) const {
    return static_cast<std::int64_t>(wrap(i)) * n + wrap(j);
  }
  double x(int i) const { return spacing() * i; }
  double y(int j) const { return spacing() * j; }
};

using TorusField = std::vector<double>;

// Periodic stencil helpers (central differences, 5-point Laplacian).
double torus_ddx(const TorusGrid& g, const TorusField& f, int i, int j);
double torus_ddy(const TorusGrid& g, const TorusField& f, int i, int j);
double torus_laplacian(const TorusGrid& g, const TorusField& f, int i, int j);
// ∂_z∂_z̄ f = ¼Δf
TorusField ddzbar_dz(const TorusGrid& g, const TorusField& f);

// Normalized-KRF density recursion, pointwise:
//   log q_k = log q_{k−1} − [logdet_term + ν·Δt·log q_{k−1}]
// No renormalization inside the step.
TorusField nkrf_density_step(const TorusField& logq_prev, const TorusField& logdet_term, double nu,
                             double dt);

// Potential state on the torus: metric h = 1 + ∂∂̄Φ over the flat
// background, Ricci-potential field f fixed.
struct KRFState {
  TorusGrid grid;
  TorusField phi;
  TorusField f;
  double t = 0;
};

TorusField metric_of(const KRFState& state);  // h = 1 + ¼ΔΦ

// V = −h⁻¹ ∂_z̄ Φ̇ per node (the (1,0) component). Throws NotPositive if
// the metric fails positivity anywhere.
std::vector<Cx> velocity_from_potential(const KRFState& state, const TorusField& phidot);

// One step record of the KL dissipation run: lhs is the centered FD time
// derivative of KL(q_t‖p), rhs = −∫h⁻¹|∂_zΦ̇|² q dA + ∫q̇ dA.
struct KlStep {
  double t;
  double kl;
  double lhs;
  double rhs;
  double fisher;      // ∫h⁻¹|∂_zΦ̇|² q dA
  double correction;  // ∫q̇ dA
};

// Evolves q by the continuity equation with the potential velocity of
// Φ̇ = log(q/p) on the static flat torus (h ≡ 1); second-order
// upwind-biased finite volume, CFL ≤ 0.4 enforced. Returns one record per
// interior step (centered lhs needs both neighbors).
std::vector<KlStep> kl_dissipation_check(const TorusGrid& grid, TorusField q0, const TorusField& p,
                                         int steps, double dt);

struct PerelmanRun {
  std::vector<double> fk;       // F_K per recorded state (steps+1 values)
  std::vector<double> phidot_sup;  // sup|Φ̇| per step
  TorusField phi_final;
};

// Explicit Euler on Φ̇ = log det h − f with h = 1 + ∂∂̄Φ recomputed each
// step; F_K = Σ(log h − f)·h·cellArea. Throws PositivityLost(step) when
// the metric degenerates.
PerelmanRun perelman_flow(const KRFState& state, int steps, double dt);

// Grid density against the metric volume h·dA.
struct TorusDensity {
  TorusGrid grid;
  TorusField q;
  double Z = 1.0;
};

inline constexpr double kLogqClipFloor = -700.0;

// Log-sum-exp rescue: q̃ ∝ exp(logq) + exp(φ), renormalized against the
// metric volume. Pre: det(h + ∂∂̄φ) > 0 at every node.
TorusDensity surgery_rescue(const TorusGrid& grid, const TorusField& logq_clipped,
                            const TorusField& phi, const TorusField& h_field);

struct SurgeryEvent {
  int trigger_layer = -1;
  double det_floor = 0;
  double batch_mean_det = 0;
  TorusGrid probe_grid;
  TorusField phi;      // rescue potential, positivity-checked on the probe grid
  double rescued_Z = 0;
};

// Scans layers for pullback-metric collapse over the batch (mean det of
// J†J below det_floor). On trigger, builds a Gaussian-bump rescue
// potential validated against the unit background metric and the rescued
// normalization of the clipped model density on the probe grid.
std::optional<SurgeryEvent> singularity_monitor(const FlowStack& stack, const Dataset& batch,
                                                double det_floor);

}  // namespace kahlerflow
