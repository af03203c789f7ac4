#pragma once
#include <functional>
#include <optional>

#include "kahlerflow/discrete_flow.hpp"

namespace kahlerflow {

namespace detail {
template <typename T>
struct MakeScalar;
template <>
struct MakeScalar<double> {
  static double constant(double c, const double&) { return c; }
};
template <>
struct MakeScalar<ad::Var> {
  static ad::Var constant(double c, const ad::Var& like) { return ad::Var(*like.t, c); }
};
}  // namespace detail

// Velocity network ℂ²×ℝ → ℂ²; time enters as a third complex input t + 0i.
template <typename T>
struct VelocityNetT {
  ComplexLinearT<T> l1;  // 3 → 16
  ComplexLinearT<T> l2;  // 16 → 16
  ComplexLinearT<T> l3;  // 16 → 2

  std::array<CT<T>, 2> eval(const std::array<CT<T>, 2>& z, double t) const {
    const T& anchor = l1.w[0].re;
    CT<T> tc{detail::MakeScalar<T>::constant(t, anchor), detail::MakeScalar<T>::constant(0.0, anchor)};
    std::vector<CT<T>> x = {z[0], z[1], tc};
    std::vector<CT<T>> h = l1.forward(x);
    for (auto& v : h) v = cgelu_t(v);
    h = l2.forward(h);
    for (auto& v : h) v = cgelu_t(v);
    std::vector<CT<T>> o = l3.forward(h);
    return {o[0], o[1]};
  }
};

using VelocityNet = VelocityNetT<double>;

VelocityNet make_velocity_net(std::uint64_t seed, double scale);

// Black-box realified vector field for the divergence/integration ops; the
// test oracles pass hand-written fields of any complex dimension d ≤ 2.
using VField = std::function<ComplexVec(const ComplexVec&, double)>;

VField net_field(const VelocityNet& net);

// Exact divergence of the realified field on R^(2d): trace of the real
// Jacobian via central differences, 4d field evaluations.
double divergence_exact(const VField& v, const ComplexVec& z, double t, double step = 1e-4);

struct AugmentedState {
  ComplexVec z;
  double logq;
  double t;
};

// Fixed-step RK4 jointly on (z, logq) with dlogq/dt = −divergence.
// When logq0 is absent it starts from the base log-density at z0 (the
// forward-from-base convention). Aborts with the step index on non-finite
// states.
AugmentedState integrate(const VField& v, const ComplexVec& z0, double t0, double t1, int steps,
                         std::optional<double> logq0 = std::nullopt);

// ∫|v(z(t),t)|² dt along the RK4 trajectory, trapezoid on the step grid.
double kinetic_energy(const VField& v, const ComplexVec& z0, double t0, double t1, int steps);

inline constexpr int kDefaultRk4Steps = 64;

// Templated CNF core used by both evaluation and tape-based training:
// integrates z from t_from to t_to and accumulates ∫ div dt along the
// trajectory (measured in forward time).
template <typename T>
struct CnfPath {
  std::array<CT<T>, 2> z;
  T div_integral;
};

template <typename T>
T divergence_t(const VelocityNetT<T>& net, const std::array<CT<T>, 2>& z, double t, double h) {
  std::array<CT<T>, 2> p;
  auto shift_eval = [&](int axis, double delta) {
    p = z;
    if (axis == 0) p[0].re = p[0].re + delta;
    if (axis == 1) p[0].im = p[0].im + delta;
    if (axis == 2) p[1].re = p[1].re + delta;
    if (axis == 3) p[1].im = p[1].im + delta;
    return net.eval(p, t);
  };
  T acc = detail::MakeScalar<T>::constant(0.0, net.l1.w[0].re);
  for (int axis = 0; axis < 4; ++axis) {
    auto vp = shift_eval(axis, h);
    auto vm = shift_eval(axis, -h);
    T diff;
    switch (axis) {
      case 0: diff = vp[0].re - vm[0].re; break;
      case 1: diff = vp[0].im - vm[0].im; break;
      case 2: diff = vp[1].re - vm[1].re; break;
      default: diff = vp[1].im - vm[1].im; break;
    }
    acc = acc + diff * (1.0 / (2.0 * h));
  }
  return acc;
}

template <typename T>
CnfPath<T> cnf_path_t(const VelocityNetT<T>& net, std::array<CT<T>, 2> z, double t_from,
                      double t_to, int steps, double fd_step = 1e-4) {
  const double dt = (t_to - t_from) / steps;
  T u = detail::MakeScalar<T>::constant(0.0, net.l1.w[0].re);
  double t = t_from;
  for (int s = 0; s < steps; ++s) {
    // RK4 stage evaluations of (dz/dt, du/dt) = (v, div v)
    auto stage = [&](const std::array<CT<T>, 2>& zs, double ts) {
      return std::pair<std::array<CT<T>, 2>, T>(net.eval(zs, ts), divergence_t(net, zs, ts, fd_step));
    };
    auto [k1, d1] = stage(z, t);
    std::array<CT<T>, 2> z2 = {z[0] + k1[0] * (0.5 * dt), z[1] + k1[1] * (0.5 * dt)};
    auto [k2, d2] = stage(z2, t + 0.5 * dt);
    std::array<CT<T>, 2> z3 = {z[0] + k2[0] * (0.5 * dt), z[1] + k2[1] * (0.5 * dt)};
    auto [k3, d3] = stage(z3, t + 0.5 * dt);
    std::array<CT<T>, 2> z4 = {z[0] + k3[0] * dt, z[1] + k3[1] * dt};
    auto [k4, d4] = stage(z4, t + dt);
    const double w = dt / 6.0;
    for (int c = 0; c < 2; ++c)
      z[c] = z[c] + (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]) * w;
    u = u + (d1 + 2.0 * d2 + 2.0 * d3 + d4) * w;
    t = t_from + (s + 1) * dt;
  }
  return {z, u};
}

// Model log-density at a data point: pull w back from t = 1 to t = 0 and
// apply the instantaneous change of variables.
template <typename T>
T cnf_log_prob_t(const VelocityNetT<T>& net, const std::array<CT<T>, 2>& w, int steps) {
  CnfPath<T> path = cnf_path_t(net, w, 1.0, 0.0, steps);
  // Integrating from 1 to 0 gives div_integral = −∫₀¹ div dt, so
  // log q(w) = log p(z(0)) − ∫₀¹ div dt = base + div_integral.
  return base_log_density_t<T>(path.z) + path.div_integral;
}

double cnf_log_prob(const VelocityNet& net, const ComplexVec& w, int steps = kDefaultRk4Steps);
ComplexVec cnf_push_forward(const VelocityNet& net, const ComplexVec& z0, int steps = kDefaultRk4Steps);
Dataset cnf_sample(const VelocityNet& net, int n, std::uint64_t seed, int steps = kDefaultRk4Steps);

}  // namespace kahlerflow
