#include "kahlerflow/continuous_flow.hpp"

#include <cmath>
#include <string>

namespace kahlerflow {

VelocityNet make_velocity_net(std::uint64_t seed, double scale) {
  Rng rng(seed);
  VelocityNet net;
  net.l1 = make_linear(3, 16, rng, scale);
  net.l2 = make_linear(16, 16, rng, scale);
  net.l3 = make_linear(16, 2, rng, scale);
  return net;
}

VField net_field(const VelocityNet& net) {
  return [net](const ComplexVec& z, double t) {
    if (z.size() != 2) fail(NumErr::NonSquare, "net_field: state must be in C^2");
    std::array<Cx, 2> out = net.eval({z[0], z[1]}, t);
    return ComplexVec{out[0], out[1]};
  };
}

double divergence_exact(const VField& v, const ComplexVec& z, double t, double step) {
  const int d = static_cast<int>(z.size());
  if (d > 2) fail(NumErr::NonSquare, "divergence_exact: exact trace limited to d <= 2");
  double acc = 0.0;
  for (int axis = 0; axis < 2 * d; ++axis) {
    ComplexVec p = z;
    double* slot = (axis % 2 == 0) ? &p[axis / 2].re : &p[axis / 2].im;
    *slot += step;
    const ComplexVec vp = v(p, t);
    *slot -= 2 * step;
    const ComplexVec vm = v(p, t);
    const double comp_p = (axis % 2 == 0) ? vp[axis / 2].re : vp[axis / 2].im;
    const double comp_m = (axis % 2 == 0) ? vm[axis / 2].re : vm[axis / 2].im;
    acc += (comp_p - comp_m) / (2 * step);
  }
  if (!std::isfinite(acc)) fail(NumErr::NonFinite, "divergence_exact: non-finite");
  return acc;
}

namespace {

struct Deriv {
  ComplexVec dz;
  double dlogq;
};

Deriv rhs(const VField& v, const ComplexVec& z, double t) {
  return {v(z, t), -divergence_exact(v, z, t)};
}

}  // namespace

AugmentedState integrate(const VField& v, const ComplexVec& z0, double t0, double t1, int steps,
                         std::optional<double> logq0) {
  if (steps < 1) fail(NumErr::NonFinite, "integrate: steps must be >= 1");
  const int d = static_cast<int>(z0.size());
  const double dt = (t1 - t0) / steps;
  ComplexVec z = z0;
  double logq = logq0 ? *logq0 : base_log_density(z0);
  double t = t0;
  for (int s = 0; s < steps; ++s) {
    const Deriv k1 = rhs(v, z, t);
    ComplexVec z2(d), z3(d), z4(d);
    for (int c = 0; c < d; ++c) z2[c] = z[c] + k1.dz[c] * (0.5 * dt);
    const Deriv k2 = rhs(v, z2, t + 0.5 * dt);
    for (int c = 0; c < d; ++c) z3[c] = z[c] + k2.dz[c] * (0.5 * dt);
    const Deriv k3 = rhs(v, z3, t + 0.5 * dt);
    for (int c = 0; c < d; ++c) z4[c] = z[c] + k3.dz[c] * dt;
    const Deriv k4 = rhs(v, z4, t + dt);
    const double w = dt / 6.0;
    for (int c = 0; c < d; ++c)
      z[c] = z[c] + (k1.dz[c] + 2.0 * k2.dz[c] + 2.0 * k3.dz[c] + k4.dz[c]) * w;
    logq += (k1.dlogq + 2.0 * k2.dlogq + 2.0 * k3.dlogq + k4.dlogq) * w;
    t = t0 + (s + 1) * dt;
    for (const Cx& c : z)
      if (!finite(c) || !std::isfinite(logq))
        fail(NumErr::NonFinite, "integrate: non-finite state at step " + std::to_string(s));
  }
  return {z, logq, t1};
}

double kinetic_energy(const VField& v, const ComplexVec& z0, double t0, double t1, int steps) {
  if (steps < 1) fail(NumErr::NonFinite, "kinetic_energy: steps must be >= 1");
  const double dt = (t1 - t0) / steps;
  auto speed2 = [&](const ComplexVec& z, double t) {
    double s = 0.0;
    for (const Cx& c : v(z, t)) s += abs2(c);
    return s;
  };
  // March the state on the same RK4 grid (state only, no log-density),
  // trapezoid on |v|².
  const int d = static_cast<int>(z0.size());
  ComplexVec z = z0;
  double acc = 0.0;
  double prev = speed2(z, t0);
  for (int s = 0; s < steps; ++s) {
    const double t = t0 + s * dt;
    const ComplexVec k1 = v(z, t);
    ComplexVec z2(d), z3(d), z4(d);
    for (int c = 0; c < d; ++c) z2[c] = z[c] + k1[c] * (0.5 * dt);
    const ComplexVec k2 = v(z2, t + 0.5 * dt);
    for (int c = 0; c < d; ++c) z3[c] = z[c] + k2[c] * (0.5 * dt);
    const ComplexVec k3 = v(z3, t + 0.5 * dt);
    for (int c = 0; c < d; ++c) z4[c] = z[c] + k3[c] * dt;
    const ComplexVec k4 = v(z4, t + dt);
    for (int c = 0; c < d; ++c)
      z[c] = z[c] + (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]) * (dt / 6.0);
    const double cur = speed2(z, t + dt);
    acc += 0.5 * (prev + cur) * dt;
    prev = cur;
    for (const Cx& c : z)
      if (!finite(c)) fail(NumErr::NonFinite, "kinetic_energy: non-finite state");
  }
  return acc;
}

double cnf_log_prob(const VelocityNet& net, const ComplexVec& w, int steps) {
  if (w.size() != 2) fail(NumErr::NonSquare, "cnf_log_prob: state must be in C^2");
  const double lp = cnf_log_prob_t<double>(net, {w[0], w[1]}, steps);
  if (!std::isfinite(lp)) fail(NumErr::Singular, "cnf_log_prob: non-finite");
  return lp;
}

ComplexVec cnf_push_forward(const VelocityNet& net, const ComplexVec& z0, int steps) {
  if (z0.size() != 2) fail(NumErr::NonSquare, "cnf_push_forward: state must be in C^2");
  CnfPath<double> p = cnf_path_t<double>(net, {z0[0], z0[1]}, 0.0, 1.0, steps);
  if (!finite(p.z[0]) || !finite(p.z[1])) fail(NumErr::NonFinite, "cnf_push_forward: non-finite");
  return {p.z[0], p.z[1]};
}

Dataset cnf_sample(const VelocityNet& net, int n, std::uint64_t seed, int steps) {
  Dataset base = sample_complex_gaussian(n, 2, seed);
  Dataset out;
  out.name = "cnf_sample";
  out.seed = seed;
  out.points.reserve(n);
  for (const ComplexVec& z0 : base.points) out.points.push_back(cnf_push_forward(net, z0, steps));
  return out;
}

}  // namespace kahlerflow
