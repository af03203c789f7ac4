#include "kahlerflow/discrete_flow.hpp"

namespace kahlerflow {

double base_log_density(const ComplexVec& z) {
  double q = 0.0;
  for (const Cx& c : z) q += abs2(c);
  return -q - static_cast<double>(z.size()) * std::log(kPi);
}

PushResult push_forward(const FlowStack& stack, const ComplexVec& z0) {
  if (z0.size() != 2) fail(NumErr::NonSquare, "push_forward: state must be in C^2");
  PushResultT<double> r = push_forward_t<double>(stack, {z0[0], z0[1]});
  if (!finite(r.z[0]) || !finite(r.z[1]) || !std::isfinite(r.logdet))
    fail(NumErr::NonFinite, "push_forward: non-finite state");
  return {{r.z[0], r.z[1]}, r.logdet};
}

double log_prob(const FlowStack& stack, const ComplexVec& w) {
  if (w.size() != 2) fail(NumErr::NonSquare, "log_prob: state must be in C^2");
  const double lp = log_prob_t<double>(stack, {w[0], w[1]});
  if (!std::isfinite(lp)) fail(NumErr::Singular, "log_prob: inverse pass overflowed");
  return lp;
}

Dataset sample(const FlowStack& stack, int n, std::uint64_t seed) {
  Dataset base = sample_complex_gaussian(n, stack.d, seed);
  Dataset out;
  out.name = "flow_sample";
  out.seed = seed;
  out.d = stack.d;
  out.points.reserve(n);
  for (const ComplexVec& z0 : base.points) out.points.push_back(push_forward(stack, z0).z);
  return out;
}

CMap stack_forward_map(const FlowStack& stack) {
  return [stack](const ComplexVec& z) { return push_forward(stack, z).z; };
}

CMap stack_inverse_map(const FlowStack& stack) {
  return [stack](const ComplexVec& w) {
    ComplexVec z = w;
    for (auto it = stack.layers.rbegin(); it != stack.layers.rend(); ++it)
      z = coupling_inverse(*it, z);
    return z;
  };
}

CMap layer_forward_map(const CouplingLayer& layer) {
  return [layer](const ComplexVec& z) { return coupling_forward(layer, z).z_out; };
}

CMap layer_forward_map_raw(const CouplingLayer& layer) {
  return [layer](const ComplexVec& z) {
    CouplingResult<double> r = coupling_forward_t<double>(layer, {z[0], z[1]}, false);
    return ComplexVec{r.z[0], r.z[1]};
  };
}

FlowStack make_flow_stack(int K, int hidden, std::uint64_t seed, double scale, Activation act) {
  if (K < 1) throw std::invalid_argument("make_flow_stack: K must be >= 1");
  FlowStack stack;
  Rng rng(seed);
  stack.layers.reserve(K);
  for (int k = 0; k < K; ++k)
    stack.layers.push_back(make_coupling_layer(hidden, k % 2, rng, scale, act));
  return stack;
}

FlowStack make_elementwise_affine_stack(const Cx& a, const Cx& b) {
  FlowStack stack;
  const Cx log_a = clog(a);
  stack.layers.push_back(make_constant_layer(log_a, b, 0));
  stack.layers.push_back(make_constant_layer(log_a, b, 1));
  return stack;
}

}  // namespace kahlerflow
