#include "kahlerflow/flow_layers.hpp"

namespace kahlerflow {

LayerOutput coupling_forward(const CouplingLayer& layer, const ComplexVec& z) {
  if (z.size() != 2) fail(NumErr::NonSquare, "coupling_forward: state must be in C^2");
  CouplingResult<double> r = coupling_forward_t<double>(layer, {z[0], z[1]});
  if (!finite(r.z[0]) || !finite(r.z[1]) || !std::isfinite(r.logdet))
    fail(NumErr::NonFinite, "coupling_forward: subnet output overflow");
  return {{r.z[0], r.z[1]}, r.logdet};
}

ComplexVec coupling_inverse(const CouplingLayer& layer, const ComplexVec& w) {
  if (w.size() != 2) fail(NumErr::NonSquare, "coupling_inverse: state must be in C^2");
  CouplingResult<double> r = coupling_inverse_t<double>(layer, {w[0], w[1]});
  if (!finite(r.z[0]) || !finite(r.z[1]))
    fail(NumErr::NonFinite, "coupling_inverse: exp overflow");
  return {r.z[0], r.z[1]};
}

ComplexLinear make_linear(int in, int out, Rng& rng, double scale) {
  ComplexLinear l;
  l.in = in;
  l.out = out;
  l.w.resize(static_cast<size_t>(in) * out);
  l.b.assign(out, Cx{0, 0});
  for (auto& w : l.w) w = {scale * rng.normal(), scale * rng.normal()};
  return l;
}

Subnet make_subnet(int hidden, Rng& rng, double scale, Activation act) {
  Subnet s;
  s.l1 = make_linear(1, hidden, rng, scale);
  s.l2 = make_linear(hidden, 1, rng, scale);
  s.act = act;
  return s;
}

CouplingLayer make_coupling_layer(int hidden, int parity, Rng& rng, double scale, Activation act) {
  CouplingLayer layer;
  layer.s_net = make_subnet(hidden, rng, scale, act);
  layer.t_net = make_subnet(hidden, rng, scale, act);
  layer.parity = parity;
  return layer;
}

CouplingLayer make_constant_layer(const Cx& s_value, const Cx& t_value, int parity) {
  CouplingLayer layer;
  auto constant_net = [](const Cx& v) {
    Subnet n;
    n.l1.in = 1;
    n.l1.out = 1;
    n.l1.w.assign(1, Cx{0, 0});
    n.l1.b.assign(1, Cx{0, 0});
    n.l2 = n.l1;
    n.l2.b[0] = v;
    n.act = Activation::None;
    return n;
  };
  layer.s_net = constant_net(s_value);
  layer.t_net = constant_net(t_value);
  layer.parity = parity;
  return layer;
}

}  // namespace kahlerflow
