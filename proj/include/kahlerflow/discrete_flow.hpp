#pragma once
#include <cstdint>

#include "kahlerflow/datasets.hpp"
#include "kahlerflow/flow_layers.hpp"
#include "kahlerflow/wirtinger.hpp"

namespace kahlerflow {

// K stacked coupling layers with alternating parity; forward direction is
// generative (base → data).
template <typename T>
struct FlowStackT {
  std::vector<CouplingLayerT<T>> layers;
  int d = 2;
};

using FlowStack = FlowStackT<double>;

// log p_α(z) = −d·log π − z†z for the complex unit Gaussian base.
template <typename T>
T base_log_density_t(const std::array<CT<T>, 2>& z) {
  T q = abs2(z[0]) + abs2(z[1]);
  return -q - 2.0 * std::log(kPi);
}
double base_log_density(const ComplexVec& z);

template <typename T>
struct PushResultT {
  std::array<CT<T>, 2> z;
  T logdet{};  // Σ_k log|det_ℂ ∇Ψ_k|²
};

template <typename T>
PushResultT<T> push_forward_t(const FlowStackT<T>& stack, const std::array<CT<T>, 2>& z0) {
  PushResultT<T> r;
  r.z = z0;
  bool first = true;
  for (const auto& layer : stack.layers) {
    CouplingResult<T> step = coupling_forward_t(layer, r.z);
    r.z = step.z;
    r.logdet = first ? step.logdet : r.logdet + step.logdet;
    first = false;
  }
  return r;
}

// log q(w): pull w back through the inverses and add the base log-density
// plus the accumulated inverse log-dets (equal to minus the forward ones).
template <typename T>
T log_prob_t(const FlowStackT<T>& stack, const std::array<CT<T>, 2>& w) {
  std::array<CT<T>, 2> z = w;
  bool first = true;
  T logdet_inv{};
  for (auto it = stack.layers.rbegin(); it != stack.layers.rend(); ++it) {
    CouplingResult<T> step = coupling_inverse_t(*it, z);
    z = step.z;
    logdet_inv = first ? step.logdet : logdet_inv + step.logdet;
    first = false;
  }
  T base = base_log_density_t<T>(z);
  return first ? base : base + logdet_inv;
}

struct PushResult {
  ComplexVec z;
  double logdet;
};

PushResult push_forward(const FlowStack& stack, const ComplexVec& z0);
double log_prob(const FlowStack& stack, const ComplexVec& w);
Dataset sample(const FlowStack& stack, int n, std::uint64_t seed);

// Forward map as a black-box ℂ²→ℂ² callable (for the Wirtinger probes).
CMap stack_forward_map(const FlowStack& stack);
CMap stack_inverse_map(const FlowStack& stack);
CMap layer_forward_map(const CouplingLayer& layer);
// Unclamped variant: the singular path the surgery monitor probes.
CMap layer_forward_map_raw(const CouplingLayer& layer);

FlowStack make_flow_stack(int K, int hidden, std::uint64_t seed, double scale,
                          Activation act = Activation::CGelu);
// Elementwise w = a·z + b realized as two constant coupling layers.
FlowStack make_elementwise_affine_stack(const Cx& a, const Cx& b);

}  // namespace kahlerflow
