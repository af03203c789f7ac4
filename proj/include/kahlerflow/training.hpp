#pragma once
#include <cstdint>
#include <utility>
#include <vector>

#include "kahlerflow/continuous_flow.hpp"
#include "kahlerflow/discrete_flow.hpp"
#include "kahlerflow/parallel.hpp"

namespace kahlerflow {

struct TrainConfig {
  double lr = 2e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int epochs = 2000;  // one Adam step per epoch on one minibatch
  int batch = 256;
  std::uint64_t seed = 0;
  // Global-norm gradient clip; <= 0 disables. Off by default: with Adam the
  // unclipped step is already magnitude-normalized, and clipping was
  // observed to leave sharp low-density canyons unrepaired for long
  // stretches (huge transient minibatch NLL spikes).
  double clip_norm = 0.0;
  int rk4_steps = 32;  // continuous flow only
};

struct TrainResult {
  std::vector<double> loss_curve;  // minibatch mean NLL per epoch, pre-update
};

// Fixed parameter enumeration shared by the optimizer, the tape lift and
// the checkpoint format: layers in order, s_net then t_net, l1 then l2,
// weights row-major (re, im) then biases (re, im).
template <typename T, typename F>
void visit_linear(ComplexLinearT<T>& lin, F&& fn) {
  for (auto& w : lin.w) {
    fn(w.re);
    fn(w.im);
  }
  for (auto& b : lin.b) {
    fn(b.re);
    fn(b.im);
  }
}

template <typename T, typename F>
void visit_params(FlowStackT<T>& stack, F&& fn) {
  for (auto& layer : stack.layers) {
    visit_linear(layer.s_net.l1, fn);
    visit_linear(layer.s_net.l2, fn);
    visit_linear(layer.t_net.l1, fn);
    visit_linear(layer.t_net.l2, fn);
  }
}

template <typename T, typename F>
void visit_params(VelocityNetT<T>& net, F&& fn) {
  visit_linear(net.l1, fn);
  visit_linear(net.l2, fn);
  visit_linear(net.l3, fn);
}

template <typename Model>
int param_count(const Model& model) {
  int n = 0;
  visit_params(const_cast<Model&>(model), [&](double&) { ++n; });
  return n;
}

template <typename Model>
std::vector<double> get_params(const Model& model) {
  std::vector<double> out;
  visit_params(const_cast<Model&>(model), [&](double& p) { out.push_back(p); });
  return out;
}

template <typename Model>
void set_params(Model& model, const std::vector<double>& p) {
  size_t i = 0;
  visit_params(model, [&](double& slot) { slot = p[i++]; });
}

// Mean NLL over the batch; per-sample terms summed in fixed block order so
// the result is independent of thread count (serial and parallel agree
// bitwise).
double nll_loss(const FlowStack& stack, const Dataset& batch,
                par::Exec exec = par::Exec::Parallel);
double nll_loss(const VelocityNet& net, const Dataset& batch, int rk4_steps = kDefaultRk4Steps,
                par::Exec exec = par::Exec::Parallel);

// Batch mean NLL and its gradient w.r.t. the flat parameter vector.
std::pair<double, std::vector<double>> nll_grad(const FlowStack& stack, const Dataset& batch,
                                                par::Exec exec = par::Exec::Parallel);
std::pair<double, std::vector<double>> nll_grad(const VelocityNet& net, const Dataset& batch,
                                                int rk4_steps,
                                                par::Exec exec = par::Exec::Parallel);

// (reverse-mode gradient, central FD gradient, step 1e-5) of the
// single-point NLL w.r.t. one parameter.
std::pair<double, double> grad_check(const FlowStack& stack, const ComplexVec& point,
                                     int param_index);
std::pair<double, double> grad_check(const VelocityNet& net, const ComplexVec& point,
                                     int param_index, int rk4_steps);

TrainResult train(FlowStack& stack, const Dataset& data, const TrainConfig& cfg);
TrainResult train(VelocityNet& net, const Dataset& data, const TrainConfig& cfg);

}  // namespace kahlerflow
