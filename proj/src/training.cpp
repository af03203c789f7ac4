#include "kahlerflow/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kahlerflow/parallel.hpp"

namespace kahlerflow {

namespace {

constexpr int kBlock = 32;  // fixed reduction block, independent of threads

template <typename T>
ComplexLinearT<ad::Var> lift_linear(const ComplexLinearT<T>& lin, ad::Tape& tape) {
  ComplexLinearT<ad::Var> out;
  out.in = lin.in;
  out.out = lin.out;
  out.w.reserve(lin.w.size());
  out.b.reserve(lin.b.size());
  for (const auto& w : lin.w) out.w.push_back({ad::Var(tape, w.re), ad::Var(tape, w.im)});
  for (const auto& b : lin.b) out.b.push_back({ad::Var(tape, b.re), ad::Var(tape, b.im)});
  return out;
}

// Leaves are pushed in visit_params order, so adjoints 0..P-1 line up with
// the flat parameter vector.
FlowStackT<ad::Var> lift(const FlowStack& stack, ad::Tape& tape) {
  FlowStackT<ad::Var> out;
  out.d = stack.d;
  out.layers.reserve(stack.layers.size());
  for (const auto& layer : stack.layers) {
    CouplingLayerT<ad::Var> l;
    l.parity = layer.parity;
    l.s_net.act = layer.s_net.act;
    l.t_net.act = layer.t_net.act;
    l.s_net.l1 = lift_linear(layer.s_net.l1, tape);
    l.s_net.l2 = lift_linear(layer.s_net.l2, tape);
    l.t_net.l1 = lift_linear(layer.t_net.l1, tape);
    l.t_net.l2 = lift_linear(layer.t_net.l2, tape);
    out.layers.push_back(std::move(l));
  }
  return out;
}

VelocityNetT<ad::Var> lift(const VelocityNet& net, ad::Tape& tape) {
  VelocityNetT<ad::Var> out;
  out.l1 = lift_linear(net.l1, tape);
  out.l2 = lift_linear(net.l2, tape);
  out.l3 = lift_linear(net.l3, tape);
  return out;
}

std::array<CT<ad::Var>, 2> lift_point(const ComplexVec& w, ad::Tape& tape) {
  return {CT<ad::Var>{ad::Var(tape, w[0].re), ad::Var(tape, w[0].im)},
          CT<ad::Var>{ad::Var(tape, w[1].re), ad::Var(tape, w[1].im)}};
}

// Per-sample negative log-likelihood on the tape.
template <typename Model>
ad::Var sample_nll(const Model& lifted, const std::array<CT<ad::Var>, 2>& w, int rk4_steps);

template <>
ad::Var sample_nll(const FlowStackT<ad::Var>& lifted, const std::array<CT<ad::Var>, 2>& w, int) {
  return -log_prob_t<ad::Var>(lifted, w);
}

template <>
ad::Var sample_nll(const VelocityNetT<ad::Var>& lifted, const std::array<CT<ad::Var>, 2>& w,
                   int rk4_steps) {
  return -cnf_log_prob_t<ad::Var>(lifted, w, rk4_steps);
}

double plain_nll(const FlowStack& m, const ComplexVec& w, int) { return -log_prob(m, w); }
double plain_nll(const VelocityNet& m, const ComplexVec& w, int steps) {
  return -cnf_log_prob(m, w, steps);
}

template <typename Model>
double nll_mean(const Model& model, const Dataset& batch, int rk4_steps, par::Exec exec) {
  if (batch.points.empty()) fail(NumErr::EmptyDataset, "nll_loss: empty batch");
  const int n = static_cast<int>(batch.points.size());
  const int nblocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(nblocks, 0.0);
  par::for_index(nblocks, exec, [&](std::int64_t b) {
    double acc = 0.0;
    const int lo = static_cast<int>(b) * kBlock;
    const int hi = std::min(lo + kBlock, n);
    for (int i = lo; i < hi; ++i) acc += plain_nll(model, batch.points[i], rk4_steps);
    partial[b] = acc;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  const double loss = total / n;
  if (!std::isfinite(loss)) fail(NumErr::Singular, "nll_loss: non-finite");
  return loss;
}

template <typename Model>
std::pair<double, std::vector<double>> nll_grad_impl(const Model& model, const Dataset& batch,
                                                     int rk4_steps,
                                                     par::Exec exec = par::Exec::Parallel) {
  if (batch.points.empty()) fail(NumErr::EmptyDataset, "nll_grad: empty batch");
  const int n = static_cast<int>(batch.points.size());
  const int P = param_count(model);
  const int nblocks = (n + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> grad_blocks(nblocks);
  std::vector<double> loss_blocks(nblocks, 0.0);

  par::for_index(nblocks, exec, [&](std::int64_t b) {
    static thread_local ad::Tape tape;
    std::vector<double> g(P, 0.0);
    double loss = 0.0;
    const int lo = static_cast<int>(b) * kBlock;
    const int hi = std::min(lo + kBlock, n);
    for (int i = lo; i < hi; ++i) {
      tape.clear();
      auto lifted = lift(model, tape);
      auto w = lift_point(batch.points[i], tape);
      ad::Var nll = sample_nll(lifted, w, rk4_steps);
      loss += nll.v;
      const std::vector<double>& adj = tape.backward(nll.i);
      for (int p = 0; p < P; ++p) g[p] += adj[p];
    }
    grad_blocks[b] = std::move(g);
    loss_blocks[b] = loss;
  });

  std::vector<double> grad(P, 0.0);
  double loss = 0.0;
  for (int b = 0; b < nblocks; ++b) {
    loss += loss_blocks[b];
    for (int p = 0; p < P; ++p) grad[p] += grad_blocks[b][p];
  }
  const double inv_n = 1.0 / n;
  for (double& g : grad) g *= inv_n;
  return {loss * inv_n, grad};
}

template <typename Model>
std::pair<double, double> grad_check_impl(const Model& model, const ComplexVec& point,
                                          int param_index, int rk4_steps) {
  Dataset single;
  single.points = {point};
  auto [loss, grad] = nll_grad_impl(model, single, rk4_steps);
  (void)loss;
  const double h = 1e-5;
  Model bumped = model;
  std::vector<double> p = get_params(model);
  p[param_index] += h;
  set_params(bumped, p);
  const double fp = plain_nll(bumped, point, rk4_steps);
  p[param_index] -= 2 * h;
  set_params(bumped, p);
  const double fm = plain_nll(bumped, point, rk4_steps);
  return {grad[param_index], (fp - fm) / (2 * h)};
}

template <typename Model>
TrainResult train_impl(Model& model, const Dataset& data, const TrainConfig& cfg) {
  if (cfg.lr < 0) throw std::invalid_argument("train: lr must be nonnegative");
  if (cfg.batch < 1) throw std::invalid_argument("train: batch must be >= 1");
  const int n = static_cast<int>(data.points.size());
  if (n == 0) fail(NumErr::EmptyDataset, "train: empty dataset");

  const int P = param_count(model);
  std::vector<double> m(P, 0.0), v(P, 0.0), params = get_params(model);
  Rng rng(cfg.seed);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  int cursor = n;  // force an initial shuffle

  TrainResult result;
  result.loss_curve.reserve(cfg.epochs);
  const int bsz = std::min(cfg.batch, n);
  Dataset batch;
  batch.d = data.d;
  batch.points.resize(bsz);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cursor + bsz > n) {
      if (bsz < n)  // full-batch runs keep the original order
        for (int i = n - 1; i > 0; --i)
          std::swap(order[i], order[rng.index(static_cast<std::uint64_t>(i) + 1)]);
      cursor = 0;
    }
    for (int i = 0; i < bsz; ++i) batch.points[i] = data.points[order[cursor + i]];
    cursor += bsz;

    auto [loss, grad] = nll_grad_impl(model, batch, cfg.rk4_steps);
    if (!std::isfinite(loss)) fail(NumErr::Diverged, "train: non-finite NLL");
    result.loss_curve.push_back(loss);

    if (cfg.clip_norm > 0) {
      double norm2 = 0.0;
      for (double g : grad) norm2 += g * g;
      const double norm = std::sqrt(norm2);
      if (norm > cfg.clip_norm) {
        const double s = cfg.clip_norm / norm;
        for (double& g : grad) g *= s;
      }
    }

    const double t = epoch + 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    for (int p = 0; p < P; ++p) {
      m[p] = cfg.beta1 * m[p] + (1 - cfg.beta1) * grad[p];
      v[p] = cfg.beta2 * v[p] + (1 - cfg.beta2) * grad[p] * grad[p];
      params[p] -= cfg.lr * (m[p] / bc1) / (std::sqrt(v[p] / bc2) + cfg.eps);
    }
    set_params(model, params);
  }
  return result;
}

}  // namespace

double nll_loss(const FlowStack& stack, const Dataset& batch, par::Exec exec) {
  return nll_mean(stack, batch, 0, exec);
}
double nll_loss(const VelocityNet& net, const Dataset& batch, int rk4_steps, par::Exec exec) {
  return nll_mean(net, batch, rk4_steps, exec);
}

std::pair<double, std::vector<double>> nll_grad(const FlowStack& stack, const Dataset& batch,
                                                par::Exec exec) {
  return nll_grad_impl(stack, batch, 0, exec);
}
std::pair<double, std::vector<double>> nll_grad(const VelocityNet& net, const Dataset& batch,
                                                int rk4_steps, par::Exec exec) {
  return nll_grad_impl(net, batch, rk4_steps, exec);
}

std::pair<double, double> grad_check(const FlowStack& stack, const ComplexVec& point,
                                     int param_index) {
  return grad_check_impl(stack, point, param_index, 0);
}
std::pair<double, double> grad_check(const VelocityNet& net, const ComplexVec& point,
                                     int param_index, int rk4_steps) {
  return grad_check_impl(net, point, param_index, rk4_steps);
}

TrainResult train(FlowStack& stack, const Dataset& data, const TrainConfig& cfg) {
  return train_impl(stack, data, cfg);
}
TrainResult train(VelocityNet& net, const Dataset& data, const TrainConfig& cfg) {
  return train_impl(net, data, cfg);
}

}  // namespace kahlerflow
