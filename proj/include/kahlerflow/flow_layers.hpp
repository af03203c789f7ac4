#pragma once
#include <array>
#include <cmath>
#include <vector>

#include "kahlerflow/autodiff.hpp"
#include "kahlerflow/common.hpp"
#include "kahlerflow/complex_linalg.hpp"

namespace kahlerflow {

using ad::value_of;

// Complex scalar functions templated over the real carrier so the same
// network code runs on plain doubles and on tape variables.
template <typename T>
CT<T> cexp_t(const CT<T>& a) {
  using std::cos;
  using std::exp;
  using std::sin;
  T r = exp(a.re);
  return {r * cos(a.im), r * sin(a.im)};
}

// Modulus-gated GELU: GELU(|z|)·z/|z| = Φ(|z|)·z with Φ the normal CDF.
// Phase-equivariant; 0 at z = 0.
template <typename T>
CT<T> cgelu_t(const CT<T>& z) {
  using std::erf;
  using std::sqrt;
  T r2 = z.re * z.re + z.im * z.im;
  if (value_of(r2) == 0.0) return {z.re * 0.0, z.im * 0.0};
  T r = sqrt(r2);
  T gate = 0.5 * (erf(r * M_SQRT1_2) + 1.0);
  return {gate * z.re, gate * z.im};
}

inline Cx cgelu(const Cx& z) { return cgelu_t(z); }

// (A + iB)(z_r + i z_i) + bias, stored as complex weights w = A + iB.
template <typename T>
struct ComplexLinearT {
  int in = 0;
  int out = 0;
  std::vector<CT<T>> w;  // row-major out×in
  std::vector<CT<T>> b;

  std::vector<CT<T>> forward(const std::vector<CT<T>>& x) const {
    std::vector<CT<T>> y(out);
    for (int i = 0; i < out; ++i) {
      CT<T> acc = b[i];
      for (int j = 0; j < in; ++j) acc = acc + w[static_cast<size_t>(i) * in + j] * x[j];
      y[i] = acc;
    }
    return y;
  }
};

enum class Activation { CGelu, None };

// ℂ → ℂ subnet: linear(1→hidden) → activation → linear(hidden→1).
// Activation::None keeps the subnet affine holomorphic, which the
// curvature oracles rely on.
template <typename T>
struct SubnetT {
  ComplexLinearT<T> l1;
  ComplexLinearT<T> l2;
  Activation act = Activation::CGelu;

  CT<T> eval(const CT<T>& z) const {
    std::vector<CT<T>> h = l1.forward({z});
    if (act == Activation::CGelu)
      for (auto& v : h) v = cgelu_t(v);
    return l2.forward(h)[0];
  }
};

// Affine coupling on ℂ²: the coordinate selected by `parity` passes
// through and conditions the other via z' = z·exp(s) + t.
template <typename T>
struct CouplingLayerT {
  SubnetT<T> s_net;
  SubnetT<T> t_net;
  int parity = 0;  // index of the conditioning coordinate
};

using ComplexLinear = ComplexLinearT<double>;
using Subnet = SubnetT<double>;
using CouplingLayer = CouplingLayerT<double>;

struct LayerOutput {
  ComplexVec z_out;
  double logdet;  // log|det_ℂ J|² contribution
};

// Re(s) is clamped before exponentiation so early training cannot
// overflow the log-det; the surgery lab constructs the collapsed regime
// through the clamp on purpose (bias −30 stays inside).
inline constexpr double kSRealClamp = 10.0;

template <typename T>
struct CouplingResult {
  std::array<CT<T>, 2> z;
  T logdet;
};

template <typename T>
CouplingResult<T> coupling_forward_t(const CouplingLayerT<T>& layer, const std::array<CT<T>, 2>& z,
                                     bool clamp = true) {
  const int c = layer.parity;
  const int f = 1 - c;
  CT<T> s = layer.s_net.eval(z[c]);
  CT<T> t = layer.t_net.eval(z[c]);
  if (clamp) s.re = ad::clamp(s.re, -kSRealClamp, kSRealClamp);
  CouplingResult<T> out;
  out.z[c] = z[c];
  out.z[f] = z[f] * cexp_t(s) + t;
  out.logdet = 2.0 * s.re;
  return out;
}

template <typename T>
CouplingResult<T> coupling_inverse_t(const CouplingLayerT<T>& layer, const std::array<CT<T>, 2>& w) {
  const int c = layer.parity;
  const int f = 1 - c;
  CT<T> s = layer.s_net.eval(w[c]);
  CT<T> t = layer.t_net.eval(w[c]);
  s.re = ad::clamp(s.re, -kSRealClamp, kSRealClamp);
  CouplingResult<T> out;
  out.z[c] = w[c];
  out.z[f] = (w[f] - t) * cexp_t(-s);
  out.logdet = -2.0 * s.re;  // negates the forward contribution exactly
  return out;
}

LayerOutput coupling_forward(const CouplingLayer& layer, const ComplexVec& z);
ComplexVec coupling_inverse(const CouplingLayer& layer, const ComplexVec& w);

// Factories. `scale` sets the weight magnitude; biases start at zero.
ComplexLinear make_linear(int in, int out, Rng& rng, double scale);
Subnet make_subnet(int hidden, Rng& rng, double scale, Activation act);
CouplingLayer make_coupling_layer(int hidden, int parity, Rng& rng, double scale,
                                  Activation act = Activation::CGelu);
// Constant subnets: s ≡ s_value, t ≡ t_value regardless of input.
CouplingLayer make_constant_layer(const Cx& s_value, const Cx& t_value, int parity);

}  // namespace kahlerflow
