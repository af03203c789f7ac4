#pragma once
#include <functional>

#include "kahlerflow/complex_linalg.hpp"

namespace kahlerflow {

// Value plus both Wirtinger Jacobian blocks of a map ℂ^d → ℂ^m:
//   d_dz[k][j]    = ∂f_k/∂z^j    = ½(∂f_k/∂x_j − i ∂f_k/∂y_j)
//   d_dzbar[k][j] = ∂f_k/∂z̄^j   = ½(∂f_k/∂x_j + i ∂f_k/∂y_j)
// The d_dzbar block vanishes exactly for holomorphic maps.
struct WirtingerJet {
  ComplexVec value;
  ComplexMatrix d_dz;
  ComplexMatrix d_dzbar;
};

using CMap = std::function<ComplexVec(const ComplexVec&)>;

inline constexpr double kWirtingerStep = 1e-4;

// Central finite differences on the realified coordinates, O(step²)
// truncation, 4d map evaluations. Throws NonFinite if any stencil
// evaluation is non-finite.
WirtingerJet wirtinger_fd(const CMap& f, const ComplexVec& z, double step = kWirtingerStep);

// Mixed Wirtinger Hessian ∂_i ∂_j̄ g of a real scalar function on ℂ^d,
// via second central differences:
//   i = j:  ¼(∂²_{x_i} + ∂²_{y_i})
//   i ≠ j:  ¼[(∂_{x_i x_j} + ∂_{y_i y_j}) + i(∂_{x_i y_j} − ∂_{y_i x_j})]
using RMap = std::function<double(const ComplexVec&)>;
ComplexMatrix wirtinger_hessian_fd(const RMap& g, const ComplexVec& z, double step = 1e-3);

}  // namespace kahlerflow
