#pragma once
#include <vector>

#include "kahlerflow/common.hpp"

namespace kahlerflow {

using ComplexVec = std::vector<Cx>;

// Dense row-major complex matrix. Carries states z ∈ ℂ^d and Wirtinger
// Jacobians; dimensions stay small (d ≲ 16) so everything is direct.
struct ComplexMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<Cx> a;

  ComplexMatrix() = default;
  ComplexMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, Cx{0, 0}) {}

  static ComplexMatrix identity(int n) {
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = {1, 0};
    return m;
  }

  Cx& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  const Cx& operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

  bool square() const { return rows == cols; }
};

ComplexMatrix matmul(const ComplexMatrix& x, const ComplexMatrix& y);
ComplexMatrix adjoint(const ComplexMatrix& m);
ComplexVec matvec(const ComplexMatrix& m, const ComplexVec& v);

// Gram matrix m† m.
ComplexMatrix gram(const ComplexMatrix& m);

// LU determinant with partial pivoting. Throws NonSquare.
Cx det_c(const ComplexMatrix& m);

// 2·log|det_c(m)| = log det(m†m). Throws Singular below the 1e-300 floor.
double log_abs_det_sq(const ComplexMatrix& m);

inline constexpr double kDetFloor = 1e-300;

// Gauss-Jordan inverse for the small metric blocks. Throws Singular.
ComplexMatrix inverse(const ComplexMatrix& m);

// ‖m − m†‖_∞ ≤ tol and all Cholesky pivots positive. Never throws.
bool is_hermitian_pd(const ComplexMatrix& m, double tol);

double max_abs(const ComplexMatrix& m);
double frobenius(const ComplexMatrix& m);

}  // namespace kahlerflow
