#include "kahlerflow/complex_linalg.hpp"

#include <algorithm>
#include <cmath>

namespace kahlerflow {

ComplexMatrix matmul(const ComplexMatrix& x, const ComplexMatrix& y) {
  if (x.cols != y.rows) fail(NumErr::NonSquare, "matmul: inner dimensions differ");
  ComplexMatrix out(x.rows, y.cols);
  for (int i = 0; i < x.rows; ++i)
    for (int k = 0; k < x.cols; ++k) {
      const Cx xv = x(i, k);
      for (int j = 0; j < y.cols; ++j) out(i, j) = out(i, j) + xv * y(k, j);
    }
  return out;
}

ComplexMatrix adjoint(const ComplexMatrix& m) {
  ComplexMatrix out(m.cols, m.rows);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) out(j, i) = conj(m(i, j));
  return out;
}

ComplexVec matvec(const ComplexMatrix& m, const ComplexVec& v) {
  if (static_cast<int>(v.size()) != m.cols) fail(NumErr::NonSquare, "matvec: size mismatch");
  ComplexVec out(m.rows, Cx{0, 0});
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) out[i] = out[i] + m(i, j) * v[j];
  return out;
}

ComplexMatrix gram(const ComplexMatrix& m) { return matmul(adjoint(m), m); }

Cx det_c(const ComplexMatrix& m) {
  if (!m.square()) fail(NumErr::NonSquare, "det_c: matrix not square");
  const int n = m.rows;
  ComplexMatrix lu = m;
  Cx det{1, 0};
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = cabs(lu(k, k));
    for (int i = k + 1; i < n; ++i) {
      const double v = cabs(lu(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best == 0.0) return {0, 0};
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
      det = -det;
    }
    det = det * lu(k, k);
    for (int i = k + 1; i < n; ++i) {
      const Cx f = lu(i, k) / lu(k, k);
      for (int j = k + 1; j < n; ++j) lu(i, j) = lu(i, j) - f * lu(k, j);
    }
  }
  return det;
}

double log_abs_det_sq(const ComplexMatrix& m) {
  if (!m.square()) fail(NumErr::NonSquare, "log_abs_det_sq: matrix not square");
  // Accumulate log|pivot| during elimination so near-underflow products
  // stay representable.
  const int n = m.rows;
  ComplexMatrix lu = m;
  double logabs = 0.0;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = cabs(lu(k, k));
    for (int i = k + 1; i < n; ++i) {
      const double v = cabs(lu(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best < kDetFloor) fail(NumErr::Singular, "log_abs_det_sq: |det| below floor");
    if (piv != k)
      for (int j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
    logabs += std::log(cabs(lu(k, k)));
    for (int i = k + 1; i < n; ++i) {
      const Cx f = lu(i, k) / lu(k, k);
      for (int j = k + 1; j < n; ++j) lu(i, j) = lu(i, j) - f * lu(k, j);
    }
  }
  return 2.0 * logabs;
}

ComplexMatrix inverse(const ComplexMatrix& m) {
  if (!m.square()) fail(NumErr::NonSquare, "inverse: matrix not square");
  const int n = m.rows;
  ComplexMatrix lu = m;
  ComplexMatrix inv = ComplexMatrix::identity(n);
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = cabs(lu(k, k));
    for (int i = k + 1; i < n; ++i) {
      const double v = cabs(lu(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best < kDetFloor) fail(NumErr::Singular, "inverse: singular matrix");
    if (piv != k)
      for (int j = 0; j < n; ++j) {
        std::swap(lu(k, j), lu(piv, j));
        std::swap(inv(k, j), inv(piv, j));
      }
    const Cx d = lu(k, k);
    for (int j = 0; j < n; ++j) {
      lu(k, j) = lu(k, j) / d;
      inv(k, j) = inv(k, j) / d;
    }
    for (int i = 0; i < n; ++i) {
      if (i == k) continue;
      const Cx f = lu(i, k);
      if (f.re == 0.0 && f.im == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        lu(i, j) = lu(i, j) - f * lu(k, j);
        inv(i, j) = inv(i, j) - f * inv(k, j);
      }
    }
  }
  return inv;
}

bool is_hermitian_pd(const ComplexMatrix& m, double tol) {
  if (!m.square()) return false;
  const int n = m.rows;
  double dev = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Cx d = m(i, j) - conj(m(j, i));
      dev = std::max(dev, cabs(d));
    }
  if (dev > tol) return false;
  // Cholesky on the Hermitian part; positive pivots certify PD.
  ComplexMatrix h(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) h(i, j) = 0.5 * (m(i, j) + conj(m(j, i)));
  for (int k = 0; k < n; ++k) {
    double pivot = h(k, k).re;
    for (int j = 0; j < k; ++j) pivot -= abs2(h(k, j));
    if (!(pivot > 0.0) || !std::isfinite(pivot)) return false;
    const double l = std::sqrt(pivot);
    h(k, k) = {l, 0};
    for (int i = k + 1; i < n; ++i) {
      Cx s = h(i, k);
      for (int j = 0; j < k; ++j) s = s - h(i, j) * conj(h(k, j));
      h(i, k) = s / l;
    }
  }
  return true;
}

double max_abs(const ComplexMatrix& m) {
  double v = 0.0;
  for (const Cx& c : m.a) v = std::max(v, cabs(c));
  return v;
}

double frobenius(const ComplexMatrix& m) {
  double s = 0.0;
  for (const Cx& c : m.a) s += abs2(c);
  return std::sqrt(s);
}

}  // namespace kahlerflow
