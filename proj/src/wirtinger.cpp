#include "kahlerflow/wirtinger.hpp"

#include <cmath>

namespace kahlerflow {

namespace {

ComplexVec eval_checked(const CMap& f, const ComplexVec& z) {
  ComplexVec v = f(z);
  for (const Cx& c : v)
    if (!finite(c)) fail(NumErr::NonFinite, "wirtinger_fd: non-finite stencil evaluation");
  return v;
}

}  // namespace

WirtingerJet wirtinger_fd(const CMap& f, const ComplexVec& z, double step) {
  if (!(step > 0)) fail(NumErr::NonFinite, "wirtinger_fd: step must be positive");
  const int d = static_cast<int>(z.size());
  WirtingerJet jet;
  jet.value = eval_checked(f, z);
  const int m = static_cast<int>(jet.value.size());
  jet.d_dz = ComplexMatrix(m, d);
  jet.d_dzbar = ComplexMatrix(m, d);

  ComplexVec p = z;
  for (int j = 0; j < d; ++j) {
    p[j].re = z[j].re + step;
    const ComplexVec fxp = eval_checked(f, p);
    p[j].re = z[j].re - step;
    const ComplexVec fxm = eval_checked(f, p);
    p[j].re = z[j].re;

    p[j].im = z[j].im + step;
    const ComplexVec fyp = eval_checked(f, p);
    p[j].im = z[j].im - step;
    const ComplexVec fym = eval_checked(f, p);
    p[j].im = z[j].im;

    const double inv2h = 1.0 / (2.0 * step);
    for (int k = 0; k < m; ++k) {
      const Cx dfdx = (fxp[k] - fxm[k]) * inv2h;
      const Cx dfdy = (fyp[k] - fym[k]) * inv2h;
      // ½(∂x − i∂y) and ½(∂x + i∂y)
      jet.d_dz(k, j) = 0.5 * Cx{dfdx.re + dfdy.im, dfdx.im - dfdy.re};
      jet.d_dzbar(k, j) = 0.5 * Cx{dfdx.re - dfdy.im, dfdx.im + dfdy.re};
    }
  }
  return jet;
}

ComplexMatrix wirtinger_hessian_fd(const RMap& g, const ComplexVec& z, double step) {
  const int d = static_cast<int>(z.size());
  ComplexMatrix out(d, d);
  const double h = step;
  const double g0 = g(z);
  if (!std::isfinite(g0)) fail(NumErr::NonFinite, "wirtinger_hessian_fd: non-finite value");

  auto at = [&](int axis, double delta, int axis2 = -1, double delta2 = 0.0) {
    ComplexVec p = z;
    auto bump = [&](int ax, double de) {
      if (ax % 2 == 0)
        p[ax / 2].re += de;
      else
        p[ax / 2].im += de;
    };
    bump(axis, delta);
    if (axis2 >= 0) bump(axis2, delta2);
    const double v = g(p);
    if (!std::isfinite(v)) fail(NumErr::NonFinite, "wirtinger_hessian_fd: non-finite stencil");
    return v;
  };

  // Real axes are interleaved (x_0, y_0, x_1, y_1, ...).
  auto second = [&](int ax) { return (at(ax, h) - 2.0 * g0 + at(ax, -h)) / (h * h); };
  auto mixed = [&](int ax, int bx) {
    return (at(ax, h, bx, h) - at(ax, h, bx, -h) - at(ax, -h, bx, h) + at(ax, -h, bx, -h)) /
           (4.0 * h * h);
  };

  for (int i = 0; i < d; ++i) {
    out(i, i) = {0.25 * (second(2 * i) + second(2 * i + 1)), 0.0};
    for (int j = i + 1; j < d; ++j) {
      const double xx = mixed(2 * i, 2 * j);
      const double yy = mixed(2 * i + 1, 2 * j + 1);
      const double xy = mixed(2 * i, 2 * j + 1);
      const double yx = mixed(2 * i + 1, 2 * j);
      out(i, j) = 0.25 * Cx{xx + yy, xy - yx};
      out(j, i) = conj(out(i, j));
    }
  }
  return out;
}

}  // namespace kahlerflow
