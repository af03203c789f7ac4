#include "kahlerflow/geometry.hpp"

#include <atomic>
#include <cmath>

#include "kahlerflow/artifacts.hpp"

namespace kahlerflow {

namespace {

// Strides of the flattened 4-axis layout.
std::array<std::int64_t, 4> strides_of(const std::array<int, 4>& shape) {
  return {static_cast<std::int64_t>(shape[1]) * shape[2] * shape[3],
          static_cast<std::int64_t>(shape[2]) * shape[3], static_cast<std::int64_t>(shape[3]), 1};
}

// Mixed Wirtinger Hessian ∂_i∂_j̄ f of a scalar grid field at an interior
// node, assembled from axis-pure and mixed second differences.
ComplexMatrix mixed_hessian_at(const std::vector<double>& f, const std::array<std::int64_t, 4>& st,
                               std::int64_t at, int cdim, double spacing) {
  const double inv_h2 = 1.0 / (spacing * spacing);
  auto second = [&](int axis) {
    return (f[at + st[axis]] - 2.0 * f[at] + f[at - st[axis]]) * inv_h2;
  };
  auto mixed = [&](int a, int b) {
    return (f[at + st[a] + st[b]] - f[at + st[a] - st[b]] - f[at - st[a] + st[b]] +
            f[at - st[a] - st[b]]) *
           (0.25 * inv_h2);
  };
  ComplexMatrix out(cdim, cdim);
  for (int i = 0; i < cdim; ++i) {
    out(i, i) = {0.25 * (second(2 * i) + second(2 * i + 1)), 0.0};
    for (int j = i + 1; j < cdim; ++j) {
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

struct InteriorMap {
  std::array<int, 4> shape;    // interior shape
  std::array<int, 4> offsets;  // margin per used axis
};

InteriorMap interior_of(const std::array<int, 4>& shape, int cdim, int margin) {
  InteriorMap m;
  m.shape = {1, 1, 1, 1};
  m.offsets = {0, 0, 0, 0};
  for (int axis = 0; axis < 2 * cdim; ++axis) {
    m.shape[axis] = shape[axis] - 2 * margin;
    m.offsets[axis] = margin;
    if (m.shape[axis] < 1) fail(NumErr::NonSquare, "geometry: grid too small for the stencil");
  }
  return m;
}

std::array<int, 4> unflatten(std::int64_t idx, const std::array<int, 4>& shape) {
  std::array<int, 4> c;
  c[3] = static_cast<int>(idx % shape[3]);
  idx /= shape[3];
  c[2] = static_cast<int>(idx % shape[2]);
  idx /= shape[2];
  c[1] = static_cast<int>(idx % shape[1]);
  idx /= shape[1];
  c[0] = static_cast<int>(idx);
  return c;
}

}  // namespace

PotentialGrid sample_potential_1d(const std::function<double(const Cx&)>& phi, int nx, int ny,
                                  double x0, double y0, double spacing) {
  if (nx < 5 || ny < 5) fail(NumErr::NonSquare, "sample_potential_1d: need >= 5 points per axis");
  PotentialGrid p;
  p.cdim = 1;
  p.shape = {nx, ny, 1, 1};
  p.origin = {x0, y0, 0, 0};
  p.spacing = spacing;
  p.values.resize(p.size());
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      p.values[p.index({i, j, 0, 0})] = phi({x0 + spacing * i, y0 + spacing * j});
  return p;
}

PotentialGrid sample_potential_2d(const std::function<double(const Cx&, const Cx&)>& phi, int n,
                                  double lo, double spacing) {
  if (n < 5) fail(NumErr::NonSquare, "sample_potential_2d: need >= 5 points per axis");
  PotentialGrid p;
  p.cdim = 2;
  p.shape = {n, n, n, n};
  p.origin = {lo, lo, lo, lo};
  p.spacing = spacing;
  p.values.resize(p.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          p.values[p.index({i, j, k, l})] =
              phi({lo + spacing * i, lo + spacing * j}, {lo + spacing * k, lo + spacing * l});
  return p;
}

HermitianMetricField metric_from_potential(const PotentialGrid& p, par::Exec exec) {
  const InteriorMap im = interior_of(p.shape, p.cdim, 1);
  HermitianMetricField out;
  out.cdim = p.cdim;
  out.shape = im.shape;
  out.spacing = p.spacing;
  for (int a = 0; a < 4; ++a) out.origin[a] = p.origin[a] + p.spacing * im.offsets[a];
  out.h.resize(out.size());
  out.not_positive.assign(out.size(), 0);
  const auto src_st = strides_of(p.shape);
  par::for_index(out.size(), exec, [&](std::int64_t n) {
    const std::array<int, 4> c = unflatten(n, out.shape);
    std::int64_t at = 0;
    for (int a = 0; a < 4; ++a) at += (c[a] + im.offsets[a]) * src_st[a];
    out.h[n] = mixed_hessian_at(p.values, src_st, at, p.cdim, p.spacing);
    if (!is_hermitian_pd(out.h[n], 1e-8)) out.not_positive[n] = 1;
  });
  return out;
}

HermitianMetricField ricci(const HermitianMetricField& h_field, par::Exec exec) {
  // log det h as a scalar field on the metric nodes, then −∂∂̄ of it.
  std::vector<double> logdet(h_field.size());
  std::atomic<bool> bad{false};
  par::for_index(h_field.size(), exec, [&](std::int64_t n) {
    const Cx det = det_c(h_field.h[n]);
    if (!(det.re > kDetFloor)) {
      bad.store(true, std::memory_order_relaxed);
      logdet[n] = 0;
      return;
    }
    logdet[n] = std::log(det.re);
  });
  if (bad.load()) fail(NumErr::Singular, "ricci: det h at or below floor");

  const InteriorMap im = interior_of(h_field.shape, h_field.cdim, 1);
  HermitianMetricField out;
  out.cdim = h_field.cdim;
  out.shape = im.shape;
  out.spacing = h_field.spacing;
  for (int a = 0; a < 4; ++a) out.origin[a] = h_field.origin[a] + h_field.spacing * im.offsets[a];
  out.h.resize(out.size());
  out.not_positive.assign(out.size(), 0);
  const auto src_st = strides_of(h_field.shape);
  par::for_index(out.size(), exec, [&](std::int64_t n) {
    const std::array<int, 4> c = unflatten(n, out.shape);
    std::int64_t at = 0;
    for (int a = 0; a < 4; ++a) at += (c[a] + im.offsets[a]) * src_st[a];
    ComplexMatrix m = mixed_hessian_at(logdet, src_st, at, h_field.cdim, h_field.spacing);
    for (auto& e : m.a) e = -e;
    out.h[n] = std::move(m);
  });
  return out;
}

namespace {

// Node of the outer field corresponding to node c of its interior field.
std::int64_t outer_index(const HermitianMetricField& outer, const HermitianMetricField& inner,
                         const std::array<int, 4>& c) {
  std::array<int, 4> oc = c;
  for (int a = 0; a < 2 * outer.cdim; ++a) {
    const int off =
        static_cast<int>(std::lround((inner.origin[a] - outer.origin[a]) / outer.spacing));
    oc[a] = c[a] + off;
  }
  return outer.index(oc);
}

}  // namespace

ScalarGridField scalar_curvature(const HermitianMetricField& h_field,
                                 const HermitianMetricField& ric_field, par::Exec exec) {
  ScalarGridField out;
  out.cdim = ric_field.cdim;
  out.shape = ric_field.shape;
  out.origin = ric_field.origin;
  out.spacing = ric_field.spacing;
  out.values.resize(ric_field.size());
  std::atomic<bool> bad{false};
  par::for_index(ric_field.size(), exec, [&](std::int64_t n) {
    const std::array<int, 4> c = unflatten(n, ric_field.shape);
    const ComplexMatrix& h = h_field.h[outer_index(h_field, ric_field, c)];
    ComplexMatrix prod = matmul(inverse(h), ric_field.h[n]);
    Cx tr{0, 0};
    for (int i = 0; i < prod.rows; ++i) tr = tr + prod(i, i);
    if (std::abs(tr.im) > 1e-8) bad.store(true, std::memory_order_relaxed);
    out.values[n] = tr.re;
  });
  if (bad.load()) fail(NumErr::NonFinite, "scalar_curvature: imaginary residue above 1e-8");
  return out;
}

double einstein_residual(const HermitianMetricField& h_field,
                         const HermitianMetricField& ric_field) {
  double sup = 0.0;
  const std::int64_t n = ric_field.size();
  for (std::int64_t k = 0; k < n; ++k) {
    const std::array<int, 4> c = unflatten(k, ric_field.shape);
    const ComplexMatrix& h = h_field.h[outer_index(h_field, ric_field, c)];
    ComplexMatrix diff = h;
    for (size_t e = 0; e < diff.a.size(); ++e) diff.a[e] = diff.a[e] - ric_field.h[k].a[e];
    sup = std::max(sup, max_abs(diff));
  }
  return sup;
}

ComplexMatrix pullback_metric(const CMap& psi, const ComplexVec& z, double step) {
  WirtingerJet jet = wirtinger_fd(psi, z, step);
  return gram(jet.d_dz);
}

std::pair<double, double> jacobi_check(const MatrixPath& path, double t, double dt) {
  const ComplexMatrix hp = path(t + dt);
  const ComplexMatrix hm = path(t - dt);
  const ComplexMatrix h0 = path(t);
  const double lhs = (log_abs_det_sq(hp) - log_abs_det_sq(hm)) / (4.0 * dt);
  // log_abs_det_sq = 2 log|det|; for Hermitian-positive paths this equals
  // 2 log det, hence the 4dt above and the plain trace below.
  ComplexMatrix hdot(h0.rows, h0.cols);
  for (size_t e = 0; e < hdot.a.size(); ++e)
    hdot.a[e] = (hp.a[e] - hm.a[e]) / (2.0 * dt);
  ComplexMatrix prod = matmul(inverse(h0), hdot);
  Cx tr{0, 0};
  for (int i = 0; i < prod.rows; ++i) tr = tr + prod(i, i);
  return {lhs, tr.re};
}

double fubini_study_potential(const Cx& z) { return std::log(1.0 + abs2(z)); }

void scalar_field_to_csv(const ScalarGridField& f, const std::string& path) {
  if (f.cdim != 1) fail(NumErr::NonSquare, "scalar_field_to_csv: d=1 fields only");
  CsvWriter csv(path);
  csv.header({"x", "y", "value"});
  for (int i = 0; i < f.shape[0]; ++i)
    for (int j = 0; j < f.shape[1]; ++j)
      csv.row({f.origin[0] + f.spacing * i, f.origin[1] + f.spacing * j,
               f.values[(static_cast<std::int64_t>(i) * f.shape[1] + j) * f.shape[2] * f.shape[3]]});
}

void metric_field_to_csv(const HermitianMetricField& f, const std::string& path) {
  if (f.cdim != 1) fail(NumErr::NonSquare, "metric_field_to_csv: d=1 fields only");
  CsvWriter csv(path);
  csv.header({"x", "y", "h_re", "h_im", "not_positive"});
  for (int i = 0; i < f.shape[0]; ++i)
    for (int j = 0; j < f.shape[1]; ++j) {
      const std::int64_t n = f.index({i, j, 0, 0});
      csv.row({f.origin[0] + f.spacing * i, f.origin[1] + f.spacing * j, f.h[n](0, 0).re,
               f.h[n](0, 0).im, static_cast<double>(f.not_positive[n])});
    }
}

}  // namespace kahlerflow
