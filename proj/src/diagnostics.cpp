#include "kahlerflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "kahlerflow/artifacts.hpp"
#include "kahlerflow/geometry.hpp"

namespace kahlerflow {

DensityField histogram_density(const Dataset& points, const GridSpec& g, double sigma, int coord,
                               par::Exec exec) {
  if (points.points.empty()) fail(NumErr::EmptyDataset, "histogram_density: empty dataset");
  if (sigma < 0) throw std::invalid_argument("histogram_density: sigma must be >= 0");

  std::vector<double> counts(g.size(), 0.0);
  std::int64_t kept = 0;
  for (const ComplexVec& p : points.points) {
    const double x = p[coord].re;
    const double y = p[coord].im;
    const int i = static_cast<int>(std::floor((x - g.x0) / g.spacing));
    const int j = static_cast<int>(std::floor((y - g.y0) / g.spacing));
    if (i < 0 || i >= g.nx || j < 0 || j >= g.ny) continue;
    counts[g.index(i, j)] += 1.0;
    ++kept;
  }
  if (kept == 0) fail(NumErr::EmptyDataset, "histogram_density: no points inside the grid");

  DensityField out;
  out.g = g;
  if (sigma > 0) {
    // Separable truncated Gaussian, kernel normalized to unit sum so the
    // smoothing conserves mass.
    const int radius = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double ksum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
      kernel[k + radius] = std::exp(-0.5 * (k / sigma) * (k / sigma));
      ksum += kernel[k + radius];
    }
    for (double& k : kernel) k /= ksum;

    std::vector<double> tmp(g.size(), 0.0);
    par::for_index(g.size(), exec, [&](std::int64_t n) {
      const int i = static_cast<int>(n / g.ny);
      const int j = static_cast<int>(n % g.ny);
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        int ii = i + k;
        if (ii < 0 || ii >= g.nx) continue;  // truncated at the boundary
        acc += kernel[k + radius] * counts[g.index(ii, j)];
      }
      tmp[n] = acc;
    });
    par::for_index(g.size(), exec, [&](std::int64_t n) {
      const int i = static_cast<int>(n / g.ny);
      const int j = static_cast<int>(n % g.ny);
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        int jj = j + k;
        if (jj < 0 || jj >= g.ny) continue;
        acc += kernel[k + radius] * counts[g.index(i, jj)];
      }
      counts[n] = acc;
    });
  }

  double mass = 0.0;
  for (double c : counts) mass += c;
  mass *= g.cell_area();
  out.Z = mass;
  out.p.resize(g.size());
  for (std::int64_t n = 0; n < g.size(); ++n) out.p[n] = counts[n] / mass;
  return out;
}

namespace {

// Shared clip-and-normalize tail of both curvature pipelines: clamp
// |value| at its q-th percentile over unmasked nodes, then min-max to [0,1].
void clip_and_normalize(CurvatureMap& map, double q) {
  std::vector<double> mags;
  mags.reserve(map.raw.size());
  for (std::int64_t n = 0; n < static_cast<std::int64_t>(map.raw.size()); ++n)
    if (!map.mask[n]) mags.push_back(std::abs(map.raw[n]));
  if (mags.empty()) fail(NumErr::AllMasked, "curvature map: all nodes masked");
  std::sort(mags.begin(), mags.end());
  // nearest-rank percentile
  std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(mags.size())));
  rank = rank > 0 ? rank - 1 : 0;
  const double clip = mags[std::min(rank, mags.size() - 1)];

  double lo = 0, hi = 0;
  bool any = false;
  map.values.assign(map.raw.size(), 0.0);
  for (std::size_t n = 0; n < map.raw.size(); ++n) {
    if (map.mask[n]) continue;
    double v = map.raw[n];
    if (std::abs(v) > clip) v = v < 0 ? -clip : clip;
    map.values[n] = v;
    if (!any) {
      lo = hi = v;
      any = true;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const double span = hi - lo;
  for (std::size_t n = 0; n < map.raw.size(); ++n) {
    if (map.mask[n]) continue;
    map.values[n] = span > 0 ? (map.values[n] - lo) / span : 0.0;
  }
}

}  // namespace

CurvatureMap fig1_scalar_curvature(const DensityField& p, par::Exec exec) {
  const GridSpec& g = p.g;
  // Stage 1: Φ = −log p on valid cells. The max-normalization inside the
  // log shifts Φ by a constant (no effect on ∂∂̄) and keeps the pipeline
  // stable under uniform rescaling of p.
  double pmax = 0.0;
  for (double v : p.p) pmax = std::max(pmax, v);
  if (!(pmax > 0)) fail(NumErr::AllMasked, "fig1_scalar_curvature: density is zero");
  std::vector<double> phi(g.size(), 0.0);
  std::vector<std::uint8_t> pmask(g.size(), 0);
  for (std::int64_t n = 0; n < g.size(); ++n) {
    if (p.p[n] < kDensityFloor) {
      pmask[n] = 1;
      continue;
    }
    phi[n] = -std::log(p.p[n] / pmax);
  }
  // Stage 2: h = ∂z∂z̄ Φ = ¼ΔΦ on interior nodes with a clean stencil.
  const double inv_h2 = 1.0 / (g.spacing * g.spacing);
  std::vector<double> hfield(g.size(), 0.0);
  std::vector<std::uint8_t> hmask(g.size(), 1);
  par::for_index(g.size(), exec, [&](std::int64_t n) {
    const int i = static_cast<int>(n / g.ny);
    const int j = static_cast<int>(n % g.ny);
    if (i < 1 || i >= g.nx - 1 || j < 1 || j >= g.ny - 1) return;
    if (pmask[n] || pmask[g.index(i + 1, j)] || pmask[g.index(i - 1, j)] ||
        pmask[g.index(i, j + 1)] || pmask[g.index(i, j - 1)])
      return;
    const double lap = (phi[g.index(i + 1, j)] + phi[g.index(i - 1, j)] +
                        phi[g.index(i, j + 1)] + phi[g.index(i, j - 1)] - 4.0 * phi[n]) *
                       inv_h2;
    hfield[n] = 0.25 * lap;
    hmask[n] = hfield[n] > 0 ? 0 : 1;  // only h > 0 admits log h
  });

  // Stage 3: map = −2 h⁻¹ ∂z∂z̄ log h where the log-h stencil is valid.
  CurvatureMap map;
  map.g = g;
  map.raw.assign(g.size(), 0.0);
  map.mask.assign(g.size(), 1);
  std::vector<double> logh(g.size(), 0.0);
  for (std::int64_t n = 0; n < g.size(); ++n)
    if (!hmask[n]) logh[n] = std::log(hfield[n]);
  par::for_index(g.size(), exec, [&](std::int64_t n) {
    const int i = static_cast<int>(n / g.ny);
    const int j = static_cast<int>(n % g.ny);
    if (i < 2 || i >= g.nx - 2 || j < 2 || j >= g.ny - 2) return;
    if (hmask[n] || hmask[g.index(i + 1, j)] || hmask[g.index(i - 1, j)] ||
        hmask[g.index(i, j + 1)] || hmask[g.index(i, j - 1)])
      return;
    const double lap = (logh[g.index(i + 1, j)] + logh[g.index(i - 1, j)] +
                        logh[g.index(i, j + 1)] + logh[g.index(i, j - 1)] - 4.0 * logh[n]) *
                       inv_h2;
    map.raw[n] = -2.0 / hfield[n] * 0.25 * lap;
    map.mask[n] = 0;
  });
  clip_and_normalize(map, map.clip_percentile);
  return map;
}

CurvatureMap score_curvature_proxy(const DensityField& p, double eps, par::Exec exec) {
  if (!(eps > 0)) throw std::invalid_argument("score_curvature_proxy: eps must be positive");
  const GridSpec& g = p.g;
  double pmax = 0.0;
  for (double v : p.p) pmax = std::max(pmax, v);
  if (!(pmax > 0)) fail(NumErr::AllMasked, "score_curvature_proxy: density is zero");
  std::vector<double> logp(g.size(), 0.0);
  std::vector<std::uint8_t> pmask(g.size(), 0);
  for (std::int64_t n = 0; n < g.size(); ++n) {
    if (p.p[n] < kDensityFloor) {
      pmask[n] = 1;
      continue;
    }
    logp[n] = std::log(p.p[n] / pmax);  // constant shift, derivatives unchanged
  }
  CurvatureMap map;
  map.g = g;
  map.raw.assign(g.size(), 0.0);
  map.mask.assign(g.size(), 1);
  const double inv2h = 1.0 / (2.0 * g.spacing);
  const double inv4h2 = 1.0 / (4.0 * g.spacing * g.spacing);
  par::for_index(g.size(), exec, [&](std::int64_t n) {
    const int i = static_cast<int>(n / g.ny);
    const int j = static_cast<int>(n % g.ny);
    if (i < 1 || i >= g.nx - 1 || j < 1 || j >= g.ny - 1) return;
    bool bad = pmask[n] != 0;
    for (int di = -1; di <= 1 && !bad; ++di)
      for (int dj = -1; dj <= 1 && !bad; ++dj)
        if (pmask[g.index(i + di, j + dj)]) bad = true;
    if (bad) return;
    const double dxy = (logp[g.index(i + 1, j + 1)] - logp[g.index(i + 1, j - 1)] -
                        logp[g.index(i - 1, j + 1)] + logp[g.index(i - 1, j - 1)]) *
                       inv4h2;
    const double gx = (logp[g.index(i + 1, j)] - logp[g.index(i - 1, j)]) * inv2h;
    const double gy = (logp[g.index(i, j + 1)] - logp[g.index(i, j - 1)]) * inv2h;
    map.raw[n] = -(1.0 / p.p[n]) * dxy / (gx * gx + gy * gy + eps);
    map.mask[n] = 0;
  });
  clip_and_normalize(map, map.clip_percentile);
  return map;
}

std::vector<LayerHolomorphyStats> holomorphy_probe_maps(const std::vector<CMap>& layer_maps, int d,
                                                        int n, std::uint64_t seed,
                                                        par::Exec exec) {
  if (n <= 0) throw std::invalid_argument("holomorphy_probe: n must be positive");
  Dataset base = sample_complex_gaussian(n, d, seed);
  std::vector<ComplexVec> inputs = base.points;
  std::vector<LayerHolomorphyStats> stats(layer_maps.size());

  for (std::size_t k = 0; k < layer_maps.size(); ++k) {
    LayerHolomorphyStats& st = stats[k];
    st.dz_norm.resize(n);
    st.dzbar_norm.resize(n);
    std::vector<ComplexVec> next(n);
    par::for_index(n, exec, [&](std::int64_t i) {
      WirtingerJet jet = wirtinger_fd(layer_maps[k], inputs[i]);
      st.dz_norm[i] = frobenius(jet.d_dz);
      st.dzbar_norm[i] = frobenius(jet.d_dzbar);
      next[i] = jet.value;
    });
    inputs = std::move(next);
    auto median = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      const std::size_t m = v.size() / 2;
      return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
    };
    st.median_dz = median(st.dz_norm);
    st.median_dzbar = median(st.dzbar_norm);
  }
  return stats;
}

std::vector<LayerHolomorphyStats> holomorphy_probe(const FlowStack& stack, int n,
                                                   std::uint64_t seed, par::Exec exec) {
  std::vector<CMap> maps;
  maps.reserve(stack.layers.size());
  for (const CouplingLayer& layer : stack.layers) maps.push_back(layer_forward_map(layer));
  return holomorphy_probe_maps(maps, stack.d, n, seed, exec);
}

FisherPullbackResult fisher_pullback_check(const FlowStack& stack, const ComplexVec& z,
                                           double fd_step) {
  RMap g = [&stack](const ComplexVec& zz) {
    PushResult r = push_forward(stack, zz);
    return base_log_density(r.z) + r.logdet;
  };
  FisherPullbackResult out;
  ComplexMatrix hess = wirtinger_hessian_fd(g, z, fd_step);
  // Gram-indexed Fisher block: (i,j) entry is −∂_{z_j}∂_{z̄_i} g, the
  // convention under which the identity is entrywise against J†J
  // (the ∂_{z_i}∂_{z̄_j} tensor is its transpose).
  out.fisher_fd = ComplexMatrix(hess.rows, hess.cols);
  for (int i = 0; i < hess.rows; ++i)
    for (int j = 0; j < hess.cols; ++j) out.fisher_fd(i, j) = -hess(j, i);
  out.pullback = pullback_metric(stack_forward_map(stack), z);
  ComplexMatrix diff = out.fisher_fd;
  for (size_t e = 0; e < diff.a.size(); ++e) diff.a[e] = diff.a[e] - out.pullback.a[e];
  out.diff = max_abs(diff);
  return out;
}

PhiGradientField phi_gradient_field(const DensityField& p) {
  const GridSpec& g = p.g;
  PhiGradientField out;
  out.g = {g.nx - 2, g.ny - 2, g.x0 + g.spacing, g.y0 + g.spacing, g.spacing};
  out.dx.assign(out.g.size(), 0.0);
  out.dy.assign(out.g.size(), 0.0);
  const double inv2h = 1.0 / (2.0 * g.spacing);
  auto phi = [&](int i, int j) {
    return -std::log(std::max(p.p[g.index(i, j)], kDensityFloor));
  };
  for (int i = 1; i < g.nx - 1; ++i)
    for (int j = 1; j < g.ny - 1; ++j) {
      const std::int64_t n = out.g.index(i - 1, j - 1);
      out.dx[n] = (phi(i + 1, j) - phi(i - 1, j)) * inv2h;
      out.dy[n] = (phi(i, j + 1) - phi(i, j - 1)) * inv2h;
    }
  return out;
}

namespace {

void render_grid(const std::vector<double>& values, const std::vector<std::uint8_t>* mask,
                 const GridSpec& g, const std::string& path, Colormap cm) {
  // Row 0 of the image is the top of the grid (max y).
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(g.nx) * g.ny * 3);
  double lo = 0, hi = 1;
  if (!mask) {
    lo = values[0];
    hi = values[0];
    for (double v : values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi == lo) hi = lo + 1;
  }
  for (int row = 0; row < g.ny; ++row) {
    const int j = g.ny - 1 - row;
    for (int i = 0; i < g.nx; ++i) {
      const std::int64_t n = g.index(i, j);
      std::uint8_t* px = &rgb[(static_cast<std::size_t>(row) * g.nx + i) * 3];
      if (mask && (*mask)[n]) {
        px[0] = px[1] = px[2] = 128;  // sentinel for masked nodes
        continue;
      }
      const double v = mask ? values[n] : (values[n] - lo) / (hi - lo);
      if (cm == Colormap::Viridis) {
        viridis(v, px);
      } else {
        const auto gray = static_cast<std::uint8_t>(std::min(255.0, std::max(0.0, v * 255.0 + 0.5)));
        px[0] = px[1] = px[2] = gray;
      }
    }
  }
  write_png_rgb(path, g.nx, g.ny, rgb);
}

}  // namespace

void render_heatmap(const CurvatureMap& map, const std::string& path, Colormap cm) {
  render_grid(map.values, &map.mask, map.g, path, cm);
}

void render_heatmap(const DensityField& field, const std::string& path, Colormap cm) {
  render_grid(field.p, nullptr, field.g, path, cm);
}

void curvature_map_to_csv(const CurvatureMap& map, const std::string& path) {
  CsvWriter csv(path);
  csv.header({"x", "y", "value", "raw", "masked"});
  for (int i = 0; i < map.g.nx; ++i)
    for (int j = 0; j < map.g.ny; ++j) {
      const std::int64_t n = map.g.index(i, j);
      csv.row({map.g.x(i), map.g.y(j), map.values[n], map.raw[n],
               static_cast<double>(map.mask[n])});
    }
}

void density_to_csv(const DensityField& field, const std::string& path) {
  CsvWriter csv(path);
  csv.header({"x", "y", "p"});
  for (int i = 0; i < field.g.nx; ++i)
    for (int j = 0; j < field.g.ny; ++j)
      csv.row({field.g.x(i), field.g.y(j), field.p[field.g.index(i, j)]});
}

}  // namespace kahlerflow
