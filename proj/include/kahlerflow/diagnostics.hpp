#pragma once
#include <string>

#include "kahlerflow/discrete_flow.hpp"
#include "kahlerflow/parallel.hpp"

namespace kahlerflow {

// Cell-centered planar grid for density and curvature maps.
struct GridSpec {
  int nx = 0;
  int ny = 0;
  double x0 = 0;
  double y0 = 0;
  double spacing = 0;

  std::int64_t size() const { return static_cast<std::int64_t>(nx) * ny; }
  std::int64_t index(int i, int j) const { return static_cast<std::int64_t>(i) * ny + j; }
  double x(int i) const { return x0 + spacing * (i + 0.5); }
  double y(int j) const { return y0 + spacing * (j + 0.5); }
  double cell_area() const { return spacing * spacing; }
};

// Grid density with Σ p·cellArea = 1 after normalization.
struct DensityField {
  GridSpec g;
  std::vector<double> p;
  double Z = 1.0;  // raw mass divided out during normalization
};

// [0,1]-normalized curvature map; `raw` keeps the pre-clip values and
// masked nodes carry no value.
struct CurvatureMap {
  GridSpec g;
  std::vector<double> values;
  std::vector<double> raw;
  std::vector<std::uint8_t> mask;  // 1 = masked
  double clip_percentile = 0.6;
};

inline constexpr double kDensityFloor = 1e-12;

// 2D histogram of (Re z_coord, Im z_coord) convolved with a discrete
// Gaussian of std sigma in cell units (truncated at 4σ), renormalized.
// Points outside the grid are dropped.
DensityField histogram_density(const Dataset& points, const GridSpec& g, double sigma,
                               int coord = 0, par::Exec exec = par::Exec::Parallel);

// Kähler scalar curvature map of Fig-1 type: Φ = −log p, h = ∂_z∂_z̄ Φ,
// map = −2 h⁻¹ ∂_z∂_z̄ log h where h > 0 (masked elsewhere), |value|
// clamped at its 60th percentile over unmasked nodes, then min-max
// normalized to [0,1].
CurvatureMap fig1_scalar_curvature(const DensityField& p, par::Exec exec = par::Exec::Parallel);

// Holomorphic score curvature proxy: −(1/p)(∂_xy log p)/(|∇ log p|² + ε),
// same clip-and-normalize pipeline.
CurvatureMap score_curvature_proxy(const DensityField& p, double eps = 1e-6,
                                   par::Exec exec = par::Exec::Parallel);

// Per-layer Frobenius norms of both Wirtinger blocks over a base-sampled
// cloud propagated to each layer's input.
struct LayerHolomorphyStats {
  std::vector<double> dz_norm;
  std::vector<double> dzbar_norm;
  double median_dz = 0;
  double median_dzbar = 0;
};

std::vector<LayerHolomorphyStats> holomorphy_probe(const FlowStack& stack, int n,
                                                   std::uint64_t seed,
                                                   par::Exec exec = par::Exec::Parallel);
// Generic variant for hand-built layer sequences (test hooks).
std::vector<LayerHolomorphyStats> holomorphy_probe_maps(const std::vector<CMap>& layer_maps, int d,
                                                        int n, std::uint64_t seed,
                                                        par::Exec exec = par::Exec::Parallel);

// Fisher-pullback identity on holomorphic stacks: the FD Fisher metric
// −∂_i∂_j̄ [log p_α(Ψ(z)) + Σ log|det ∇Ψ_k|²] against the pullback J†J.
struct FisherPullbackResult {
  ComplexMatrix fisher_fd;
  ComplexMatrix pullback;
  double diff;  // ‖fisher − pullback‖_∞
};

FisherPullbackResult fisher_pullback_check(const FlowStack& stack, const ComplexVec& z,
                                           double fd_step = 1e-3);

// (∂_x Φ, ∂_y Φ) of Φ = −log p by central differences; interior nodes.
struct PhiGradientField {
  GridSpec g;  // interior geometry
  std::vector<double> dx;
  std::vector<double> dy;
};
PhiGradientField phi_gradient_field(const DensityField& p);

enum class Colormap { Gray, Viridis };
void render_heatmap(const CurvatureMap& map, const std::string& path,
                    Colormap cm = Colormap::Viridis);
void render_heatmap(const DensityField& field, const std::string& path,
                    Colormap cm = Colormap::Viridis);

void curvature_map_to_csv(const CurvatureMap& map, const std::string& path);
void density_to_csv(const DensityField& field, const std::string& path);

}  // namespace kahlerflow
