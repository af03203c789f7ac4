#pragma once
#include <array>
#include <functional>

#include "kahlerflow/parallel.hpp"
#include "kahlerflow/wirtinger.hpp"

namespace kahlerflow {

// Real potential Φ(z, z̄) sampled on a uniform grid over ℂ^cdim realified
// to 2·cdim axes (x1, y1[, x2, y2]), spacing shared by all axes. Unused
// axes have extent 1.
struct PotentialGrid {
  int cdim = 1;
  std::array<int, 4> shape = {1, 1, 1, 1};
  std::array<double, 4> origin = {0, 0, 0, 0};
  double spacing = 0;
  std::vector<double> values;

  std::int64_t size() const {
    return static_cast<std::int64_t>(shape[0]) * shape[1] * shape[2] * shape[3];
  }
  std::int64_t index(const std::array<int, 4>& c) const {
    return ((static_cast<std::int64_t>(c[0]) * shape[1] + c[1]) * shape[2] + c[2]) * shape[3] +
           c[3];
  }
  double coord(int axis, int i) const { return origin[axis] + spacing * i; }
};

// Builds a grid by sampling a callable Φ(z). For cdim = 1 pass nx, ny; the
// ℂ² variant uses the same extent on all four axes.
PotentialGrid sample_potential_1d(const std::function<double(const Cx&)>& phi, int nx, int ny,
                                  double x0, double y0, double spacing);
PotentialGrid sample_potential_2d(const std::function<double(const Cx&, const Cx&)>& phi, int n,
                                  double lo, double spacing);

// Grid-sampled Hermitian (1,1)-tensor field h_ij̄ on the interior of a
// potential grid (margin cells trimmed). Nodes failing the positivity
// check are flagged, not dropped.
struct HermitianMetricField {
  int cdim = 1;
  std::array<int, 4> shape = {1, 1, 1, 1};
  std::array<double, 4> origin = {0, 0, 0, 0};
  double spacing = 0;
  std::vector<ComplexMatrix> h;
  std::vector<std::uint8_t> not_positive;

  std::int64_t size() const {
    return static_cast<std::int64_t>(shape[0]) * shape[1] * shape[2] * shape[3];
  }
  std::int64_t index(const std::array<int, 4>& c) const {
    return ((static_cast<std::int64_t>(c[0]) * shape[1] + c[1]) * shape[2] + c[2]) * shape[3] +
           c[3];
  }
};

// Per-node real scalar on the same geometry as some tensor field.
struct ScalarGridField {
  int cdim = 1;
  std::array<int, 4> shape = {1, 1, 1, 1};
  std::array<double, 4> origin = {0, 0, 0, 0};
  double spacing = 0;
  std::vector<double> values;
};

// h_ij̄ = ∂_i∂_j̄ Φ via the real identity ¼(∂²_x + ∂²_y) on the diagonal
// and mixed central differences on the cross terms; O(spacing²), exact on
// quadratics. Interior margin: 1 cell.
HermitianMetricField metric_from_potential(const PotentialGrid& p,
                                           par::Exec exec = par::Exec::Parallel);

// Ric_ij̄ = −∂_i∂_j̄ log det h on the interior of the metric field
// (one further margin cell). Throws Singular where det h hits the floor.
HermitianMetricField ricci(const HermitianMetricField& h_field,
                           par::Exec exec = par::Exec::Parallel);

// R = h^{j̄i} Ric_ij̄ = tr(h⁻¹ Ric); throws if the imaginary residue of the
// trace exceeds 1e-8. The two fields must come from the same chain.
ScalarGridField scalar_curvature(const HermitianMetricField& h_field,
                                 const HermitianMetricField& ric_field,
                                 par::Exec exec = par::Exec::Parallel);

// sup over shared nodes of ‖h − Ric‖_∞ (λ = 1 Kähler-Einstein residual).
double einstein_residual(const HermitianMetricField& h_field,
                         const HermitianMetricField& ric_field);

// Gram matrix J†J of the holomorphic Jacobian block of a flow map at z.
ComplexMatrix pullback_metric(const CMap& psi, const ComplexVec& z, double step = kWirtingerStep);

// (∂_t log det h, tr(h⁻¹ ḣ)), both sides by central time differences with
// half-step dt.
using MatrixPath = std::function<ComplexMatrix(double)>;
std::pair<double, double> jacobi_check(const MatrixPath& path, double t, double dt = 1e-3);

// Fubini-Study reference potential, the analytic curvature oracle: d = 1,
// h = (1+|z|²)^(−2), Ric = 2h, R = 2.
double fubini_study_potential(const Cx& z);

// Grid-field CSV dumps (d = 1 fields; columns x, y, value... with one
// re/im pair per tensor entry for metric fields).
void scalar_field_to_csv(const ScalarGridField& f, const std::string& path);
void metric_field_to_csv(const HermitianMetricField& f, const std::string& path);

}  // namespace kahlerflow
