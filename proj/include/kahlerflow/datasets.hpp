#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "kahlerflow/complex_linalg.hpp"

namespace kahlerflow {

struct Dataset {
  std::vector<ComplexVec> points;
  int d = 2;
  std::string name;
  std::uint64_t seed = 0;
};

// Planar generators embed (x, y) as z1 = x + iy, z2 = y + ix and then add
// the Gaussian jitter independently to each of the four realified
// components, so noise > 0 yields a full-rank signal in R^4 while noise = 0
// keeps the exact planar geometry in z1.
Dataset sample_two_moons(int n, double noise, std::uint64_t seed);
Dataset sample_olympic_rings(int n, double noise, std::uint64_t seed);

// Binary branching tree, root segment (0,0)→(0,1) at level 0, branch angle
// ±π/5, length decay 0.7 per level; levels 0..depth give 2^(depth+1)−1
// segments, depth ∈ [0, 12]. Points are uniform along segments
// (probability ∝ length).
Dataset sample_fractal_tree(int n, int depth, double noise, std::uint64_t seed);
int fractal_tree_segment_count(int depth);

// z_k = (g1 + i g2)/√2 with g ~ N(0,1), so E[z z̄] = 1 per coordinate,
// matching the density π^(−d) exp(−z†z).
Dataset sample_complex_gaussian(int n, int d, std::uint64_t seed);

Dataset make_dataset(const std::string& name, int n, double noise, int depth, std::uint64_t seed);

// Per-realified-component affine map to zero mean, unit variance.
struct Standardization {
  std::vector<double> mean;   // size 2d
  std::vector<double> scale;  // size 2d
};

Standardization fit_standardization(const Dataset& ds);
Dataset apply_standardization(const Dataset& ds, const Standardization& s);

void dataset_to_csv(const Dataset& ds, const std::string& path);

// Olympic-rings circle centers, shared with tests.
inline constexpr double kRingCenters[5][2] = {
    {-2.2, 0.5}, {0.0, 0.5}, {2.2, 0.5}, {-1.1, -0.5}, {1.1, -0.5}};

}  // namespace kahlerflow
