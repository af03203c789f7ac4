#include "kahlerflow/datasets.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace kahlerflow {

namespace {

// Embed a jittered planar point; the four jitter draws are independent.
ComplexVec embed_planar(double x, double y, double noise, Rng& rng) {
  const double e1 = noise > 0 ? noise * rng.normal() : 0.0;
  const double e2 = noise > 0 ? noise * rng.normal() : 0.0;
  const double e3 = noise > 0 ? noise * rng.normal() : 0.0;
  const double e4 = noise > 0 ? noise * rng.normal() : 0.0;
  return {Cx{x + e1, y + e2}, Cx{y + e3, x + e4}};
}

}  // namespace

Dataset sample_two_moons(int n, double noise, std::uint64_t seed) {
  if (n <= 0) throw std::invalid_argument("sample_two_moons: n must be positive");
  if (noise < 0) throw std::invalid_argument("sample_two_moons: noise must be nonnegative");
  Dataset ds;
  ds.name = "two_moons";
  ds.seed = seed;
  ds.points.reserve(n);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const bool upper = rng.uniform() < 0.5;
    const double theta = rng.uniform(0.0, kPi);
    double x, y;
    if (upper) {
      x = std::cos(theta);
      y = std::sin(theta);
    } else {
      x = 1.0 - std::cos(theta);
      y = 0.5 - std::sin(theta);
    }
    ds.points.push_back(embed_planar(x, y, noise, rng));
  }
  return ds;
}

Dataset sample_olympic_rings(int n, double noise, std::uint64_t seed) {
  if (n <= 0) throw std::invalid_argument("sample_olympic_rings: n must be positive");
  if (noise < 0) throw std::invalid_argument("sample_olympic_rings: noise must be nonnegative");
  Dataset ds;
  ds.name = "rings";
  ds.seed = seed;
  ds.points.reserve(n);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const int ring = static_cast<int>(rng.index(5));
    const double theta = rng.uniform(0.0, 2.0 * kPi);
    const double x = kRingCenters[ring][0] + std::cos(theta);
    const double y = kRingCenters[ring][1] + std::sin(theta);
    ds.points.push_back(embed_planar(x, y, noise, rng));
  }
  return ds;
}

namespace {

struct Segment {
  double x0, y0, x1, y1, len;
};

std::vector<Segment> tree_segments(int depth) {
  std::vector<Segment> segs;
  segs.push_back({0.0, 0.0, 0.0, 1.0, 1.0});
  size_t level_begin = 0;
  double len = 1.0;
  std::vector<double> angles{kPi / 2};  // direction of each segment, parallel to segs
  for (int level = 1; level <= depth; ++level) {
    len *= 0.7;
    const size_t level_end = segs.size();
    for (size_t s = level_begin; s < level_end; ++s) {
      for (const double da : {kPi / 5, -kPi / 5}) {
        const double ang = angles[s] + da;
        const Segment& p = segs[s];
        segs.push_back({p.x1, p.y1, p.x1 + len * std::cos(ang), p.y1 + len * std::sin(ang), len});
        angles.push_back(ang);
      }
    }
    level_begin = level_end;
  }
  return segs;
}

}  // namespace

int fractal_tree_segment_count(int depth) {
  return static_cast<int>(tree_segments(depth).size());
}

Dataset sample_fractal_tree(int n, int depth, double noise, std::uint64_t seed) {
  if (n <= 0) throw std::invalid_argument("sample_fractal_tree: n must be positive");
  if (depth < 0 || depth > 12) throw std::invalid_argument("sample_fractal_tree: depth must be in [0,12]");
  if (noise < 0) throw std::invalid_argument("sample_fractal_tree: noise must be nonnegative");
  const std::vector<Segment> segs = tree_segments(depth);
  std::vector<double> cum(segs.size());
  double total = 0.0;
  for (size_t i = 0; i < segs.size(); ++i) {
    total += segs[i].len;
    cum[i] = total;
  }
  Dataset ds;
  ds.name = "fractal_tree";
  ds.seed = seed;
  ds.points.reserve(n);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform(0.0, total);
    size_t s = 0;
    while (s + 1 < segs.size() && cum[s] < u) ++s;
    const double t = rng.uniform();
    const Segment& seg = segs[s];
    const double x = seg.x0 + t * (seg.x1 - seg.x0);
    const double y = seg.y0 + t * (seg.y1 - seg.y0);
    ds.points.push_back(embed_planar(x, y, noise, rng));
  }
  return ds;
}

Dataset sample_complex_gaussian(int n, int d, std::uint64_t seed) {
  if (n <= 0) throw std::invalid_argument("sample_complex_gaussian: n must be positive");
  Dataset ds;
  ds.name = "complex_gaussian";
  ds.seed = seed;
  ds.d = d;
  ds.points.reserve(n);
  Rng rng(seed);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    ComplexVec z(d);
    for (int k = 0; k < d; ++k) z[k] = {inv_sqrt2 * rng.normal(), inv_sqrt2 * rng.normal()};
    ds.points.push_back(std::move(z));
  }
  return ds;
}

Dataset make_dataset(const std::string& name, int n, double noise, int depth, std::uint64_t seed) {
  if (name == "two_moons") return sample_two_moons(n, noise, seed);
  if (name == "rings") return sample_olympic_rings(n, noise, seed);
  if (name == "fractal_tree") return sample_fractal_tree(n, depth, noise, seed);
  throw std::invalid_argument("unknown dataset: " + name);
}

Standardization fit_standardization(const Dataset& ds) {
  const int comps = 2 * ds.d;
  Standardization s;
  s.mean.assign(comps, 0.0);
  s.scale.assign(comps, 1.0);
  if (ds.points.empty()) fail(NumErr::EmptyDataset, "fit_standardization: empty dataset");
  const double n = static_cast<double>(ds.points.size());
  for (const ComplexVec& p : ds.points)
    for (int k = 0; k < ds.d; ++k) {
      s.mean[2 * k] += p[k].re;
      s.mean[2 * k + 1] += p[k].im;
    }
  for (double& m : s.mean) m /= n;
  std::vector<double> var(comps, 0.0);
  for (const ComplexVec& p : ds.points)
    for (int k = 0; k < ds.d; ++k) {
      const double dr = p[k].re - s.mean[2 * k];
      const double di = p[k].im - s.mean[2 * k + 1];
      var[2 * k] += dr * dr;
      var[2 * k + 1] += di * di;
    }
  for (int c = 0; c < comps; ++c) {
    const double v = var[c] / n;
    s.scale[c] = v > 1e-24 ? std::sqrt(v) : 1.0;
  }
  return s;
}

Dataset apply_standardization(const Dataset& ds, const Standardization& s) {
  Dataset out = ds;
  for (ComplexVec& p : out.points)
    for (int k = 0; k < ds.d; ++k) {
      p[k].re = (p[k].re - s.mean[2 * k]) / s.scale[2 * k];
      p[k].im = (p[k].im - s.mean[2 * k + 1]) / s.scale[2 * k + 1];
    }
  return out;
}

void dataset_to_csv(const Dataset& ds, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) fail(NumErr::IoError, "dataset_to_csv: cannot open " + path);
  for (int k = 0; k < ds.d; ++k) std::fprintf(f, "%sre%d,im%d", k ? "," : "", k + 1, k + 1);
  std::fprintf(f, "\n");
  for (const ComplexVec& p : ds.points) {
    for (int k = 0; k < ds.d; ++k)
      std::fprintf(f, "%s%.17g,%.17g", k ? "," : "", p[k].re, p[k].im);
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

}  // namespace kahlerflow
