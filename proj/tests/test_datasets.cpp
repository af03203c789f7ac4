#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "kahlerflow/datasets.hpp"

using namespace kahlerflow;

namespace {

// Distance of the planar readback (Re z1, Im z1) to the nearest moon arc.
double moon_arc_distance(const Cx& z1) {
  const double x = z1.re, y = z1.im;
  const double d_upper = std::abs(std::hypot(x, y) - 1.0);
  const double d_lower = std::abs(std::hypot(x - 1.0, y - 0.5) - 1.0);
  // Arcs are half circles; check the half-plane side too.
  const bool upper_ok = y >= -1e-9;
  const bool lower_ok = y <= 0.5 + 1e-9;
  double best = 1e9;
  if (upper_ok) best = std::min(best, d_upper);
  if (lower_ok) best = std::min(best, d_lower);
  return best;
}

bool same_bytes(const Dataset& a, const Dataset& b) {
  if (a.points.size() != b.points.size()) return false;
  for (size_t i = 0; i < a.points.size(); ++i)
    for (int k = 0; k < a.d; ++k) {
      if (a.points[i][k].re != b.points[i][k].re) return false;
      if (a.points[i][k].im != b.points[i][k].im) return false;
    }
  return true;
}

}  // namespace

TEST_CASE("two moons: noiseless points sit on the arcs") {
  Dataset ds = sample_two_moons(500, 0.0, 3);
  for (const ComplexVec& p : ds.points) {
    CHECK(moon_arc_distance(p[0]) < 1e-12);
    // swap embedding: z2 = y + ix
    CHECK(p[1].re == p[0].im);
    CHECK(p[1].im == p[0].re);
  }
}

TEST_CASE("two moons: determinism") {
  Dataset a = sample_two_moons(1000, 0.05, 7);
  Dataset b = sample_two_moons(1000, 0.05, 7);
  CHECK(same_bytes(a, b));
  Dataset c = sample_two_moons(1000, 0.05, 8);
  CHECK_FALSE(same_bytes(a, c));
}

TEST_CASE("two moons: upper-arc x mean near zero") {
  Dataset ds = sample_two_moons(10000, 0.0, 5);
  double sum = 0.0;
  int count = 0;
  for (const ComplexVec& p : ds.points) {
    const double x = p[0].re, y = p[0].im;
    // Noiseless: upper-arc points satisfy x^2+y^2 = 1.
    if (std::abs(std::hypot(x, y) - 1.0) < 1e-9 && y >= 0) {
      sum += x;
      ++count;
    }
  }
  REQUIRE(count > 3000);
  CHECK(std::abs(sum / count) < 0.1);
}

TEST_CASE("olympic rings: noiseless points at unit distance from their center") {
  Dataset ds = sample_olympic_rings(1000, 0.0, 9);
  for (const ComplexVec& p : ds.points) {
    double best = 1e9;
    for (const auto& c : kRingCenters)
      best = std::min(best, std::abs(std::hypot(p[0].re - c[0], p[0].im - c[1]) - 1.0));
    CHECK(best < 1e-12);
  }
}

TEST_CASE("olympic rings: class proportions 0.2 within 0.02") {
  Dataset ds = sample_olympic_rings(10000, 0.0, 21);
  int counts[5] = {0, 0, 0, 0, 0};
  for (const ComplexVec& p : ds.points) {
    int best = 0;
    double bd = 1e9;
    for (int c = 0; c < 5; ++c) {
      const double d = std::hypot(p[0].re - kRingCenters[c][0], p[0].im - kRingCenters[c][1]);
      if (d < bd) {
        bd = d;
        best = c;
      }
    }
    ++counts[best];
  }
  for (int c = 0; c < 5; ++c) CHECK(std::abs(counts[c] / 10000.0 - 0.2) < 0.02);
}

TEST_CASE("fractal tree: depth 0 stays on the root segment") {
  Dataset ds = sample_fractal_tree(300, 0, 0.0, 4);
  for (const ComplexVec& p : ds.points) {
    CHECK(std::abs(p[0].re) < 1e-12);
    CHECK(p[0].im >= -1e-12);
    CHECK(p[0].im <= 1.0 + 1e-12);
  }
}

TEST_CASE("fractal tree: segment count is 2^(depth+1)-1") {
  for (int depth : {0, 1, 3, 5, 8})
    CHECK(fractal_tree_segment_count(depth) == (1 << (depth + 1)) - 1);
}

TEST_CASE("fractal tree: determinism and depth bounds") {
  Dataset a = sample_fractal_tree(200, 4, 0.01, 13);
  Dataset b = sample_fractal_tree(200, 4, 0.01, 13);
  CHECK(same_bytes(a, b));
  CHECK_THROWS_AS(sample_fractal_tree(10, 13, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_fractal_tree(10, -1, 0.0, 1), std::invalid_argument);
}

TEST_CASE("complex gaussian moments") {
  Dataset ds = sample_complex_gaussian(100000, 2, 19);
  double sum_re = 0.0, sum_re2 = 0.0, sum_abs2 = 0.0;
  for (const ComplexVec& p : ds.points) {
    sum_re += p[0].re;
    sum_re2 += p[0].re * p[0].re;
    sum_abs2 += abs2(p[0]);
  }
  const double n = ds.points.size();
  const double var_re = sum_re2 / n - (sum_re / n) * (sum_re / n);
  CHECK(std::abs(var_re - 0.5) < 0.02);
  CHECK(std::abs(sum_abs2 / n - 1.0) < 0.03);
}

TEST_CASE("standardization centers and scales") {
  Dataset ds = sample_two_moons(10000, 0.08, 23);
  Standardization s = fit_standardization(ds);
  Dataset std_ds = apply_standardization(ds, s);
  Standardization s2 = fit_standardization(std_ds);
  for (int c = 0; c < 4; ++c) {
    CHECK(std::abs(s2.mean[c]) < 1e-12);
    CHECK(s2.scale[c] == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("standardized datasets are centered for every generator") {
  for (const char* name : {"two_moons", "rings", "fractal_tree"}) {
    Dataset ds = make_dataset(name, 10000, 0.08, 6, 29);
    Dataset std_ds = apply_standardization(ds, fit_standardization(ds));
    double norm2 = 0.0;
    for (int c = 0; c < 4; ++c) {
      double mean = 0.0;
      for (const ComplexVec& p : std_ds.points)
        mean += c % 2 == 0 ? p[c / 2].re : p[c / 2].im;
      mean /= std_ds.points.size();
      norm2 += mean * mean;
    }
    CHECK(std::sqrt(norm2) < 0.05);
  }
}
