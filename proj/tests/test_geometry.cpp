#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "kahlerflow/discrete_flow.hpp"
#include "kahlerflow/geometry.hpp"

using namespace kahlerflow;

TEST_CASE("metric of |z|^2 is the flat metric (stencil exact on quadratics)") {
  PotentialGrid p = sample_potential_1d([](const Cx& z) { return abs2(z); }, 21, 21, -1.0, -1.0, 0.1);
  HermitianMetricField h = metric_from_potential(p);
  for (std::int64_t n = 0; n < h.size(); ++n) {
    CHECK(std::abs(h.h[n](0, 0).re - 1.0) < 1e-10);
    CHECK(std::abs(h.h[n](0, 0).im) < 1e-12);
    CHECK(h.not_positive[n] == 0);
  }
}

TEST_CASE("metric of the Fubini-Study potential") {
  PotentialGrid p = sample_potential_1d(fubini_study_potential, 101, 101, -0.5, -0.5, 0.01);
  HermitianMetricField h = metric_from_potential(p);
  for (int i = 0; i < h.shape[0]; i += 7)
    for (int j = 0; j < h.shape[1]; j += 7) {
      const std::int64_t n = h.index({i, j, 0, 0});
      const Cx z{h.origin[0] + h.spacing * i, h.origin[1] + h.spacing * j};
      const double expect = std::pow(1.0 + abs2(z), -2.0);
      CHECK(std::abs(h.h[n](0, 0).re - expect) < 1e-4);
    }
}

TEST_CASE("constant potential is flagged not-positive everywhere") {
  PotentialGrid p = sample_potential_1d([](const Cx&) { return 3.5; }, 9, 9, 0.0, 0.0, 0.1);
  HermitianMetricField h = metric_from_potential(p);
  for (std::int64_t n = 0; n < h.size(); ++n) CHECK(h.not_positive[n] == 1);
}

TEST_CASE("mixed cross-terms on a C^2 potential") {
  // Φ = |z1|² + |z2|² + Re(z1 z̄2) has constant h = [[1, 1/2],[1/2, 1]].
  PotentialGrid p = sample_potential_2d(
      [](const Cx& z1, const Cx& z2) { return abs2(z1) + abs2(z2) + (z1 * conj(z2)).re; }, 7, -0.3,
      0.1);
  HermitianMetricField h = metric_from_potential(p);
  for (std::int64_t n = 0; n < h.size(); ++n) {
    CHECK(cabs(h.h[n](0, 0) - Cx{1, 0}) < 1e-9);
    CHECK(cabs(h.h[n](1, 1) - Cx{1, 0}) < 1e-9);
    CHECK(cabs(h.h[n](0, 1) - Cx{0.5, 0}) < 1e-9);
    CHECK(h.not_positive[n] == 0);
  }
}

TEST_CASE("ricci of the flat metric vanishes") {
  PotentialGrid p = sample_potential_1d([](const Cx& z) { return abs2(z); }, 21, 21, -1.0, -1.0, 0.1);
  HermitianMetricField h = metric_from_potential(p);
  HermitianMetricField ric = ricci(h);
  for (std::int64_t n = 0; n < ric.size(); ++n) CHECK(cabs(ric.h[n](0, 0)) < 1e-8);
}

TEST_CASE("ricci of Fubini-Study equals twice the metric") {
  PotentialGrid p = sample_potential_1d(fubini_study_potential, 201, 201, -1.0, -1.0, 0.01);
  HermitianMetricField h = metric_from_potential(p);
  HermitianMetricField ric = ricci(h);
  for (int i = 0; i < ric.shape[0]; i += 13)
    for (int j = 0; j < ric.shape[1]; j += 13) {
      const std::int64_t n = ric.index({i, j, 0, 0});
      const Cx z{ric.origin[0] + ric.spacing * i, ric.origin[1] + ric.spacing * j};
      const double hv = std::pow(1.0 + abs2(z), -2.0);
      CHECK(std::abs(ric.h[n](0, 0).re - 2.0 * hv) / hv < 1e-3);
    }
}

TEST_CASE("ricci of a quartic perturbation matches the symbolic oracle") {
  // Φ = |z|² + ε|z|⁴: h = 1 + 4ε|z|², Ric = −4ε/(1+4ε|z|²) + 16ε²|z|²/(1+4ε|z|²)².
  const double eps = 0.05;
  PotentialGrid p = sample_potential_1d(
      [eps](const Cx& z) { return abs2(z) + eps * abs2(z) * abs2(z); }, 121, 121, -0.6, -0.6, 0.01);
  HermitianMetricField h = metric_from_potential(p);
  HermitianMetricField ric = ricci(h);
  for (int i = 0; i < ric.shape[0]; i += 11)
    for (int j = 0; j < ric.shape[1]; j += 11) {
      const std::int64_t n = ric.index({i, j, 0, 0});
      const Cx z{ric.origin[0] + ric.spacing * i, ric.origin[1] + ric.spacing * j};
      const double r2 = abs2(z);
      const double denom = 1.0 + 4.0 * eps * r2;
      const double expect = -4.0 * eps / denom + 16.0 * eps * eps * r2 / (denom * denom);
      CHECK(std::abs(ric.h[n](0, 0).re - expect) < 1e-3);
    }
}

TEST_CASE("scalar curvature: flat is zero, Fubini-Study is two") {
  PotentialGrid flat = sample_potential_1d([](const Cx& z) { return abs2(z); }, 15, 15, -0.7, -0.7, 0.1);
  HermitianMetricField hf = metric_from_potential(flat);
  ScalarGridField rf = scalar_curvature(hf, ricci(hf));
  for (double v : rf.values) CHECK(std::abs(v) < 1e-8);

  PotentialGrid fs = sample_potential_1d(fubini_study_potential, 201, 201, -1.0, -1.0, 0.01);
  HermitianMetricField h = metric_from_potential(fs);
  ScalarGridField r = scalar_curvature(h, ricci(h));
  for (double v : r.values) CHECK(std::abs(v - 2.0) < 1e-3);
}

TEST_CASE("ricci is invariant under pluriharmonic gauge changes") {
  // Adding Re(holomorphic) to Φ leaves h (hence Ric) unchanged; the stencil
  // is exact on the quadratic holomorphic addition c·z².
  auto base = [](const Cx& z) { return fubini_study_potential(z); };
  auto gauged = [&](const Cx& z) {
    const Cx z2 = z * z;
    return base(z) + 0.7 * z2.re - 0.3 * z.re + 0.2 * z.im;
  };
  PotentialGrid p1 = sample_potential_1d(base, 61, 61, -0.3, -0.3, 0.01);
  PotentialGrid p2 = sample_potential_1d(gauged, 61, 61, -0.3, -0.3, 0.01);
  HermitianMetricField ric1 = ricci(metric_from_potential(p1));
  HermitianMetricField ric2 = ricci(metric_from_potential(p2));
  for (std::int64_t n = 0; n < ric1.size(); ++n)
    CHECK(cabs(ric1.h[n](0, 0) - ric2.h[n](0, 0)) < 1e-6);
}

TEST_CASE("einstein residual: flat gives one, scaled Fubini-Study gives zero") {
  PotentialGrid flat = sample_potential_1d([](const Cx& z) { return abs2(z); }, 15, 15, -0.7, -0.7, 0.1);
  HermitianMetricField hf = metric_from_potential(flat);
  CHECK(einstein_residual(hf, ricci(hf)) == doctest::Approx(1.0).epsilon(1e-8));

  // Φ = 2·log(1+|z|²): h = 2(1+|z|²)^(−2) and Ric = h exactly.
  PotentialGrid fs2 = sample_potential_1d(
      [](const Cx& z) { return 2.0 * fubini_study_potential(z); }, 201, 201, -1.0, -1.0, 0.01);
  HermitianMetricField h = metric_from_potential(fs2);
  CHECK(einstein_residual(h, ricci(h)) < 1e-3);

  CHECK(einstein_residual(hf, ricci(hf)) >= 0.0);
}

TEST_CASE("pullback metric basics") {
  CMap ident = [](const ComplexVec& z) { return z; };
  ComplexMatrix pi = pullback_metric(ident, {{0.2, 0.3}, {0.4, -0.6}});
  CHECK(cabs(pi(0, 0) - Cx{1, 0}) < 1e-8);
  CHECK(cabs(pi(0, 1)) < 1e-8);

  const Cx a{2, 1};
  CMap scale = [a](const ComplexVec& z) { return ComplexVec{a * z[0], a * z[1]}; };
  ComplexMatrix ps = pullback_metric(scale, {{0.5, 0}, {0, 0.5}});
  CHECK(cabs(ps(0, 0) - Cx{5, 0}) < 1e-6);
  CHECK(cabs(ps(1, 1) - Cx{5, 0}) < 1e-6);
}

TEST_CASE("pullback metric of a random stack is Hermitian PSD") {
  FlowStack s = make_flow_stack(4, 8, 81, 0.3);
  Rng rng(82);
  for (int trial = 0; trial < 10; ++trial) {
    ComplexVec z = {{rng.normal(), rng.normal()}, {rng.normal(), rng.normal()}};
    ComplexMatrix g = pullback_metric(stack_forward_map(s), z);
    CHECK(is_hermitian_pd(g, 1e-8));
  }
}

TEST_CASE("pullback of a composition obeys the chain rule") {
  FlowStack s1 = make_flow_stack(2, 8, 83, 0.25, Activation::None);
  FlowStack s2 = make_flow_stack(2, 8, 84, 0.25, Activation::None);
  CMap f1 = stack_forward_map(s1);
  CMap f2 = stack_forward_map(s2);
  CMap comp = [&](const ComplexVec& z) { return f2(f1(z)); };
  ComplexVec z = {{0.3, -0.2}, {0.1, 0.5}};
  ComplexMatrix lhs = pullback_metric(comp, z);
  // J1† (J2† J2) J1 with J2 evaluated at f1(z)
  WirtingerJet j1 = wirtinger_fd(f1, z);
  ComplexMatrix inner = pullback_metric(f2, f1(z));
  ComplexMatrix rhs = matmul(adjoint(j1.d_dz), matmul(inner, j1.d_dz));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(cabs(lhs(i, j) - rhs(i, j)) < 1e-5);
}

TEST_CASE("jacobi identity check") {
  MatrixPath constant = [](double) { return ComplexMatrix::identity(3); };
  auto [l0, r0] = jacobi_check(constant, 0.5);
  CHECK(l0 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r0 == doctest::Approx(0.0).epsilon(1e-12));

  MatrixPath exp_path = [](double t) {
    ComplexMatrix m = ComplexMatrix::identity(2);
    const double s = std::exp(t);
    m(0, 0) = {s, 0};
    m(1, 1) = {s, 0};
    return m;
  };
  auto [l1, r1] = jacobi_check(exp_path, 0.3);
  CHECK(std::abs(l1 - 2.0) < 1e-6);
  CHECK(std::abs(r1 - 2.0) < 1e-6);

  // Random smooth Hermitian-positive path: identity is exact up to FD error.
  MatrixPath smooth = [](double t) {
    ComplexMatrix j(2, 2);
    j(0, 0) = {1.0 + 0.3 * std::sin(t), 0.1 * std::cos(2 * t)};
    j(0, 1) = {0.2 * std::cos(t), -0.1 * std::sin(t)};
    j(1, 0) = {-0.15 * std::sin(3 * t), 0.05};
    j(1, 1) = {1.2 - 0.2 * std::cos(t), 0.08 * std::sin(t)};
    return gram(j);  // Hermitian PD for nonsingular j
  };
  auto [l2, r2] = jacobi_check(smooth, 0.7);
  CHECK(std::abs(l2 - r2) < 1e-5);
}

TEST_CASE("C^2 ricci of a product Fubini-Study potential") {
  // Φ = FS(z1) + FS(z2): block-diagonal metric with Ric_kk = 2 h_kk and
  // vanishing cross-blocks; exercises the 4D stencil and 2x2 logdet path.
  PotentialGrid p = sample_potential_2d(
      [](const Cx& z1, const Cx& z2) {
        return fubini_study_potential(z1) + fubini_study_potential(z2);
      },
      11, -0.05, 0.01);
  HermitianMetricField h = metric_from_potential(p);
  HermitianMetricField ric = ricci(h);
  for (int i = 0; i < ric.shape[0]; i += 3)
    for (int j = 0; j < ric.shape[1]; j += 3)
      for (int k = 0; k < ric.shape[2]; k += 3)
        for (int l = 0; l < ric.shape[3]; l += 3) {
          const std::int64_t n = ric.index({i, j, k, l});
          const Cx z1{ric.origin[0] + ric.spacing * i, ric.origin[1] + ric.spacing * j};
          const Cx z2{ric.origin[2] + ric.spacing * k, ric.origin[3] + ric.spacing * l};
          const double h1 = std::pow(1.0 + abs2(z1), -2.0);
          const double h2 = std::pow(1.0 + abs2(z2), -2.0);
          CHECK(std::abs(ric.h[n](0, 0).re - 2.0 * h1) < 2e-3);
          CHECK(std::abs(ric.h[n](1, 1).re - 2.0 * h2) < 2e-3);
          CHECK(cabs(ric.h[n](0, 1)) < 2e-3);
        }
}

TEST_CASE("potential Hessian convention vs the Gram matrix") {
  // Φ = |Mz|²: the grid Hessian h_ij = ∂_i∂_j̄Φ equals (M†M) transposed,
  // the mirror convention of pullback_metric's Gram output. Exact on the
  // quadratic up to roundoff.
  const Cx a{1.0, 0.3}, b{-0.4, 0.2}, c{0.1, -0.7}, d{0.9, 0.5};
  PotentialGrid p = sample_potential_2d(
      [&](const Cx& z1, const Cx& z2) {
        const Cx w1 = a * z1 + b * z2;
        const Cx w2 = c * z1 + d * z2;
        return abs2(w1) + abs2(w2);
      },
      7, -0.3, 0.1);
  HermitianMetricField h = metric_from_potential(p);
  ComplexMatrix M(2, 2);
  M(0, 0) = a;
  M(0, 1) = b;
  M(1, 0) = c;
  M(1, 1) = d;
  const ComplexMatrix g = gram(M);
  for (std::int64_t n = 0; n < h.size(); ++n)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(cabs(h.h[n](i, j) - g(j, i)) < 1e-9);
}

TEST_CASE("grid field CSV dumps") {
  PotentialGrid p = sample_potential_1d(fubini_study_potential, 9, 9, -0.4, -0.4, 0.1);
  HermitianMetricField h = metric_from_potential(p);
  metric_field_to_csv(h, "/tmp/kf_metric.csv");
  ScalarGridField r = scalar_curvature(h, ricci(h));
  scalar_field_to_csv(r, "/tmp/kf_scalar.csv");
  std::ifstream m("/tmp/kf_metric.csv"), s("/tmp/kf_scalar.csv");
  std::string header;
  std::getline(m, header);
  CHECK(header == "x,y,h_re,h_im,not_positive");
  std::getline(s, header);
  CHECK(header == "x,y,value");
  int rows = 0;
  std::string line;
  while (std::getline(m, line)) ++rows;
  CHECK(rows == 7 * 7);
  std::remove("/tmp/kf_metric.csv");
  std::remove("/tmp/kf_scalar.csv");
}
