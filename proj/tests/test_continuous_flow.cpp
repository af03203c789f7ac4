#include <cmath>

#include "doctest.h"
#include "kahlerflow/continuous_flow.hpp"

using namespace kahlerflow;

TEST_CASE("divergence of a constant field is zero") {
  VField v = [](const ComplexVec& z, double) { return ComplexVec(z.size(), Cx{1.5, -2.0}); };
  CHECK(divergence_exact(v, {{0.3, 0.1}, {0, 0}}, 0.0) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("divergence of the identity field is the real dimension") {
  VField v = [](const ComplexVec& z, double) { return z; };
  CHECK(divergence_exact(v, {{0.3, 0.1}, {-0.7, 0.2}}, 0.0) == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(divergence_exact(v, {{0.3, 0.1}}, 0.0) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("divergence of a random net matches the Hutchinson estimator") {
  VelocityNet net = make_velocity_net(51, 0.4);
  VField v = net_field(net);
  ComplexVec z = {{0.4, -0.2}, {0.1, 0.8}};
  const double exact = divergence_exact(v, z, 0.3);

  // Rademacher probes eps^T J eps with J eps by directional differences.
  Rng rng(52);
  const int probes = 10000;
  const double h = 1e-5;
  double sum = 0.0, sum2 = 0.0;
  for (int p = 0; p < probes; ++p) {
    double eps[4];
    for (double& e : eps) e = rng.uniform() < 0.5 ? -1.0 : 1.0;
    ComplexVec zp = z, zm = z;
    zp[0].re += h * eps[0];
    zp[0].im += h * eps[1];
    zp[1].re += h * eps[2];
    zp[1].im += h * eps[3];
    zm[0].re -= h * eps[0];
    zm[0].im -= h * eps[1];
    zm[1].re -= h * eps[2];
    zm[1].im -= h * eps[3];
    const ComplexVec vp = v(zp, 0.3), vm = v(zm, 0.3);
    const double jeps[4] = {(vp[0].re - vm[0].re) / (2 * h), (vp[0].im - vm[0].im) / (2 * h),
                            (vp[1].re - vm[1].re) / (2 * h), (vp[1].im - vm[1].im) / (2 * h)};
    const double est = eps[0] * jeps[0] + eps[1] * jeps[1] + eps[2] * jeps[2] + eps[3] * jeps[3];
    sum += est;
    sum2 += est * est;
  }
  const double mean = sum / probes;
  const double var = sum2 / probes - mean * mean;
  const double sigma = std::sqrt(std::max(var, 1e-30) / probes);
  CHECK(std::abs(mean - exact) < 3 * sigma + 1e-6);
}

TEST_CASE("integrate: zero field leaves the augmented state alone") {
  VField v = [](const ComplexVec& z, double) { return ComplexVec(z.size(), Cx{0, 0}); };
  ComplexVec z0 = {{0.2, -0.4}, {0.9, 0.1}};
  AugmentedState st = integrate(v, z0, 0.0, 1.0, 16);
  CHECK(cabs(st.z[0] - z0[0]) < 1e-14);
  CHECK(cabs(st.z[1] - z0[1]) < 1e-14);
  CHECK(st.logq == doctest::Approx(base_log_density(z0)).epsilon(1e-14));
}

TEST_CASE("integrate: linear field has the closed-form solution") {
  VField v = [](const ComplexVec& z, double) { return z; };
  ComplexVec z0 = {{1.0, 0.0}};
  AugmentedState st = integrate(v, z0, 0.0, 1.0, 100, 0.0);
  CHECK(cabs(st.z[0] - Cx{std::exp(1.0), 0}) < 1e-7);
  CHECK(st.logq == doctest::Approx(-2.0).epsilon(1e-7));
}

TEST_CASE("integrate: RK4 error falls ~16x when steps double") {
  VField v = [](const ComplexVec& z, double) { return z; };
  ComplexVec z0 = {{1.0, 0.0}};
  const double exact = std::exp(1.0);
  const double e100 = std::abs(integrate(v, z0, 0.0, 1.0, 100, 0.0).z[0].re - exact);
  const double e200 = std::abs(integrate(v, z0, 0.0, 1.0, 200, 0.0).z[0].re - exact);
  const double ratio = e100 / e200;
  CHECK(ratio > 8.0);
  CHECK(ratio < 32.0);
}

TEST_CASE("kinetic energy basics and a closed form") {
  VField zero = [](const ComplexVec& z, double) { return ComplexVec(z.size(), Cx{0, 0}); };
  CHECK(kinetic_energy(zero, {{0.5, 0}}, 0.0, 1.0, 32) == 0.0);

  const Cx c{0.6, -0.8};
  VField constf = [c](const ComplexVec& z, double) { return ComplexVec(z.size(), c); };
  CHECK(kinetic_energy(constf, {{0, 0}}, 0.0, 1.0, 32) == doctest::Approx(abs2(c)).epsilon(1e-12));

  VField lin = [](const ComplexVec& z, double) { return z; };
  const double expect = (std::exp(2.0) - 1.0) / 2.0;
  CHECK(kinetic_energy(lin, {{1.0, 0}}, 0.0, 1.0, 256) == doctest::Approx(expect).epsilon(1e-4));
}

TEST_CASE("reverse integration recovers the start point and logq") {
  VelocityNet net = make_velocity_net(53, 0.3);
  VField v = net_field(net);
  ComplexVec z0 = {{0.5, -0.3}, {-0.2, 0.7}};
  AugmentedState fwd = integrate(v, z0, 0.0, 1.0, 100);
  AugmentedState back = integrate(v, fwd.z, 1.0, 0.0, 100, fwd.logq);
  CHECK(cabs(back.z[0] - z0[0]) < 1e-5);
  CHECK(cabs(back.z[1] - z0[1]) < 1e-5);
  CHECK(std::abs(back.logq - base_log_density(z0)) < 1e-6);
}

TEST_CASE("cnf_log_prob matches the analytic value for the zero net") {
  // All-zero weights give v ≡ 0, so the model density is the base.
  VelocityNet net = make_velocity_net(54, 0.0);
  ComplexVec w = {{0.4, 0.6}, {-0.1, 0.2}};
  CHECK(cnf_log_prob(net, w, 32) == doctest::Approx(base_log_density(w)).epsilon(1e-12));
}

TEST_CASE("cnf_log_prob normalization against forward mass transport") {
  // Importance-sample ∫ q with base proposals, as in the discrete case.
  VelocityNet net = make_velocity_net(55, 0.25);
  Dataset base = sample_complex_gaussian(20000, 2, 56);
  double acc = 0.0;
  for (const ComplexVec& w : base.points)
    acc += std::exp(cnf_log_prob(net, w, 24) - base_log_density(w));
  CHECK(acc / base.points.size() == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("non-finite mid-trajectory aborts with the step index") {
  VField v = [](const ComplexVec& z, double) {
    ComplexVec out = z;
    out[0] = z[0] * 1e80;
    return out;
  };
  CHECK_THROWS_AS(integrate(v, {{1.0, 0}}, 0.0, 1.0, 8), NumericError);
}
