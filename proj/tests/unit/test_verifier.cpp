#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>

#include "rlab/errors.hpp"
#include "rlab/tensor.hpp"
#include "rlab/verifier.hpp"

using namespace rlab;

namespace {

double max_over(const Chart& c, std::size_t n, const std::function<double(const Vector&)>& f) {
  double mx = 0.0;
  for (const Vector& p : c.sample(n, 11)) mx = std::max(mx, f(p));
  return mx;
}

}  // namespace

TEST(Soliton, Berger) {
  for (auto [k, t] : {std::pair{9.0, 2.0}, {16.0, 3.0}, {4.0, 2.0}}) {
    const SolitonData d = berger_soliton(k, t);
    EXPECT_LE(max_over(d.geometry.chart, 100, [&](const Vector& p) { return soliton_residual(d, p).norm(); }),
              1e-8);
  }
}

TEST(Soliton, WarpedAndTrivial) {
  const SolitonData d = warped_soliton(2, -2.0, {1.0}, {1.0});
  EXPECT_LE(max_over(d.geometry.chart, 100, [&](const Vector& p) { return soliton_residual(d, p).norm(); }), 1e-8);
  const SolitonData e = euclidean_trivial(3);
  EXPECT_EQ(max_over(e.geometry.chart, 10, [&](const Vector& p) { return soliton_residual(e, p).norm(); }), 0.0);
}

TEST(Soliton, ObataGradient) {
  const SolitonData a = obata_sphere(2, 1.0, 0.0, 0.0, {0, 0, 1}, {0, 0, 1});
  const double s = 1.0 / std::sqrt(2.0);
  const SolitonData b = obata_sphere(3, 2.0, 1.0, 0.5, {1, 0, 0, 0}, {0, s, s, 0});
  for (const SolitonData* d : {&a, &b}) {
    EXPECT_LE(max_over(d->geometry.chart, 100,
                       [&](const Vector& p) { return gradient_soliton_residual(*d, p).norm(); }),
              1e-8);
    EXPECT_LE(max_over(d->geometry.chart, 30,
                       [&](const Vector& p) { return obata_psi_gap(*d, p).first.norm(); }),
              1e-8);
  }
}

TEST(Identity, DuIdentity) {
  const GeometrySpec e = euclidean(3);
  const auto x1 = ScalarField::analytic(3, [](const JetVec& x) { return x[0]; });
  const auto poly = ScalarField::analytic(3, [](const JetVec& x) {
    return 1.0 + x[0] * x[1] - 2.0 * x[2] * x[2] * x[0] + 0.3 * x[1] * x[1] * x[1];
  });
  const GeometrySpec s2 = round_sphere(2);
  for (const Vector& p : e.chart.sample(20, 1)) {
    EXPECT_LE(du_identity_residual(x1, e.metric, p).norm(), 1e-12);
    EXPECT_LE(du_identity_residual(poly, e.metric, p).norm(), 1e-8);
  }
  for (const Vector& p : s2.chart.sample(20, 1)) {
    EXPECT_LE(du_identity_residual(s2.scalars.at("h_v"), s2.metric, p).norm(), 1e-8);
  }
}

TEST(Trace, ConsistentWithResidualTrace) {
  const SolitonData d = berger_soliton(9.0, 2.0);
  for (const Vector& p : d.geometry.chart.sample(20, 1)) {
    const Matrix ginv = d.geometry.metric.value(p).inverse();
    const double tr = ginv.cwiseProduct(soliton_residual(d, p)).sum();
    EXPECT_NEAR(trace_identity_residual(d, p), tr, 1e-12);
    EXPECT_LE(std::abs(trace_identity_residual(d, p)), 1e-8);
  }
}

TEST(QuasiEinstein, TransformsAgree) {
  const GeometrySpec hw = hyperbolic_warped(3);
  const auto h = ScalarField::analytic(3, [](const JetVec& x) { return x[0]; });
  const auto rep = quasi_einstein_roundtrip(h, 4.0, -2.0, hw, SampleOptions{30, 1, 1e-8});
  EXPECT_TRUE(rep.qem_vs_hessian_type.pass);
  EXPECT_TRUE(rep.hessian_type_vs_aux.pass);
  EXPECT_TRUE(rep.transform_identity.pass);
  const auto c = ScalarField::constant(3, 2.0);
  const auto flat = quasi_einstein_roundtrip(c, 4.0, -2.0, hw, SampleOptions{10, 1, 1e-8});
  EXPECT_LE(flat.max_qem_residual, 1e-10);  // Einstein with lambda = -(m-1)
}

TEST(Quadrature, GaussLegendreExactness) {
  const auto [x, w] = gauss_legendre(5);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], 8);
  EXPECT_NEAR(s, 2.0 / 9.0, 1e-15);
}

TEST(Quadrature, VolumeAndHeightCalibration) {
  for (int m : {2, 3}) {
    const QuadratureRule q = sphere_rule(m, 8);
    EXPECT_TRUE(volume_calibration(q, 1e-10).pass) << m;
    std::vector<double> v(static_cast<std::size_t>(m + 1), 0.0);
    v[0] = 0.6;
    v[1] = 0.8;
    EXPECT_TRUE(height_calibration(q, v, 1e-8).pass) << m;
  }
  EXPECT_THROW(sphere_rule(4, 4), UnsupportedError);
}

TEST(Integral, ObataIdentities) {
  for (int m : {2, 3}) {
    std::vector<double> v(static_cast<std::size_t>(m + 1), 0.0);
    v.back() = 1.0;
    const SolitonData d = obata_sphere(m, 1.0, 0.0, 0.0, v, v);
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = integral_identity_check(d, sphere_rule(m, m == 2 ? 32 : 16));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "m=" << m << " rel gap " << r.gradient.rel_gap << " general " << r.general.rel_gap
              << " in " << secs << " s\n";
    EXPECT_TRUE(r.gradient.pass);
    EXPECT_TRUE(r.general.pass);
  }
}

TEST(Integral, BochnerStokes) {
  const QuadratureRule q2 = sphere_rule(2, 8);
  const GeometrySpec s2 = round_sphere(2);
  EXPECT_TRUE(bochner_stokes_check(s2.scalars.at("h_v"), s2, q2).pass);
  const GeometrySpec s3 = round_sphere(3);
  const auto u = height_function(3, 1.0, {0, 0, 0, 1}) + height_function(3, 1.0, {1, 0, 0, 0});
  EXPECT_TRUE(bochner_stokes_check(u, s3, sphere_rule(3, 6)).pass);
  const auto c = bochner_stokes_check(ScalarField::constant(2, 1.0), s2, q2);
  EXPECT_EQ(c.abs_gap, 0.0);
}

TEST(Eigen, EqualityCaseAndNegativeControl) {
  for (int m : {2, 3}) {
    std::vector<double> v(static_cast<std::size_t>(m + 1), 0.0);
    v.back() = 1.0;
    const SolitonData d = obata_sphere(m, 1.0, 0.0, 0.0, v, v);
    const EigenCheck e = eigen_equality_check(*d.xi, 0.0, d.geometry, SampleOptions{});
    EXPECT_TRUE(e.pass);
    EXPECT_NEAR(e.alpha, m, 1e-10);
    const ScalarField hw = d.geometry.scalars.at("h_w");
    const ScalarField bad = *d.xi + 0.1 * square(hw);
    const EigenCheck n = eigen_equality_check(bad, 0.0, d.geometry, SampleOptions{});
    EXPECT_FALSE(n.eigenfunction);
  }
}

TEST(RicciBound, BergerDiameter) {
  const RicciBound r = ricci_lower_bound_and_diameter(9.0, 2.0, 100);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.diameter_bound, std::numbers::pi * (1.0 + std::sqrt(3.0)), 1e-12);
  EXPECT_NEAR(r.diameter_bound, 8.5830, 1e-4);
  const RicciBound iso = ricci_lower_bound_and_diameter(4.0, 1.0, 20);
  EXPECT_NEAR(iso.min_ricci, 2.0, 1e-10);
  EXPECT_THROW(ricci_lower_bound_and_diameter(9.0, 1.0, 10), ParameterError);
  EXPECT_THROW(ricci_lower_bound_and_diameter(9.0, 3.0, 10), ParameterError);
}
