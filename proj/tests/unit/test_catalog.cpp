#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rlab/catalog.hpp"
#include "rlab/errors.hpp"
#include "rlab/tensor.hpp"
#include "rlab/verifier.hpp"

using namespace rlab;

TEST(Catalog, BergerDegeneratesToRound) {
  const GeometrySpec b = berger_sphere(4.0, 1.0);
  for (const Vector& p : b.chart.sample(100, 3)) {
    Matrix round = Matrix::Zero(3, 3);
    round(0, 0) = 1.0;
    round(1, 1) = std::pow(std::cos(p[0]), 2);
    round(2, 2) = std::pow(std::sin(p[0]), 2);
    EXPECT_LE((b.metric.value(p) - round).norm(), 1e-15);
  }
}

TEST(Catalog, BergerE3IsUnitAndKilling) {
  const GeometrySpec b = berger_sphere(9.0, 2.0);
  for (const Vector& p : b.chart.sample(100, 5)) {
    const Vector e = b.vectors.at("E3").value(p);
    EXPECT_NEAR(norm_sq_vector(e, b.metric.value(p)), 1.0, 1e-12);
    EXPECT_LE(lie_derivative_metric(b.vectors.at("E3"), b.metric, p).norm(), 1e-12);
    EXPECT_LE((flat(b.vectors.at("E3"), b.metric, p) - b.oneforms.at("E3_flat").value(p)).norm(), 1e-12);
  }
}

TEST(Catalog, BergerScalarCurvatureIsConstant) {
  const GeometrySpec b = berger_sphere(4.0, 2.0);
  const auto pts = b.chart.sample(20, 9);
  const double s0 = scalar_curvature(b.metric, pts[0]);
  for (const Vector& p : pts) EXPECT_NEAR(scalar_curvature(b.metric, p), s0, 1e-10);
  // 2 kappa - 4 tau^2 = 8 - 16 ... expressed through the Ricci structure: 3 lambda + theta
  EXPECT_NEAR(s0, 3.0 * (4.0 - 8.0) + (16.0 - 4.0), 1e-10);
}

TEST(Catalog, WarpedThetaFormula) {
  const SolitonData d = warped_soliton(2, -2.0, {1.0}, {1.0});
  EXPECT_DOUBLE_EQ(d.theta, 1.0);
  const SolitonData d3 = warped_soliton(3, -3.0, {1.0, 2.0}, {0.5, 1.0});
  EXPECT_DOUBLE_EQ(d3.theta, 1.0);
}

TEST(Catalog, ObataXiAtNorthPole) {
  const SolitonData d = obata_sphere(2, 1.0, 0.0, 0.0, {0, 0, 1}, {0, 0, 1});
  EXPECT_NEAR(d.xi->value(Vector::Zero(2)), -0.5, 1e-15);
}

TEST(Catalog, ConstraintViolationsNameTheInequality) {
  try {
    berger_sphere(-1.0, 1.0);
    FAIL();
  } catch (const ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("kappa > 0"), std::string::npos);
  }
  EXPECT_THROW(berger_sphere(1.0, 0.0), ParameterError);
  try {
    warped_soliton(2, -0.5, {1.0}, {1.0});
    FAIL();
  } catch (const ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("lambda < 1 - m"), std::string::npos);
  }
  EXPECT_THROW(warped_soliton(2, -2.0, {-1.0}, {1.0}), ParameterError);
  EXPECT_THROW(warped_soliton(2, -2.0, {1.0}, {0.0}), ParameterError);
  EXPECT_THROW(obata_sphere(2, 1.0, 0.0, 0.0, {0, 0, 2}, {0, 0, 1}), ParameterError);
  EXPECT_THROW(build("nope", Params{}), UnsupportedError);
}

TEST(Catalog, BuildByNameRunsInvariantCheck) {
  for (const auto& name : catalog_names()) {
    EXPECT_NO_THROW(build(name, Params{})) << name;
  }
  const auto e = build("berger-soliton", Params{}.set("kappa", 16.0).set("tau", 3.0));
  EXPECT_NEAR(std::get<SolitonData>(e).lambda, -2.0, 1e-15);
}

TEST(Catalog, HyperbolicWarpedEinstein) {
  for (int m : {2, 3, 4}) {
    const GeometrySpec g = hyperbolic_warped(m);
    for (const Vector& p : g.chart.sample(100, 2)) {
      EXPECT_LE((ricci(g.metric, p) + (m - 1.0) * g.metric.value(p)).norm(), 1e-8);
    }
  }
}

TEST(Catalog, RoundSphereHeightFunctions) {
  for (int m : {2, 3}) {
    const GeometrySpec s = round_sphere(m);
    const ScalarField& h = s.scalars.at("h_v");
    for (const Vector& p : s.chart.sample(100, 4)) {
      EXPECT_LE((ricci(s.metric, p) - (m - 1.0) * s.metric.value(p)).norm(), 1e-8);
      EXPECT_LE((hessian_scalar(h, s.metric, p) + h.value(p) * s.metric.value(p)).norm(), 1e-8);
    }
  }
}

TEST(Catalog, NonGradientWitness) {
  const NonGradientWitness w = non_gradient_witness(2, -2.0);
  Vector p(2);
  p << 0.0, 1.0;
  EXPECT_NEAR(exterior_derivative_oneform(w.x_flat_warped, p)(0, 1), -8.0, 1e-12);
  for (const Vector& q : w.flat.chart.sample(100, 1)) {
    EXPECT_LE((gradient(w.u, w.flat.metric, q) - w.x.value(q)).norm(), 1e-10);
    EXPECT_LE(exterior_derivative_oneform(flat_field(w.x, w.flat.metric), q).norm(), 1e-12);
  }
}

TEST(Sampling, DeterministicAndInsideDomain) {
  const GeometrySpec b = berger_sphere(9.0, 2.0);
  const auto a = b.chart.sample(50, 17);
  const auto c = b.chart.sample(50, 17);
  ASSERT_EQ(a.size(), 50u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], c[i]);
    EXPECT_GT(a[i][0], 1e-3 - 1e-15);
    EXPECT_LT(a[i][0], std::numbers::pi / 2 - 1e-3 + 1e-15);
  }
  EXPECT_NE(b.chart.sample(5, 18)[0], a[0]);
}
