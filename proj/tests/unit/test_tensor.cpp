#include <gtest/gtest.h>

#include <cmath>

#include "rlab/errors.hpp"
#include "rlab/tensor.hpp"

using namespace rlab;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

MetricField hyperbolic_warped(int m) {
  return MetricField::analytic(m, [m](const JetVec& x) {
    JetVec g(static_cast<std::size_t>(m * m), Jet(0.0));
    g[0] = Jet(1.0);
    const Jet w = exp(2.0 * x[0]);
    for (int i = 1; i < m; ++i) g[static_cast<std::size_t>(i * m + i)] = w;
    return g;
  });
}

MetricField unit_sphere(int m) {
  return MetricField::analytic(m, [m](const JetVec& x) {
    Jet r2(0.0);
    for (const Jet& xi : x) r2 += xi * xi;
    const Jet f = 4.0 / square(1.0 + r2);
    JetVec g(static_cast<std::size_t>(m * m), Jet(0.0));
    for (int i = 0; i < m; ++i) g[static_cast<std::size_t>(i * m + i)] = f;
    return g;
  });
}

// g = (1 + 0.3 sin x1 cos x2) dx1^2 + 0.2 x1 x2 dx1dx2 + (2 + 0.1 x1^2 + 0.4 x3) dx2^2 + ...
MetricField lumpy() {
  return MetricField::analytic(3, [](const JetVec& x) {
    JetVec g(9, Jet(0.0));
    g[0] = 1.0 + 0.3 * sin(x[0]) * cos(x[1]);
    g[1] = 0.2 * x[0] * x[1];
    g[2] = 0.1 * sin(x[2]);
    g[4] = 2.0 + 0.1 * x[0] * x[0] + 0.2 * x[2];
    g[5] = 0.05 * x[1];
    g[8] = exp(0.3 * x[0]) + 0.1 * x[1] * x[1];
    return g;
  });
}

}  // namespace

TEST(Christoffel, EuclideanIsZero) {
  const auto g = MetricField::euclidean(3);
  for (const Matrix& gl : christoffel(g, vec({0.3, -2.0, 5.0}))) EXPECT_EQ(gl.norm(), 0.0);
}

TEST(Christoffel, WarpedPlane) {
  const Vector p = vec({0.4, -1.3});
  const auto gam = christoffel(hyperbolic_warped(2), p);
  EXPECT_NEAR(gam[0](1, 1), -std::exp(0.8), 1e-14);
  EXPECT_NEAR(gam[1](0, 1), 1.0, 1e-14);
  EXPECT_NEAR(gam[1](1, 0), 1.0, 1e-14);
  EXPECT_NEAR(gam[0](0, 0), 0.0, 1e-15);
}

TEST(Christoffel, SphereOriginIsCritical) {
  for (const Matrix& gl : christoffel(unit_sphere(2), vec({0.0, 0.0}))) {
    EXPECT_NEAR(gl.norm(), 0.0, 1e-15);
  }
}

TEST(Christoffel, SymmetricInLowerIndices) {
  const auto gam = christoffel(lumpy(), vec({0.2, 0.5, -0.4}));
  for (const Matrix& gl : gam) EXPECT_EQ((gl - gl.transpose()).norm(), 0.0);
}

TEST(Christoffel, SingularMetricEchoesPoint) {
  const auto g = MetricField::analytic(2, [](const JetVec& x) {
    return JetVec{x[0], Jet(0.0), Jet(0.0), Jet(1.0)};
  });
  try {
    christoffel(g, vec({-1.0, 2.0}));
    FAIL() << "expected SingularMetricError";
  } catch (const SingularMetricError& e) {
    ASSERT_EQ(e.point().size(), 2u);
    EXPECT_EQ(e.point()[1], 2.0);
  }
}

class WarpedRicci : public ::testing::TestWithParam<int> {};

TEST_P(WarpedRicci, EinsteinConstant) {
  const int m = GetParam();
  const auto g = hyperbolic_warped(m);
  Vector p = Vector::LinSpaced(m, -0.7, 0.9);
  const Matrix r = ricci(g, p);
  EXPECT_LE((r + (m - 1) * g.value(p)).norm(), 1e-12);
  EXPECT_NEAR(scalar_curvature(g, p), -m * (m - 1.0), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Dims, WarpedRicci, ::testing::Values(2, 3, 4));

TEST(Ricci, UnitSphereAndScalarCurvature) {
  for (int m : {2, 3}) {
    const auto g = unit_sphere(m);
    const Vector p = Vector::LinSpaced(m, 0.3, -0.6);
    EXPECT_LE((ricci(g, p) - (m - 1) * g.value(p)).norm(), 1e-12);
    EXPECT_NEAR(scalar_curvature(g, p), m * (m - 1.0), 1e-12);
  }
}

TEST(Ricci, SymmetricOnLumpyMetric) {
  const Matrix r = ricci(lumpy(), vec({0.1, 0.2, 0.3}));
  EXPECT_LE((r - r.transpose()).norm(), 1e-10);
}

TEST(Ricci, ContractedBianchi) {
  const auto g = lumpy();
  const TensorField2 ric = ricci_field(g);
  for (const Vector& p : {vec({0.1, 0.2, 0.3}), vec({-0.5, 0.7, 0.1})}) {
    const Vector gap = divergence_sym2(ric, g, p) - 0.5 * scalar_curvature_differential(g, p);
    EXPECT_LE(gap.norm(), 1e-6);
  }
}

TEST(FiniteDifference, MatchesAnalyticWithSecondOrderError) {
  const auto exact = lumpy();
  const Vector p = vec({0.3, -0.2, 0.4});
  const Matrix r0 = ricci(exact, p);
  auto err = [&](double scale) {
    const auto fd = MetricField::sampled(
        3, [&exact](const Vector& q) { return exact.value(q); }, FdSteps{1e-5 * scale, 2e-3 * scale});
    return (ricci(fd, p) - r0).norm();
  };
  const double e1 = err(1.0);
  const double e2 = err(0.5);
  EXPECT_LE(e1, 1e-4);
  EXPECT_NEAR(e1 / e2, 4.0, 1.0);
}

TEST(LieDerivative, EulerFieldOnEuclidean) {
  const auto x = VectorFieldSpec::analytic(3, [](const JetVec& p) { return p; });
  const Matrix l = lie_derivative_metric(x, MetricField::euclidean(3), vec({1, 2, 3}));
  EXPECT_LE((l - 2.0 * Matrix::Identity(3, 3)).norm(), 1e-15);
}

TEST(LieDerivative, WarpedSolitonField) {
  const int m = 3;
  const double lambda = -3.0;
  const auto x = VectorFieldSpec::analytic(m, [=](const JetVec& p) {
    JetVec v{Jet(m - lambda - 1)};
    for (int i = 1; i < m; ++i) v.push_back(2 * lambda * p[i]);
    return v;
  });
  const Vector p = vec({0.3, 0.5, -0.2});
  const Matrix half = 0.5 * lie_derivative_metric(x, hyperbolic_warped(m), p);
  Matrix expect = Matrix::Zero(m, m);
  for (int i = 1; i < m; ++i) expect(i, i) = (m + lambda - 1) * std::exp(0.6);
  EXPECT_LE((half - expect).norm(), 1e-12);
}

TEST(Hessian, HeightFunctionOnSphere) {
  const auto g = unit_sphere(2);
  // h_v for v = e3 through the inverse stereographic map
  const auto h = ScalarField::analytic(2, [](const JetVec& x) {
    const Jet r2 = x[0] * x[0] + x[1] * x[1];
    return (1.0 - r2) / (1.0 + r2);
  });
  const Vector p = vec({0.4, -0.3});
  EXPECT_LE((hessian_scalar(h, g, p) + h.value(p) * g.value(p)).norm(), 1e-12);
  EXPECT_NEAR(laplacian_scalar(h, g, p), -2.0 * h.value(p), 1e-12);
}

TEST(Traceless, Examples) {
  Matrix t = Matrix::Zero(2, 2);
  t(0, 0) = 1;
  t(1, 1) = 3;
  const Matrix tt = traceless(t, Matrix::Identity(2, 2));
  EXPECT_NEAR(tt(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(tt(1, 1), 1.0, 1e-15);
  const auto g = lumpy();
  const Vector p = vec({0.1, 0.1, 0.1});
  EXPECT_LE(traceless(g.value(p), g.value(p)).norm(), 1e-14);
}

TEST(Tension, IdentityIsHarmonic) {
  const auto g = lumpy();
  const Vector p = vec({0.2, -0.1, 0.3});
  EXPECT_LE(tension_field(SmoothMap::identity(3), g, g, p).norm(), 1e-12);
}

TEST(Tension, FlatTargetIsComponentLaplacian) {
  const auto g = hyperbolic_warped(2);
  const auto phi = SmoothMap::analytic(2, 1, [](const JetVec& x) { return JetVec{exp(2.0 * x[0]) + 1.0}; });
  const Vector p = vec({0.3, 0.8});
  // u = e^{2 x1}: u'' + u' = 6 e^{2 x1}
  EXPECT_NEAR(tension_field(phi, g, MetricField::euclidean(1), p)[0], 6.0 * std::exp(0.6), 1e-12);
}

TEST(Pullback, IdentityTranslationAndFunctoriality) {
  const auto g = lumpy();
  const Vector p = vec({0.2, 0.1, -0.3});
  EXPECT_LE((pullback_metric(SmoothMap::identity(3), g, p) - g.value(p)).norm(), 1e-15);
  const auto shift = SmoothMap::analytic(3, 3, [](const JetVec& x) {
    return JetVec{x[0] + 1.0, x[1] - 2.0, x[2]};
  });
  const auto flat3 = MetricField::euclidean(3);
  EXPECT_LE((pullback_metric(shift, flat3, p) - Matrix::Identity(3, 3)).norm(), 1e-15);

  const auto psi = SmoothMap::analytic(3, 3, [](const JetVec& x) {
    return JetVec{x[0] + 0.1 * sin(x[1]), x[1] + 0.05 * x[0] * x[2], x[2] + 0.1 * x[0] * x[0]};
  });
  const auto chi = SmoothMap::analytic(3, 3, [](const JetVec& x) {
    return JetVec{x[0] - 0.08 * x[2] * x[2], x[1] + 0.1 * cos(x[0]), x[2] + 0.02 * x[1]};
  });
  const Matrix lhs = pullback_metric(compose(psi, chi), g, p);
  const Matrix rhs = pullback_metric(chi, pullback_metric_field(psi, g), p);
  EXPECT_LE((lhs - rhs).norm(), 1e-10);
  // curvature of the pulled-back field is available analytically
  EXPECT_NO_THROW(ricci(pullback_metric_field(psi, g), p));
}

TEST(Musical, SharpFlatRoundTrip) {
  const auto g = lumpy();
  const Vector p = vec({0.4, 0.0, 0.2});
  const Vector x = vec({1.0, -2.0, 0.5});
  EXPECT_LE((sharp(flat(x, g.value(p)), g.value(p), p) - x).norm(), 1e-12);
}

TEST(ExteriorDerivative, ExactAndWarpedFlat) {
  const auto dx1 = OneFormField::analytic(2, [](const JetVec&) { return JetVec{Jet(1.0), Jet(0.0)}; });
  EXPECT_EQ(exterior_derivative_oneform(dx1, vec({0.1, 0.2})).norm(), 0.0);
  const double lambda = -2.0;
  const auto x = VectorFieldSpec::analytic(2, [=](const JetVec& p) {
    return JetVec{Jet(2 - lambda - 1), 2 * lambda * p[1]};
  });
  const Matrix d = exterior_derivative_oneform(flat_field(x, hyperbolic_warped(2)), vec({0.0, 1.0}));
  EXPECT_NEAR(d(0, 1), -8.0, 1e-12);
  EXPECT_NEAR(d(1, 0), 8.0, 1e-12);
}

TEST(DeTurck, IdentityGaugeAndScaleInvariance) {
  const auto g = lumpy();
  const Vector p = vec({0.1, 0.3, -0.2});
  EXPECT_EQ(deturck_field(g, g, p).norm(), 0.0);
  const auto g3 = MetricField::analytic(3, [](const JetVec& x) {
    JetVec out(9, Jet(0.0));
    out[0] = 3.0 * (1.0 + 0.3 * sin(x[0]) * cos(x[1]));
    out[4] = Jet(3.0);
    out[8] = Jet(3.0);
    return out;
  });
  const auto g1 = MetricField::analytic(3, [](const JetVec& x) {
    JetVec out(9, Jet(0.0));
    out[0] = 1.0 + 0.3 * sin(x[0]) * cos(x[1]);
    out[4] = Jet(1.0);
    out[8] = Jet(1.0);
    return out;
  });
  EXPECT_LE(deturck_field(g3, g1, p).norm(), 1e-15);
}

TEST(DeTurck, ConformalAgainstFlat) {
  // gt = e^{2 x1} delta, gb = delta: Z = (m - 2) e^{-2 x1} e_1
  for (int m : {2, 3}) {
    const auto gt = MetricField::analytic(m, [m](const JetVec& x) {
      JetVec out(static_cast<std::size_t>(m * m), Jet(0.0));
      for (int i = 0; i < m; ++i) out[static_cast<std::size_t>(i * m + i)] = exp(2.0 * x[0]);
      return out;
    });
    Vector p = Vector::LinSpaced(m, 0.25, -0.5);
    const VectorJet z = deturck_field(gt.jet(p, 2), MetricField::euclidean(m).jet(p, 2), p);
    EXPECT_NEAR(z.value[0], (m - 2) * std::exp(-0.5), 1e-14);
    for (int i = 1; i < m; ++i) EXPECT_NEAR(z.value[i], 0.0, 1e-14);
    EXPECT_NEAR(z.d1(0, 0), -2.0 * (m - 2) * std::exp(-0.5), 1e-13);
  }
}
