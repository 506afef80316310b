#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "rlab/errors.hpp"
#include "rlab/flow.hpp"
#include "rlab/tensor.hpp"

using namespace rlab;

namespace {

Vector point(std::initializer_list<double> v) {
  Vector p(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

}  // namespace

TEST(FlowRhs, EinsteinAndFlat) {
  const GeometrySpec s = round_sphere(3);
  const Vector p = point({0.3, -0.2, 0.5});
  const Matrix r = flow_rhs(s.metric, OneFormField::zero(3), 1.0, p);
  EXPECT_LE((r + 4.0 * s.metric.value(p)).norm(), 1e-10);
  const GeometrySpec e = euclidean(2);
  EXPECT_EQ(flow_rhs(e.metric, OneFormField::zero(2), 1.0, point({1.0, 2.0})).norm(), 0.0);
}

TEST(FlowRhs, SolitonDataGivesMinusTwoLambda) {
  const SolitonData d = warped_soliton(2, -2.0, {1.0}, {1.0});
  for (double x1 : {-1.5, 0.0, 1.2}) {
    const Matrix r = flow_rhs(d.geometry.metric, *d.omega, d.theta, point({x1, 0.4}));
    EXPECT_NEAR(r(0, 0), 4.0, 1e-10);
  }
}

TEST(FlowRhs, DeturckWithIdentityGaugeMatchesPlain) {
  const SolitonData d = warped_soliton(3, -3.0, {1.0, 2.0}, {0.5, 1.5});
  const Vector p = point({0.2, -0.3, 0.7});
  const MetricField& g = d.geometry.metric;
  const DeturckRhs r = deturck_rhs(g, *d.omega, d.theta, *d.phi, g, d.target->metric, p);
  EXPECT_EQ(r.z.norm(), 0.0);
  EXPECT_LE((r.metric - flow_rhs(g, *d.omega, d.theta, p)).norm(), 1e-12);
  EXPECT_LE((r.map - map_rhs(*d.phi, g, d.target->metric, p)).norm(), 1e-12);
}

TEST(FlowRhs, DeturckGaugeTermAgainstFiniteDifferenceLie) {
  const MetricField gt = hyperbolic_warped(3).metric;
  const MetricField gb = MetricField::euclidean(3);
  const Vector p = point({0.3, 0.1, -0.2});
  const SmoothMap phi = SmoothMap::identity(3);
  const DeturckRhs r = deturck_rhs(gt, OneFormField::zero(3), 0.0, phi, gb, gb, p);
  ASSERT_TRUE(r.metric.allFinite());
  // Lie derivative of gt along Z with Z differentiated by central differences
  const double h = 1e-5;
  Matrix dz(3, 3);
  for (int k = 0; k < 3; ++k) {
    Vector a = p, b = p;
    a[k] += h;
    b[k] -= h;
    dz.col(k) = (deturck_field(gt, gb, a) - deturck_field(gt, gb, b)) / (2 * h);
  }
  VectorJet zj{r.z, dz, 1};
  const Matrix lie = lie_derivative_metric(zj, gt.jet(p, 1));
  EXPECT_LE((r.metric - (flow_rhs(gt, OneFormField::zero(3), 0.0, p) - lie)).norm(), 1e-8);
}

TEST(Naturality, IdentityAffineAndSweep) {
  const MetricField g = hyperbolic_warped(2).metric;
  const MetricField h = MetricField::euclidean(2);
  const SmoothMap phi = SmoothMap::analytic(2, 2, [](const JetVec& x) {
    return JetVec{x[0] * x[1] + 2.0 * x[0], x[1] * x[1] - x[0]};
  });
  const Vector p = point({0.2, -0.4});
  EXPECT_LE(tension_naturality_check(phi, g, h, SmoothMap::identity(2), p).norm(), 1e-12);
  const SmoothMap affine = SmoothMap::analytic(2, 2, [](const JetVec& x) {
    return JetVec{1.1 * x[0] + 0.2 * x[1] + 0.3, -0.1 * x[0] + 0.9 * x[1]};
  });
  const MetricField flat = MetricField::euclidean(2);
  EXPECT_LE(tension_naturality_check(phi, flat, h, affine, p).norm(), 1e-8);
  const SmoothMap wobble = SmoothMap::analytic(2, 2, [](const JetVec& x) {
    return JetVec{x[0] + 0.1 * sin(x[0]), x[1]};
  });
  const SolitonData d = warped_soliton(2, -2.0, {1.0}, {1.0});
  EXPECT_LE(tension_naturality_check(*d.phi, g, d.target->metric, wobble, p).norm(), 1e-6);
  const ResidualReport r = tension_naturality_sweep(2, 20, 7);
  EXPECT_TRUE(r.pass) << r.max;
  EXPECT_EQ(r.residuals.size(), 20u);
}

TEST(Naturality, RandomDiffeoIsSmallPerturbation) {
  const SmoothMap psi = random_polynomial_diffeo(3, 0.1, 42);
  for (const Vector& p : box_chart("c", Vector::Constant(3, -1.0), Vector::Constant(3, 1.0)).sample(50, 3)) {
    EXPECT_LE((psi.value(p) - p).cwiseAbs().maxCoeff(), 0.1 + 1e-12);
  }
}

TEST(MSoliton, ConditionsAndNegativeControl) {
  SampleOptions opts;
  opts.count = 30;
  for (auto [m, lambda, n] : {std::tuple{2, -2.0, 1}, {3, -3.0, 2}, {4, -4.0, 2}}) {
    const std::vector<double> ab(static_cast<std::size_t>(n), 1.0);
    const MSolitonReport r = msoliton_conditions_check(warped_soliton(m, lambda, ab, ab), opts);
    EXPECT_TRUE(r.pullback.pass) << m;
    EXPECT_TRUE(r.soliton.pass) << m;
    EXPECT_TRUE(r.harmonic.pass) << m;
    EXPECT_FALSE(r.negative_control.pass);
    EXPECT_GT(r.negative_control.max, 0.05);
    EXPECT_TRUE(r.pass);
  }
}

TEST(SelfSimilar, WindowAndInitialSlice) {
  const SolitonData d = warped_soliton(2, -2.0, {1.0}, {1.0});
  EXPECT_THROW(build_self_similar(d, -0.3), WindowError);
  const SelfSimilarOracle o = build_self_similar(d, 0.0);
  const Vector p = point({0.4, -0.7});
  EXPECT_EQ((o.psi(0.0).value(p) - p).norm(), 0.0);
  EXPECT_LE((o.metric(0.0).value(p) - d.geometry.metric.value(p)).norm(), 1e-14);
}

TEST(SelfSimilar, OracleCoefficientsAtScaleFour) {
  const SelfSimilarOracle o(warped_soliton(2, -2.0, {1.0}, {1.0}));
  for (double x1 : {-1.0, 0.5}) {
    const auto pr = o.profile(0.75, x1);
    EXPECT_NEAR(pr.a, 4.0, 1e-10);
    EXPECT_NEAR(pr.b, 2.0, 1e-10);
    EXPECT_NEAR(pr.phi[0], std::pow(4.0, 1.5) * std::exp(2.0 * x1) + 1.0, 1e-8);
  }
  // the printed B(t) differs
  const Vector p = point({0.0, 0.0});
  EXPECT_GT(std::abs(o.printed_metric(0.75).value(p)(1, 1) - 2.0), 1.0);
}

TEST(SelfSimilar, PrintedFirstComponentAndVelocity) {
  const SelfSimilarOracle o(warped_soliton(3, -3.0, {1.0}, {2.0}));
  SampleOptions opts;
  opts.count = 20;
  EXPECT_TRUE(printed_psi1_check(o, 0.2, opts).pass);
  opts.tolerance = 1e-6;
  EXPECT_TRUE(self_similar_velocity_check(o, opts).pass);
}

TEST(SelfSimilar, ResidualConvergesAtSecondOrder) {
  const SelfSimilarOracle o(warped_soliton(2, -2.0, {1.0}, {1.0}));
  const auto pts = o.data().geometry.chart.sample(6, 5);
  const ResidualConvergence r = flow_residual_convergence(o.solution(), 0.1, pts, 1e-3);
  EXPECT_TRUE(r.pass) << to_json(r).dump();
  const ResidualConvergence q = flow_residual_convergence(o.printed_solution(), 0.1, pts, 1e-3);
  EXPECT_FALSE(q.pass);
  EXPECT_GT(q.residuals[0], 1e-2);
}

TEST(ReducedFlow, SmallGridTracksOracle) {
  const SelfSimilarOracle o(warped_soliton(2, -2.0, {1.0}, {1.0}));
  FlowOptions opts;
  opts.t_end = 0.002;
  opts.snapshot_every = 10;
  FlowTrajectory tr;
  const FlowComparison c = compare_with_oracle(o, FlowGrid{61, 2.0}, opts, 1e-3, &tr);
  EXPECT_TRUE(c.pass) << c.relative_error;
  EXPECT_GT(tr.snapshots.size(), 2u);
  std::ostringstream csv;
  write_trajectory_csv(csv, tr);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "t,node,A,B,phi_1");
}

TEST(ReducedFlow, RhsAtSolitonDataIsUniform) {
  const SelfSimilarOracle o(warped_soliton(2, -2.0, {1.0}, {1.0}));
  const FlowState s = oracle_state(o, FlowGrid{201, 2.0}, 0.0);
  const FlowState r = reduced_rhs(reduced_problem(o), s);
  for (std::size_t j = 2; j + 2 < s.x.size(); ++j) {
    EXPECT_NEAR(r.a[j], 4.0, 1e-6);
    EXPECT_NEAR(r.b[j], 2.0, 1e-6);
  }
}

TEST(ReducedFlow, ZeroRhsControl) {
  FlowOptions opts;
  opts.t_end = 0.002;
  const ZeroRhsControl c = zero_rhs_control(2, 1, FlowGrid{41, 2.0}, opts);
  EXPECT_TRUE(c.pass) << c.max_change;
}

TEST(ReducedFlow, StepBoundAndInvariants) {
  const SelfSimilarOracle o(warped_soliton(2, -2.0, {1.0}, {1.0}));
  const ReducedProblem p = reduced_problem(o);
  FlowState s = oracle_state(o, FlowGrid{41, 2.0}, 0.0);
  FlowOptions opts;
  opts.t_end = 0.01;
  opts.dt = 1.0;
  EXPECT_THROW(integrate_flow_1d(p, s, opts), ParameterError);
  s.a[20] = -1.0;
  opts.dt = 0.0;
  EXPECT_THROW(integrate_flow_1d(p, s, opts), InvariantBreach);
  opts.t_end = 0.0;
  s.a[20] = 1.0;
  EXPECT_EQ(integrate_flow_1d(p, s, opts).steps, 0);
}

TEST(ReducedFlow, DeturckCorrespondenceShortWindow) {
  const SelfSimilarOracle o(warped_soliton(2, -2.0, {1.0}, {1.0}));
  FlowOptions opts;
  opts.t_end = 0.002;
  const DeturckCorrespondence c = deturck_correspondence_check(o, FlowGrid{61, 2.0}, opts);
  EXPECT_TRUE(c.pass) << to_json(c).dump();
  EXPECT_LE(c.initial_rhs_gap, 1e-10);
}
