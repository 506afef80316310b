#pragma once

// Modified Ricci-harmonic flow
//
//   d_t g   = -2 Ric_g + 2 theta w (x) w,     w = phi^* w_N
//   d_t phi = tension_{g,h}(phi)
//
// its DeTurck-gauged variant, the self-similar solution generated by a
// warped-product soliton, and a method-of-lines integrator for metrics of the
// form A(x1) dx1^2 + B(x1) e^{2 x1} sum_{i>=2} dx_i^2.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "rlab/catalog.hpp"
#include "rlab/verifier.hpp"

namespace rlab {

// -2 Ric + 2 theta w (x) w at p.
Matrix flow_rhs(const MetricField& g, const OneFormField& w, double theta, const Vector& p);
// tension_{g,h}(phi) at p.
Vector map_rhs(const SmoothMap& phi, const MetricField& g, const MetricField& h, const Vector& p);

struct DeturckRhs {
  Matrix metric;  // flow_rhs - L_Z gt
  Vector map;     // map_rhs - dphi(Z)
  Vector z;
};
DeturckRhs deturck_rhs(const MetricField& gt, const OneFormField& wt, double theta,
                       const SmoothMap& phit, const MetricField& gb, const MetricField& h,
                       const Vector& p);

// tension_{psi^*g,h}(phi o psi) at p minus tension_{g,h}(phi) at psi(p).
Vector tension_naturality_check(const SmoothMap& phi, const MetricField& g, const MetricField& h,
                                const SmoothMap& psi, const Vector& p);

// x + P(x) with P quadratic per component, random coefficients scaled so that
// sup |P| <= amplitude on [-1, 1]^m.
SmoothMap random_polynomial_diffeo(int m, double amplitude, std::uint64_t seed);

// Pairs (psi, phi) on the warped hyperbolic metric with a random quadratic map
// into the warped hyperbolic plane; residual per pair is the max over
// `points_per_pair` points in [-0.5, 0.5]^m.
ResidualReport tension_naturality_sweep(int m, std::size_t pairs, std::uint64_t seed,
                                        double tolerance = 1e-6, std::size_t points_per_pair = 4);

struct MSolitonReport {
  ResidualReport pullback;          // phi^* w_N - w
  ResidualReport soliton;           // Ric + 1/2 L_X g - lambda g - theta w (x) w
  ResidualReport harmonic;          // tension(phi) - dphi(X)
  ResidualReport negative_control;  // soliton residual with lambda + 0.1; must fail
  bool pass = false;
};
nlohmann::json to_json(const MSolitonReport& r);
MSolitonReport msoliton_conditions_check(const SolitonData& d, const SampleOptions& opts);

// Time-dependent metric, map and one-form.
struct FlowSolution {
  std::string label;
  int m = 0;
  double theta = 0.0;
  MetricField target;
  std::function<MetricField(double)> metric;
  std::function<SmoothMap(double)> map;
  std::function<OneFormField(double)> omega;
};

// g(t) = c(t) psi_t^* g, phi(t) = phi o psi_t with c(t) = 1 - 2 lambda t and
// d_t psi_t = X(psi_t) / c(t), psi_0 = id. psi_t is integrated by RK4 in jet
// arithmetic, so g(t) and phi(t) keep exact spatial derivatives.
class SelfSimilarOracle {
 public:
  SelfSimilarOracle(SolitonData d, double step = 2e-4);

  const SolitonData& data() const { return d_; }
  double c(double t) const;  // throws WindowError unless c(t) > 0
  SmoothMap psi(double t) const;
  MetricField metric(double t) const;
  SmoothMap map(double t) const;
  OneFormField omega(double t) const;
  FlowSolution solution() const;

  // Closed forms as printed for the warped-product soliton:
  // psi^1 = x1 + ((lambda - m + 1) / (2 lambda)) ln c, psi^i = (1 - ln c) x_i,
  // g(t) = c dx1^2 + c^{(2 lambda - m + 1)/lambda} (1 - ln c)^2 e^{2 x1} sum dx_i^2,
  // phi(t) = c^{(m - lambda - 1)/2} e^{-lambda x1} b + a.
  SmoothMap printed_psi(double t) const;
  MetricField printed_metric(double t) const;
  SmoothMap printed_map(double t) const;
  FlowSolution printed_solution() const;

  // Warped-product coefficients of the integrated g(t) and phi(t) at (x1, 0, ...).
  struct Profile {
    double a = 0.0;
    double b = 0.0;
    std::vector<double> phi;
  };
  Profile profile(double t, double x1) const;

 private:
  SolitonData d_;
  double step_;
  int n_ = 0;
  std::vector<double> a_;
  std::vector<double> b_;
};

// Validates the data and the window c(t) > 0.
SelfSimilarOracle build_self_similar(const SolitonData& d, double t);

struct FlowResidual {
  Matrix metric_gap;  // central difference of g(t) minus flow_rhs
  Vector map_gap;
  double metric_rate = 0.0;  // |d_t g| (Frobenius), for normalisation
  double map_rate = 0.0;
  // max(|metric_gap| / max(1, |d_t g|), |map_gap| / max(1, |d_t phi|))
  double relative() const;
};
FlowResidual flow_residual_of_solution(const FlowSolution& s, double t, const Vector& p,
                                       double dt);

struct ResidualConvergence {
  std::string label;
  double t = 0.0;
  std::vector<double> dts;
  std::vector<double> residuals;  // max relative residual over the points
  std::vector<double> orders;     // log2 of successive ratios
  double tolerance = 1e-5;
  bool pass = false;              // residuals[0] <= tolerance and orders within 2 +- 0.2
};
nlohmann::json to_json(const ResidualConvergence& r);
ResidualConvergence flow_residual_convergence(const FlowSolution& s, double t,
                                              const std::vector<Vector>& points, double dt,
                                              int halvings = 2, double tolerance = 1e-5);

// d_t g(t)|_{t=0} by central differences on the oracle against -2 lambda g + L_X g.
ResidualReport self_similar_velocity_check(const SelfSimilarOracle& o, const SampleOptions& opts,
                                           double dt = 1e-5);

// Oracle psi_t^1 against the printed first component.
ResidualReport printed_psi1_check(const SelfSimilarOracle& o, double t, const SampleOptions& opts);

// ---------------------------------------------------------------------------
// Reduced flow on a uniform grid in x1.

struct FlowGrid {
  int nodes = 201;
  double half_width = 2.0;
  double spacing() const { return 2.0 * half_width / (nodes - 1); }
  double x(int j) const { return -half_width + j * spacing(); }
};

struct FlowState {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> a;                 // A per node
  std::vector<double> b;                 // B per node
  std::vector<std::vector<double>> phi;  // phi[node][gamma]
};

struct NodeValue {
  double a = 0.0;
  double b = 0.0;
  std::vector<double> phi;
};

struct ReducedProblem {
  int m = 2;
  int n = 1;
  double theta = 0.0;
  MetricField target;         // dimension n
  OneFormField omega_target;  // w_N; empty means w = 0
  Chart target_chart;         // its domain bounds the admissible map values
  // Dirichlet data for the two outermost nodes on each side.
  std::function<NodeValue(double t, double x1)> boundary;
};

// Soliton-driven problem with oracle boundary data.
ReducedProblem reduced_problem(const SelfSimilarOracle& o);
FlowState oracle_state(const SelfSimilarOracle& o, const FlowGrid& grid, double t);

// sigma h^2 min(A) / max(1, r) with r the largest relative rate
// |d_t u| / max(1, |u|) over the state components.
double stability_bound(const ReducedProblem& p, const FlowState& s, double sigma = 0.2);

struct FlowOptions {
  double t_end = 0.01;
  double dt = 0.0;     // <= 0: largest step under the stability bound dividing t_end
  double sigma = 0.2;
  int snapshot_every = 0;  // 0: initial and final states only
};

struct FlowTrajectory {
  std::vector<FlowState> snapshots;
  double dt = 0.0;
  int steps = 0;
  const FlowState& final() const { return snapshots.back(); }
};

// RK4 method of lines, 4th-order central differences in x1; throws
// InvariantBreach with a state dump when A, B <= 0 or phi leaves the target.
FlowTrajectory integrate_flow_1d(const ReducedProblem& p, const FlowState& s0,
                                 const FlowOptions& opts);

// Time derivatives (A, B, phi) at every interior node; boundary entries are 0.
FlowState reduced_rhs(const ReducedProblem& p, const FlowState& s);

// Sup over nodes and components of |u - u_ref| / max(1, |u_ref|).
double relative_state_error(const FlowState& s, const FlowState& ref);
double max_state_change(const FlowState& a, const FlowState& b);

void write_trajectory_csv(std::ostream& os, const FlowTrajectory& tr);

struct FlowComparison {
  double t_end = 0.0;
  int nodes = 0;
  double dt = 0.0;
  int steps = 0;
  double relative_error = 0.0;
  double tolerance = 1e-3;
  bool pass = false;
};
nlohmann::json to_json(const FlowComparison& c);
FlowComparison compare_with_oracle(const SelfSimilarOracle& o, const FlowGrid& grid,
                                   const FlowOptions& opts, double tolerance = 1e-3,
                                   FlowTrajectory* trajectory = nullptr);

// Flat data with constant map and w = 0: the state must not move.
struct ZeroRhsControl {
  double max_change = 0.0;
  double tolerance = 1e-12;
  bool pass = false;
};
nlohmann::json to_json(const ZeroRhsControl& c);
ZeroRhsControl zero_rhs_control(int m, int n, const FlowGrid& grid, const FlowOptions& opts,
                                double tolerance = 1e-12);

struct DeturckCorrespondence {
  double t_end = 0.0;
  double gap = 0.0;              // pulled-back DeTurck vs direct flow, relative sup
  double initial_rhs_gap = 0.0;  // DeTurck vs plain RHS at t = 0 (Z = 0 there)
  double max_shift = 0.0;        // sup |chi - x|
  double tolerance = 1e-2;
  bool pass = false;
};
nlohmann::json to_json(const DeturckCorrespondence& c);
// Background gbar = g(0). The diffeomorphism chi_t(x1) solves
// d_t chi = Z^1(chi) node by node; the DeTurck state is pulled back by chi and
// compared with the plain flow integrated on the same grid.
DeturckCorrespondence deturck_correspondence_check(const SelfSimilarOracle& o,
                                                   const FlowGrid& grid, const FlowOptions& opts,
                                                   double tolerance = 1e-2);

}  // namespace rlab
