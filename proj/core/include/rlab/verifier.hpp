#pragma once

// Pointwise and integral checks of soliton identities.

#include <nlohmann/json.hpp>

#include <functional>
#include <string>
#include <vector>

#include "rlab/catalog.hpp"
#include "rlab/quadrature.hpp"

namespace rlab {

struct ResidualReport {
  std::string label;
  std::string check;
  std::vector<double> residuals;  // Frobenius norm per point
  double max = 0.0;
  double mean = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  nlohmann::json metadata = nlohmann::json::object();

  static ResidualReport make(std::string label, std::string check, std::vector<double> residuals,
                             double tolerance, nlohmann::json metadata = nlohmann::json::object());
};

struct SampleOptions {
  std::size_t count = 100;
  std::uint64_t seed = 1;
  double tolerance = 1e-8;
};

// Evaluates `residual` at the chart's sample points (in parallel).
ResidualReport sample_residual(const std::string& label, const std::string& check,
                               const Chart& chart, const std::function<double(const Vector&)>& residual,
                               const SampleOptions& opts, nlohmann::json metadata = nlohmann::json::object());

// Ric + 1/2 L_X g - lambda g - theta w (x) w
Matrix soliton_residual(const SolitonData& d, const Vector& p);
// Ric + Hess(eta) - lambda g - theta dxi (x) dxi; lambda may be a field
Matrix gradient_soliton_residual(const SolitonData& d, const Vector& p);
// du (x) du - 1/2 Hess(u^2) + u Hess(u)
Matrix du_identity_residual(const ScalarField& u, const MetricField& g, const Vector& p);
// S + div X - m lambda - theta |w|^2
double trace_identity_residual(const SolitonData& d, const Vector& p);
// Ric - lambda g - theta w (x) w for Einstein-type structures (no Lie term).
Matrix ricci_structure_residual(const MetricField& g, double lambda, double theta,
                                const OneFormField& w, const Vector& p);
// Divergence of X: d_i X^i + Gamma^i_ik X^k.
double divergence_vector(const VectorFieldSpec& x, const MetricField& g, const Vector& p);

// Quasi-Einstein transform with r = 4n, phi = h/2, f = exp(-phi/n),
// xi = -n ln f, eta = phi + xi.
struct QuasiEinsteinPoint {
  Matrix qem;            // Ric + Hess h - (1/r) dh dh - lambda g
  Matrix hessian_type;   // Ric + Hess phi - lambda g - (n/f) Hess f
  Matrix aux;            // Ric + Hess eta - lambda g - (1/n) dxi dxi
  double identity_gap;   // |(n/f) Hess f + Hess xi - (1/n) dxi dxi|
  double f;
};
QuasiEinsteinPoint quasi_einstein_point(const ScalarField& h, double r, double lambda,
                                        const MetricField& g, const Vector& p);
struct QuasiEinsteinReport {
  ResidualReport qem_vs_hessian_type;
  ResidualReport hessian_type_vs_aux;
  ResidualReport transform_identity;
  double max_qem_residual = 0.0;  // size of the untransformed residual, for context
};
QuasiEinsteinReport quasi_einstein_roundtrip(const ScalarField& h, double r, double lambda,
                                             const GeometrySpec& geo, const SampleOptions& opts);

struct IntegralCheck {
  std::string identity;
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_gap = 0.0;
  double rel_gap = 0.0;  // abs_gap / max(1, |lhs|, sum of |terms|)
  double tolerance = 1e-6;
  bool pass = false;
  int order = 0;
  nlohmann::json terms = nlohmann::json::object();
};
nlohmann::json to_json(const IntegralCheck& c);

struct IntegralIdentityResult {
  IntegralCheck general;   // with omega
  IntegralCheck gradient;  // omega = d xi expanded
};
// Requires a round-sphere geometry with gradient data (eta, xi) or (X, omega).
IntegralIdentityResult integral_identity_check(const SolitonData& d, const QuadratureRule& q,
                                               double tolerance = 1e-6);
IntegralCheck bochner_stokes_check(const ScalarField& u, const GeometrySpec& sphere,
                                   const QuadratureRule& q, double tolerance = 1e-6);
// int 1 and int h_v^2 against Vol and Vol/(m+1).
IntegralCheck volume_calibration(const QuadratureRule& q, double tolerance = 1e-8);
IntegralCheck height_calibration(const QuadratureRule& q, const std::vector<double>& v,
                                 double tolerance = 1e-8);

// Eigen relation Delta(f) = -alpha f for f = xi - c1 on the unit sphere, the
// bound alpha >= S/(m-1) and its equality-case Hessian equation.
struct EigenCheck {
  double alpha = 0.0;           // least-squares fit of -Delta f / f over samples
  double s_over_m1 = 0.0;       // S/(m-1)
  double eigen_residual = 0.0;  // max |Delta f + alpha f| / max |f|
  bool eigenfunction = false;
  double alpha_gap = 0.0;       // |alpha - S/(m-1)|
  double obata_residual = 0.0;  // max |Hess f + S f/(m(m-1)) g|
  bool shifted = false;         // c1 != 0, relation holds for xi - c1 only
  bool pass = false;
  std::string convention = "Delta = trace Hess, Delta f = -alpha f";
};
nlohmann::json to_json(const EigenCheck& c);
EigenCheck eigen_equality_check(const ScalarField& xi, double c1, const GeometrySpec& sphere,
                                const SampleOptions& opts);

// Hess Psi - mu g with Psi = eta - theta/2 (c1 - h_v/m)^2 and
// mu = lambda + theta (h_v/m - c1) h_v/m - (m - 1). Returns the full gap and
// its traceless part at p.
std::pair<Matrix, Matrix> obata_psi_gap(const SolitonData& d, const Vector& p);

struct RicciBound {
  double min_ricci = 0.0;  // min Ric(u, u) over sampled unit vectors
  double lambda = 0.0;     // kappa - 2 tau^2
  double c1 = 1.0;         // sup |X|
  double c2 = 0.0;
  double max_x_norm = 0.0;
  double diameter_bound = 0.0;
  std::size_t samples = 0;
  bool pass = false;
};
nlohmann::json to_json(const RicciBound& r);
// Needs 4 tau^2 >= kappa and kappa > 2 tau^2; violations throw ParameterError.
RicciBound ricci_lower_bound_and_diameter(double kappa, double tau, std::size_t count,
                                          std::uint64_t seed = 1);

nlohmann::json to_json(const ResidualReport& r, bool with_points = true);

}  // namespace rlab
