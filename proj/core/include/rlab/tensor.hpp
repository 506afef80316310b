#pragma once

// Pointwise Riemannian primitives over a single coordinate chart.
//
// Index conventions: gamma[l](i, j) = Gamma^l_ij, dgamma[k][l](i, j) =
// d_k Gamma^l_ij. Covariant 2-tensors are plain matrices T(i, j) = T_ij.

#include <vector>

#include "rlab/fields.hpp"

namespace rlab {

using Christoffel = std::vector<Matrix>;

// Cholesky-backed inverse; throws SingularMetricError echoing p.
Matrix inverse_metric(const Matrix& g, const Vector& p);

struct Connection {
  Matrix g;
  Matrix ginv;
  Christoffel gamma;
  std::vector<Christoffel> dgamma;  // filled only when the jet has order >= 2
};

Connection connection(const MetricJet& j, const Vector& p);

Christoffel christoffel(const MetricField& g, const Vector& p);
Matrix ricci(const Connection& c);
Matrix ricci(const MetricField& g, const Vector& p);
double scalar_curvature(const MetricField& g, const Vector& p);
// d_k S by central differences of S.
Vector scalar_curvature_differential(const MetricField& g, const Vector& p, double h = 1e-4);
// g^{kl} d_l S.
Vector grad_scalar_curvature(const MetricField& g, const Vector& p, double h = 1e-4);

Matrix lie_derivative_metric(const VectorJet& x, const MetricJet& g);
Matrix lie_derivative_metric(const VectorFieldSpec& x, const MetricField& g, const Vector& p);

Matrix hessian(const ScalarJet& f, const Christoffel& gamma);
Matrix hessian_scalar(const ScalarField& f, const MetricField& g, const Vector& p);
double laplacian_scalar(const ScalarField& f, const MetricField& g, const Vector& p);
Vector gradient(const ScalarField& f, const MetricField& g, const Vector& p);

Matrix traceless(const Matrix& t, const Matrix& g);
Matrix traceless(const TensorField2& t, const MetricField& g, const Vector& p);
// (div T)_j = g^{ik} (nabla_i T)_kj.
Vector divergence_sym2(const Matrix& t, const std::vector<Matrix>& dt, const Connection& c);
Vector divergence_sym2(const TensorField2& t, const MetricField& g, const Vector& p);
// Ricci tensor as a field; derivatives by central differences.
TensorField2 ricci_field(const MetricField& g, double fd_step = 1e-4);

// Target Christoffel symbols are evaluated at phi(p).
Vector tension_field(const FieldJet& phi, const Connection& source, const Christoffel& target);
Vector tension_field(const SmoothMap& phi, const MetricField& g, const MetricField& h,
                     const Vector& p);

Matrix pullback_metric(const SmoothMap& psi, const MetricField& g, const Vector& p);
Vector pullback_oneform(const SmoothMap& psi, const OneFormField& w, const Vector& p);
// Field-level pullbacks; analytic when both inputs are.
MetricField pullback_metric_field(const SmoothMap& psi, const MetricField& g);
OneFormField pullback_oneform_field(const SmoothMap& psi, const OneFormField& w);

Vector sharp(const Vector& w, const Matrix& g, const Vector& p);
Vector flat(const Vector& x, const Matrix& g);
Vector sharp(const OneFormField& w, const MetricField& g, const Vector& p);
Vector flat(const VectorFieldSpec& x, const MetricField& g, const Vector& p);
OneFormField flat_field(const VectorFieldSpec& x, const MetricField& g);

double norm_sq_vector(const Vector& x, const Matrix& g);
double norm_sq_covector(const Vector& w, const Matrix& ginv);
// g^{ik} g^{jl} T_ij T_kl
double norm_sq_tensor(const Matrix& t, const Matrix& ginv);

// (dw)_ij = d_i w_j - d_j w_i
Matrix exterior_derivative(const VectorJet& w);
Matrix exterior_derivative_oneform(const OneFormField& w, const Vector& p);

// Z^l = gt^{ij}(Gamma(gb)^l_ij - Gamma(gt)^l_ij). With order-2 jets on both
// metrics the Jacobian d_k Z^l is filled as well.
VectorJet deturck_field(const MetricJet& gt, const MetricJet& gb, const Vector& p);
Vector deturck_field(const MetricField& gt, const MetricField& gb, const Vector& p);

}  // namespace rlab
