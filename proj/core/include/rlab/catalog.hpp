#pragma once

// Named geometries and soliton bundles: charts, metrics and fields for the
// warped hyperbolic space, round spheres, Berger spheres and the rest.

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rlab/fields.hpp"

namespace rlab {

// Scalar and vector parameters by name (kappa, tau, m, lambda, a, b, v, w, ...).
class Params {
 public:
  Params() = default;
  Params& set(const std::string& key, double value);
  Params& set(const std::string& key, std::vector<double> value);

  bool has(const std::string& key) const;
  double get(const std::string& key) const;
  double get(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::vector<double> vec(const std::string& key) const;
  std::vector<double> vec(const std::string& key, std::vector<double> fallback) const;

  const std::map<std::string, double>& scalars() const { return scalars_; }
  const std::map<std::string, std::vector<double>>& vectors() const { return vectors_; }

 private:
  std::map<std::string, double> scalars_;
  std::map<std::string, std::vector<double>> vectors_;
};

struct GeometrySpec {
  std::string name;
  Chart chart;
  MetricField metric;
  std::map<std::string, ScalarField> scalars;
  std::map<std::string, VectorFieldSpec> vectors;
  std::map<std::string, OneFormField> oneforms;
  Params params;
};

enum class SolitonKind { soliton, almost_soliton, gradient };
std::string to_string(SolitonKind kind);

struct SolitonData {
  GeometrySpec geometry;
  SolitonKind kind = SolitonKind::soliton;
  std::optional<VectorFieldSpec> x;
  std::optional<ScalarField> eta;
  std::optional<OneFormField> omega;
  std::optional<ScalarField> xi;
  double lambda = 0.0;
  std::optional<ScalarField> lambda_field;  // almost solitons
  double theta = 0.0;

  // Harmonic-map part of a Ricci-harmonic soliton.
  std::optional<SmoothMap> phi;
  std::optional<GeometrySpec> target;  // carries the target metric and omega_N

  ScalarField lambda_as_field() const;
};

// Height function <Y(x), v> of the radius-r sphere through the inverse
// stereographic map Y(x) = (2 r^2 x, r (r^2 - |x|^2)) / (r^2 + |x|^2).
ScalarField height_function(int m, double r, const std::vector<double>& v);
// Y(x) as a generic closure, for quadrature and tests.
JetVec stereographic_embedding(const JetVec& x, double r);

GeometrySpec euclidean(int m);
GeometrySpec hyperbolic_warped(int m);
GeometrySpec round_sphere(int m, double r = 1.0);
GeometrySpec berger_sphere(double kappa, double tau);
GeometrySpec punctured_euclidean(int n, const std::vector<double>& a, double theta,
                                 double lambda);

SolitonData euclidean_trivial(int m);
SolitonData berger_soliton(double kappa, double tau);
// lambda < 1 - m; a, b with n positive entries.
SolitonData warped_soliton(int m, double lambda, const std::vector<double>& a,
                           const std::vector<double>& b);
SolitonData obata_sphere(int m, double theta, double c1, double c2, const std::vector<double>& v,
                         const std::vector<double>& w);
// Carries X, the potential u on the Euclidean chart and X-flat on the warped metric.
struct NonGradientWitness {
  GeometrySpec flat;
  GeometrySpec warped;
  VectorFieldSpec x;
  ScalarField u;
  OneFormField x_flat_warped;
  double lambda = 0.0;
};
NonGradientWitness non_gradient_witness(int m, double lambda);

// The warped-product soliton field X as printed; also used by the flow engine.
VectorFieldSpec warped_soliton_field(int m, double lambda);

using CatalogEntry = std::variant<GeometrySpec, SolitonData, NonGradientWitness>;

// Names: euclidean, hyperbolic-warped, round-sphere, berger-sphere,
// punctured-euclidean, berger-soliton, warped-soliton, obata-sphere,
// non-gradient-witness, euclidean-trivial.
std::vector<std::string> catalog_names();
CatalogEntry build(const std::string& name, const Params& params);

// Symmetry, finiteness and Cholesky of the metric at `count` sampled points;
// throws ParameterError / SingularMetricError on failure.
void check_geometry(const GeometrySpec& g, std::size_t count = 100, std::uint64_t seed = 1);

// Deterministic seed derived from a label (FNV-1a), mixed with a user seed.
std::uint64_t label_seed(const std::string& label, std::uint64_t seed);

}  // namespace rlab
