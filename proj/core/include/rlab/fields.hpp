#pragma once

// Coordinate charts and pointwise-evaluable fields with a derivative oracle.
//
// Every field is a provider `point -> jet` where the jet carries values and
// partial derivatives up to a requested order. Analytic fields wrap a generic
// Jet closure (exact derivatives, composable); sampled fields wrap a plain
// double closure and fall back to central finite differences.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rlab/jet.hpp"

namespace rlab {

// Chart dimensions are small; fixed-capacity storage keeps pointwise tensor
// algebra off the heap.
inline constexpr int kMaxDim = 8;
using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

struct FdSteps {
  double h1 = 1e-5;  // first derivatives, scaled by max(1, |x_k|)
  double h2 = 1e-4;  // nested second derivatives
};

enum class OracleKind { analytic, finite_difference, provided };
std::string to_string(OracleKind kind);

// Values and partial derivatives of an n-component function of m coordinates.
struct FieldJet {
  Eigen::VectorXd value;    // n
  Eigen::MatrixXd d1;       // n x m, d1(c, k) = d_k f_c
  std::vector<Matrix> d2;   // n entries of m x m when order >= 2
  int order = 0;
};

class ComponentFunction {
 public:
  using Provider = std::function<FieldJet(const Vector&, int)>;

  ComponentFunction() = default;
  ComponentFunction(int dim_in, int dim_out, Provider provider, int max_order,
                    OracleKind kind);

  // `order_loss`: how many derivative orders the closure consumes internally
  // (1 for closures that differentiate their inputs, e.g. pullbacks).
  static ComponentFunction analytic(int dim_in, int dim_out, JetFn fn, int order_loss = 0);
  static ComponentFunction sampled(int dim_in, int dim_out,
                                   std::function<Eigen::VectorXd(const Vector&)> fn,
                                   FdSteps steps = {});

  int dim_in() const { return dim_in_; }
  int dim_out() const { return dim_out_; }
  int max_order() const { return max_order_; }
  OracleKind kind() const { return kind_; }
  bool empty() const { return !provider_; }

  FieldJet jet(const Vector& p, int order) const;
  Eigen::VectorXd value(const Vector& p) const;

  // Generic closure for composition; empty for sampled/provided fields.
  const std::optional<JetFn>& generic() const { return generic_; }
  int order_loss() const { return order_loss_; }

 private:
  int dim_in_ = 0;
  int dim_out_ = 0;
  Provider provider_;
  int max_order_ = 0;
  OracleKind kind_ = OracleKind::provided;
  std::optional<JetFn> generic_;
  int order_loss_ = 0;
};

struct Chart {
  int dim = 0;
  std::string label;
  Vector sample_lo;  // finite sampling box
  Vector sample_hi;
  std::function<bool(const Vector&)> domain;  // empty: the whole box / R^m
  double margin = 1e-3;  // excluded band near chart singularities

  bool contains(const Vector& p) const;
  // Deterministic scrambled Halton points inside the shrunken box.
  std::vector<Vector> sample(std::size_t count, std::uint64_t seed) const;
};

Chart box_chart(std::string label, const Vector& lo, const Vector& hi,
                double margin = 1e-3);

struct ScalarJet {
  double value = 0.0;
  Vector d1;  // d_k f
  Matrix d2;  // d_k d_l f
  int order = 0;
};

// Vector field, one-form or any 1-index field: value and Jacobian.
struct VectorJet {
  Vector value;
  Matrix d1;  // d1(i, k) = d_k X^i
  int order = 0;
};

struct MetricJet {
  Matrix g;
  std::vector<Matrix> d1;               // d1[k](i, j) = d_k g_ij
  std::vector<std::vector<Matrix>> d2;  // d2[k][l](i, j) = d_k d_l g_ij
  int order = 0;
  int dim() const { return static_cast<int>(g.rows()); }
};

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(ComponentFunction fn, std::string label = {});
  static ScalarField analytic(int dim, std::function<Jet(const JetVec&)> fn,
                             std::string label = {});
  static ScalarField constant(int dim, double c);

  int dim() const { return fn_.dim_in(); }
  const std::string& label() const { return label_; }
  const ComponentFunction& fn() const { return fn_; }
  ScalarJet jet(const Vector& p, int order = 2) const;
  double value(const Vector& p) const;

  // Pointwise algebra. Results stay analytic when the inputs are.
  ScalarField map(std::function<Jet(const Jet&)> f, std::function<double(double)> fd) const;
  friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(double s, const ScalarField& a);

 private:
  ComponentFunction fn_;
  std::string label_;
};

ScalarField square(const ScalarField& f);
ScalarField exp(const ScalarField& f);
ScalarField log(const ScalarField& f);

class VectorFieldSpec {
 public:
  VectorFieldSpec() = default;
  explicit VectorFieldSpec(ComponentFunction fn, std::string label = {});
  static VectorFieldSpec analytic(int dim, JetFn fn, std::string label = {});
  static VectorFieldSpec zero(int dim);
  int dim() const { return fn_.dim_in(); }
  const ComponentFunction& fn() const { return fn_; }
  VectorJet jet(const Vector& p, int order = 1) const;
  Vector value(const Vector& p) const;

 private:
  ComponentFunction fn_;
  std::string label_;
};

class OneFormField {
 public:
  OneFormField() = default;
  explicit OneFormField(ComponentFunction fn, std::string label = {});
  static OneFormField analytic(int dim, JetFn fn, std::string label = {});
  static OneFormField zero(int dim);
  static OneFormField differential(const ScalarField& f);
  int dim() const { return fn_.dim_in(); }
  const ComponentFunction& fn() const { return fn_; }
  VectorJet jet(const Vector& p, int order = 1) const;
  Vector value(const Vector& p) const;

 private:
  ComponentFunction fn_;
  std::string label_;
};

class SmoothMap {
 public:
  SmoothMap() = default;
  explicit SmoothMap(ComponentFunction fn, std::string label = {});
  static SmoothMap analytic(int source_dim, int target_dim, JetFn fn, std::string label = {});
  static SmoothMap identity(int dim);
  int source_dim() const { return fn_.dim_in(); }
  int target_dim() const { return fn_.dim_out(); }
  const ComponentFunction& fn() const { return fn_; }
  FieldJet jet(const Vector& p, int order = 2) const { return fn_.jet(p, order); }
  Vector value(const Vector& p) const { return fn_.value(p); }

 private:
  ComponentFunction fn_;
  std::string label_;
};

// phi o psi. Analytic when both are.
SmoothMap compose(const SmoothMap& phi, const SmoothMap& psi);

class MetricField {
 public:
  using Provider = std::function<MetricJet(const Vector&, int)>;

  MetricField() = default;
  MetricField(int dim, Provider provider, int max_order, OracleKind kind,
              std::optional<JetFn> generic = {}, int order_loss = 0);
  // Component closure returns dim*dim jets in row-major order; only the upper
  // triangle is read, so the resulting metric is exactly symmetric.
  static MetricField analytic(int dim, JetFn fn, int order_loss = 0);
  static MetricField sampled(int dim, std::function<Matrix(const Vector&)> fn,
                             FdSteps steps = {});
  static MetricField euclidean(int dim);

  int dim() const { return dim_; }
  int max_order() const { return max_order_; }
  OracleKind kind() const { return kind_; }
  MetricJet jet(const Vector& p, int order = 2) const;
  Matrix value(const Vector& p) const { return jet(p, 0).g; }
  const std::optional<JetFn>& generic() const { return generic_; }
  int order_loss() const { return order_loss_; }

 private:
  int dim_ = 0;
  Provider provider_;
  int max_order_ = 0;
  OracleKind kind_ = OracleKind::provided;
  std::optional<JetFn> generic_;
  int order_loss_ = 0;
};

MetricJet metric_jet_from(const FieldJet& packed, int dim);

// Covariant rank-2 tensor field. Derivatives come from the optional oracle,
// otherwise from central differences of the value closure.
class TensorField2 {
 public:
  using ValueFn = std::function<Matrix(const Vector&)>;
  using DerivativeFn = std::function<std::vector<Matrix>(const Vector&)>;

  TensorField2() = default;
  TensorField2(int dim, ValueFn value, bool symmetric, DerivativeFn derivative = {},
               double fd_step = 1e-4);
  int dim() const { return dim_; }
  bool symmetric() const { return symmetric_; }
  bool has_derivative_oracle() const { return static_cast<bool>(derivative_); }
  Matrix value(const Vector& p) const { return value_(p); }
  // d[k](i, j) = d_k T_ij
  std::vector<Matrix> derivative(const Vector& p) const;

 private:
  int dim_ = 0;
  ValueFn value_;
  bool symmetric_ = false;
  DerivativeFn derivative_;
  double fd_step_ = 1e-4;
};

// Central difference of a matrix-valued closure with step h * max(1, |p_k|).
std::vector<Matrix> central_difference(const std::function<Matrix(const Vector&)>& f,
                                       const Vector& p, double h);

}  // namespace rlab
