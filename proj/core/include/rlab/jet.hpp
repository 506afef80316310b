#pragma once

// Truncated multivariate Taylor polynomials for forward-mode differentiation.
//
// A Jet holds the Taylor coefficients c_a = (d^a f)(p) / a! of a function
// around a point p for every multi-index a with |a| <= order. Arithmetic and
// the elementary functions act on the truncated series, so evaluating a
// generic closure on seeded jets yields exact derivatives up to `order`
// (exact up to round-off, no step size involved).

#include <boost/container/small_vector.hpp>

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace rlab {

class JetLayout {
 public:
  static constexpr int kMaxOrder = 4;

  // Immutable layout for `vars` variables up to kMaxOrder; cached for the
  // lifetime of the process.
  static const JetLayout* get(int vars);

  explicit JetLayout(int vars);

  int vars() const { return vars_; }
  // Number of monomials of degree <= order (monomials are graded).
  std::size_t size_upto(int order) const { return size_upto_[order]; }
  int degree(std::size_t idx) const { return degree_[idx]; }
  const std::vector<int>& exponent(std::size_t idx) const { return exponents_[idx]; }
  std::size_t index_of(const std::vector<int>& exponent) const;
  std::size_t unit(int var) const { return 1 + static_cast<std::size_t>(var); }
  // Index of the monomial x_k x_l.
  std::size_t pair(int k, int l) const {
    return pair_[static_cast<std::size_t>(k * vars_ + l)];
  }

  struct Product {
    std::size_t lhs, rhs, out;
  };
  // Products whose output degree is <= order form a prefix of this list.
  std::span<const Product> products(int order) const {
    return {products_.data(), product_count_[order]};
  }

  struct Shift {
    std::size_t src, dst;
    double factor;
  };
  // Coefficient map of d/dx_var restricted to outputs of degree <= order.
  std::span<const Shift> derivative(int var, int order) const {
    return {derivative_[var].data(), derivative_count_[var][order]};
  }

 private:
  int vars_;
  std::vector<std::vector<int>> exponents_;
  std::vector<int> degree_;
  std::vector<std::size_t> size_upto_;
  std::vector<std::size_t> pair_;
  std::vector<Product> products_;
  std::vector<std::size_t> product_count_;
  std::vector<std::vector<Shift>> derivative_;
  std::vector<std::vector<std::size_t>> derivative_count_;
};

class Jet {
 public:
  // Taylor coefficients f^(k)(a)/k! of a univariate function.
  using Series = std::array<double, JetLayout::kMaxOrder + 1>;

  Jet(double value = 0.0) : c_{value} {}  // NOLINT: implicit constant promotion

  // x_var seeded at `value` with unit first derivative, truncated at `order`.
  static Jet variable(const JetLayout* layout, int order, int var, double value);

  bool is_constant() const { return layout_ == nullptr; }
  int order() const { return order_; }
  int vars() const { return layout_ ? layout_->vars() : 0; }
  const JetLayout* layout() const { return layout_; }

  double value() const { return c_[0]; }
  // Partial derivatives at the expansion point; zero when outside the order.
  double derivative(int k) const;
  double second_derivative(int k, int l) const;
  double coefficient(const std::vector<int>& exponent) const;

  // Partial derivative as a jet of one lower order.
  Jet d(int var) const;
  Jet truncated(int order) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator-(Jet a);

  friend Jet exp(const Jet& x);
  friend Jet log(const Jet& x);
  friend Jet sqrt(const Jet& x);
  friend Jet pow(const Jet& x, double p);
  friend Jet sin(const Jet& x);
  friend Jet cos(const Jet& x);
  friend Jet reciprocal(const Jet& x);

 private:
  // Evaluates sum_k series[k] * (x - x(p))^k with truncated products.
  static Jet compose(const Jet& x, const Series& series);
  void align(const Jet& o);

  const JetLayout* layout_ = nullptr;
  int order_ = 0;
  boost::container::small_vector<double, 20> c_;
};

Jet square(const Jet& x);

using JetVec = std::vector<Jet>;
// Generic component closure: dim_in jets in, dim_out jets out.
using JetFn = std::function<JetVec(const JetVec&)>;

// Seeds x_i = p_i + dx_i as jets of the given order (constants when order 0).
JetVec seed_point(std::span<const double> p, int order);

}  // namespace rlab
