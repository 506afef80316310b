#pragma once

// Product quadrature on S^2 and S^3, with nodes mapped into the
// stereographic chart used by round_sphere().
//
//   S^2: Gauss-Legendre in cos(polar) x trapezoid in azimuth (2n points).
//   S^3: Hopf coordinates, Gauss-Legendre in u = sin^2(eta) x trapezoid^2 in
//        the two fibre angles (n points each); dV = 1/2 du dxi1 dxi2.

#include <functional>
#include <utility>
#include <vector>

#include "rlab/fields.hpp"

namespace rlab {

// Nodes and weights on [-1, 1], Newton iteration on P_n.
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

double sphere_volume(int m, double r = 1.0);

struct QuadratureRule {
  int m = 0;
  int order = 0;
  double radius = 1.0;
  std::vector<Vector> nodes;  // stereographic chart coordinates
  std::vector<double> weights;
  double weight_sum() const;
};

// Only m = 2 and m = 3 are available; others throw UnsupportedError.
QuadratureRule sphere_rule(int m, int order, double r = 1.0);

// Sum of w_i f(x_i), evaluated in parallel and summed in node order.
double integrate(const QuadratureRule& q, const std::function<double(const Vector&)>& f);
// Several integrands sharing one evaluation per node.
std::vector<double> integrate_many(const QuadratureRule& q, std::size_t count,
                                   const std::function<std::vector<double>(const Vector&)>& f);

}  // namespace rlab
