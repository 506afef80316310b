#include "rlab/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "rlab/errors.hpp"
#include "rlab/parallel.hpp"

namespace rlab {

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  if (n < 1) throw ParameterError("quadrature order >= 1 violated");
  std::vector<double> x(static_cast<std::size_t>(n));
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = -z;
    x[static_cast<std::size_t>(n - 1 - i)] = z;
    const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
    w[static_cast<std::size_t>(i)] = wi;
    w[static_cast<std::size_t>(n - 1 - i)] = wi;
  }
  return {x, w};
}

double sphere_volume(int m, double r) {
  // 2 pi^{(m+1)/2} / Gamma((m+1)/2) r^m
  return 2.0 * std::pow(std::numbers::pi, 0.5 * (m + 1)) / std::tgamma(0.5 * (m + 1)) *
         std::pow(r, m);
}

double QuadratureRule::weight_sum() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

namespace {

Vector to_chart(const std::vector<double>& y, double r) {
  // inverse of Y(x) = (2 r^2 x, r (r^2 - |x|^2)) / (r^2 + |x|^2) on the radius-r sphere
  const int m = static_cast<int>(y.size()) - 1;
  Vector x(m);
  const double denom = r + y.back();
  for (int i = 0; i < m; ++i) x[i] = r * y[static_cast<std::size_t>(i)] / denom;
  return x;
}

}  // namespace

QuadratureRule sphere_rule(int m, int order, double r) {
  if (m != 2 && m != 3) {
    throw UnsupportedError("sphere quadrature is available for m = 2 and m = 3 only");
  }
  const auto [gx, gw] = gauss_legendre(order);
  // S^2: 2n azimuths; S^3: n per Hopf angle (trapezoid exact below that degree)
  const int na = m == 2 ? 2 * order : order;
  const double da = 2.0 * std::numbers::pi / na;
  QuadratureRule q;
  q.m = m;
  q.order = order;
  q.radius = r;
  const double rm = std::pow(r, m);
  if (m == 2) {
    for (int i = 0; i < order; ++i) {
      const double z = gx[static_cast<std::size_t>(i)];
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      for (int j = 0; j < na; ++j) {
        const double ph = (j + 0.5) * da;
        q.nodes.push_back(to_chart({r * s * std::cos(ph), r * s * std::sin(ph), r * z}, r));
        q.weights.push_back(rm * gw[static_cast<std::size_t>(i)] * da);
      }
    }
  } else {
    for (int i = 0; i < order; ++i) {
      const double u = 0.5 * (gx[static_cast<std::size_t>(i)] + 1.0);
      const double wu = 0.5 * gw[static_cast<std::size_t>(i)];
      const double ce = std::sqrt(1.0 - u);
      const double se = std::sqrt(u);
      for (int j = 0; j < na; ++j) {
        const double a1 = (j + 0.5) * da;
        for (int k = 0; k < na; ++k) {
          const double a2 = (k + 0.5) * da;
          q.nodes.push_back(to_chart({r * ce * std::cos(a1), r * ce * std::sin(a1),
                                      r * se * std::cos(a2), r * se * std::sin(a2)},
                                     r));
          q.weights.push_back(rm * 0.5 * wu * da * da);
        }
      }
    }
  }
  return q;
}

double integrate(const QuadratureRule& q, const std::function<double(const Vector&)>& f) {
  return integrate_many(q, 1, [&f](const Vector& x) { return std::vector<double>{f(x)}; })[0];
}

std::vector<double> integrate_many(const QuadratureRule& q, std::size_t count,
                                   const std::function<std::vector<double>(const Vector&)>& f) {
  const auto values =
      parallel_map<std::vector<double>>(q.nodes.size(), [&](std::size_t i) { return f(q.nodes[i]); });
  std::vector<double> sums(count, 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].size() != count) throw DimensionError("integrand returned wrong arity");
    for (std::size_t c = 0; c < count; ++c) sums[c] += q.weights[i] * values[i][c];
  }
  return sums;
}

}  // namespace rlab
