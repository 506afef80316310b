#include "rlab/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "rlab/errors.hpp"
#include "rlab/parallel.hpp"
#include "rlab/tensor.hpp"

namespace rlab {

using nlohmann::json;

ResidualReport ResidualReport::make(std::string label, std::string check,
                                    std::vector<double> residuals, double tolerance, json metadata) {
  ResidualReport r;
  r.label = std::move(label);
  r.check = std::move(check);
  r.tolerance = tolerance;
  r.metadata = std::move(metadata);
  double sum = 0.0;
  bool finite = true;
  for (double v : residuals) {
    if (!std::isfinite(v)) finite = false;
    r.max = std::max(r.max, v);
    sum += v;
  }
  r.mean = residuals.empty() ? 0.0 : sum / static_cast<double>(residuals.size());
  r.residuals = std::move(residuals);
  r.pass = finite && r.max <= tolerance;
  return r;
}

json to_json(const ResidualReport& r, bool with_points) {
  json j = {{"label", r.label},         {"check", r.check}, {"max", r.max},
            {"mean", r.mean},           {"tolerance", r.tolerance},
            {"pass", r.pass},           {"points", r.residuals.size()},
            {"metadata", r.metadata}};
  if (with_points) j["residuals"] = r.residuals;
  return j;
}

ResidualReport sample_residual(const std::string& label, const std::string& check, const Chart& chart,
                               const std::function<double(const Vector&)>& residual,
                               const SampleOptions& opts, json metadata) {
  const auto pts = chart.sample(opts.count, label_seed(label, opts.seed));
  auto values = parallel_map<double>(pts.size(), [&](std::size_t i) { return residual(pts[i]); });
  metadata["seed"] = opts.seed;
  metadata["chart"] = chart.label;
  return ResidualReport::make(label, check, std::move(values), opts.tolerance, std::move(metadata));
}

namespace {

Matrix outer(const Vector& w) { return w * w.transpose(); }

const VectorFieldSpec* vector_part(const SolitonData& d) { return d.x ? &*d.x : nullptr; }

Vector omega_at(const SolitonData& d, const Vector& p) {
  if (d.omega) return d.omega->value(p);
  if (d.xi) return d.xi->jet(p, 1).d1;
  throw UnsupportedError(d.geometry.name + ": soliton data carries neither omega nor xi");
}

}  // namespace

Matrix soliton_residual(const SolitonData& d, const Vector& p) {
  const MetricField& g = d.geometry.metric;
  const MetricJet gj = g.jet(p, 2);
  const Connection c = connection(gj, p);
  Matrix half_lie;
  if (const auto* x = vector_part(d)) {
    half_lie = 0.5 * lie_derivative_metric(x->jet(p, 1), gj);
  } else if (d.eta) {
    half_lie = hessian(d.eta->jet(p, 2), c.gamma);
  } else {
    throw UnsupportedError(d.geometry.name + ": soliton data carries neither X nor eta");
  }
  const double lambda = d.lambda_field ? d.lambda_field->value(p) : d.lambda;
  return ricci(c) + half_lie - lambda * gj.g - d.theta * outer(omega_at(d, p));
}

Matrix gradient_soliton_residual(const SolitonData& d, const Vector& p) {
  if (!d.eta || !d.xi) {
    throw UnsupportedError(d.geometry.name + ": gradient residual needs eta and xi");
  }
  const MetricJet gj = d.geometry.metric.jet(p, 2);
  const Connection c = connection(gj, p);
  const double lambda = d.lambda_field ? d.lambda_field->value(p) : d.lambda;
  const Vector dxi = d.xi->jet(p, 1).d1;
  return ricci(c) + hessian(d.eta->jet(p, 2), c.gamma) - lambda * gj.g - d.theta * outer(dxi);
}

Matrix du_identity_residual(const ScalarField& u, const MetricField& g, const Vector& p) {
  const Christoffel gam = christoffel(g, p);
  const ScalarJet uj = u.jet(p, 2);
  const ScalarJet u2 = square(u).jet(p, 2);
  return outer(uj.d1) - 0.5 * hessian(u2, gam) + uj.value * hessian(uj, gam);
}

double divergence_vector(const VectorFieldSpec& x, const MetricField& g, const Vector& p) {
  const VectorJet xj = x.jet(p, 1);
  const Christoffel gam = christoffel(g, p);
  double div = xj.d1.trace();
  for (int i = 0; i < xj.value.size(); ++i) {
    for (int k = 0; k < xj.value.size(); ++k) div += gam[static_cast<std::size_t>(i)](i, k) * xj.value[k];
  }
  return div;
}

double trace_identity_residual(const SolitonData& d, const Vector& p) {
  const MetricField& g = d.geometry.metric;
  const Connection c = connection(g.jet(p, 2), p);
  const double s = c.ginv.cwiseProduct(ricci(c)).sum();
  double div = 0.0;
  if (const auto* x = vector_part(d)) {
    div = divergence_vector(*x, g, p);
  } else if (d.eta) {
    div = c.ginv.cwiseProduct(hessian(d.eta->jet(p, 2), c.gamma)).sum();
  } else {
    throw UnsupportedError(d.geometry.name + ": soliton data carries neither X nor eta");
  }
  const double lambda = d.lambda_field ? d.lambda_field->value(p) : d.lambda;
  const Vector w = omega_at(d, p);
  return s + div - g.dim() * lambda - d.theta * norm_sq_covector(w, c.ginv);
}

Matrix ricci_structure_residual(const MetricField& g, double lambda, double theta,
                                const OneFormField& w, const Vector& p) {
  const MetricJet gj = g.jet(p, 2);
  return ricci(connection(gj, p)) - lambda * gj.g - theta * outer(w.value(p));
}

QuasiEinsteinPoint quasi_einstein_point(const ScalarField& h, double r, double lambda,
                                        const MetricField& g, const Vector& p) {
  const double n = r / 4.0;
  const ScalarField phi = 0.5 * h;
  const ScalarField f = exp((-1.0 / n) * phi);
  const ScalarField xi = (-n) * log(f);
  const ScalarField eta = phi + xi;

  const MetricJet gj = g.jet(p, 2);
  const Connection c = connection(gj, p);
  const Matrix ric = ricci(c);
  const ScalarJet hj = h.jet(p, 2);
  const ScalarJet fj = f.jet(p, 2);
  const ScalarJet xj = xi.jet(p, 2);
  if (!(fj.value > 0.0) || !std::isfinite(fj.value)) {
    throw ParameterError("f > 0 violated at a sample point");
  }

  QuasiEinsteinPoint q;
  q.f = fj.value;
  const Matrix nf_hess_f = (n / fj.value) * hessian(fj, c.gamma);
  q.qem = ric + hessian(hj, c.gamma) - (1.0 / r) * outer(hj.d1) - lambda * gj.g;
  q.hessian_type = ric + hessian(phi.jet(p, 2), c.gamma) - lambda * gj.g - nf_hess_f;
  q.aux = ric + hessian(eta.jet(p, 2), c.gamma) - lambda * gj.g - (1.0 / n) * outer(xj.d1);
  q.identity_gap = (nf_hess_f + hessian(xj, c.gamma) - (1.0 / n) * outer(xj.d1)).norm();
  return q;
}

QuasiEinsteinReport quasi_einstein_roundtrip(const ScalarField& h, double r, double lambda,
                                             const GeometrySpec& geo, const SampleOptions& opts) {
  if (!(r > 0.0)) throw ParameterError("r > 0 violated");
  const auto pts = geo.chart.sample(opts.count, label_seed(geo.name, opts.seed));
  const auto qs = parallel_map<QuasiEinsteinPoint>(
      pts.size(), [&](std::size_t i) { return quasi_einstein_point(h, r, lambda, geo.metric, pts[i]); });
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;
  QuasiEinsteinReport rep;
  for (const auto& q : qs) {
    a.push_back((q.qem - q.hessian_type).norm());
    b.push_back((q.hessian_type - q.aux).norm());
    c.push_back(q.identity_gap);
    rep.max_qem_residual = std::max(rep.max_qem_residual, q.qem.norm());
  }
  const json meta = {{"r", r}, {"n", r / 4.0}, {"lambda", lambda}, {"seed", opts.seed}};
  rep.qem_vs_hessian_type = ResidualReport::make(geo.name, "quasi-einstein vs ricci-hessian", a,
                                                 opts.tolerance, meta);
  rep.hessian_type_vs_aux = ResidualReport::make(geo.name, "ricci-hessian vs (eta, xi) form", b,
                                                 opts.tolerance, meta);
  rep.transform_identity = ResidualReport::make(geo.name, "(n/f) Hess f = -Hess xi + dxi dxi / n", c,
                                                opts.tolerance, meta);
  return rep;
}

json to_json(const IntegralCheck& c) {
  return {{"identity", c.identity}, {"lhs", c.lhs},           {"rhs", c.rhs},
          {"abs_gap", c.abs_gap},   {"rel_gap", c.rel_gap},   {"tolerance", c.tolerance},
          {"pass", c.pass},         {"order", c.order},       {"terms", c.terms}};
}

namespace {

IntegralCheck finish(std::string identity, double lhs, const std::vector<std::pair<std::string, double>>& terms,
                     double tolerance, int order, double extra_scale = 0.0) {
  IntegralCheck c;
  c.identity = std::move(identity);
  c.lhs = lhs;
  double scale = std::max(std::abs(lhs), extra_scale);
  double sum_abs = 0.0;
  for (const auto& [name, v] : terms) {
    c.rhs += v;
    sum_abs += std::abs(v);
    c.terms[name] = v;
  }
  scale = std::max(scale, sum_abs);
  c.abs_gap = std::abs(lhs - c.rhs);
  c.rel_gap = c.abs_gap / std::max(scale, 1.0);
  c.tolerance = tolerance;
  c.pass = std::isfinite(c.rel_gap) && c.rel_gap <= tolerance;
  c.order = order;
  return c;
}

void require_sphere(const GeometrySpec& g, const QuadratureRule& q) {
  if (g.name != "round-sphere" && g.name != "obata-sphere") {
    throw UnsupportedError(g.name + ": integral identities need a compact round-sphere geometry");
  }
  if (g.metric.dim() != q.m) throw DimensionError("quadrature rule and geometry dimensions differ");
}

}  // namespace

IntegralIdentityResult integral_identity_check(const SolitonData& d, const QuadratureRule& q,
                                               double tolerance) {
  require_sphere(d.geometry, q);
  const int m = q.m;
  const MetricField& g = d.geometry.metric;
  const double theta = d.theta;
  const bool has_xi = d.xi.has_value();
  // 0 |Ric0|^2, 1 <grad S, X>, 2 Ric0(w#, w#), 3 |Hess0 xi|^2, 4 (Delta xi)^2, 5 S/(m-1)|grad xi|^2
  const auto ints = integrate_many(q, 6, [&](const Vector& p) {
    const Connection c = connection(g.jet(p, 2), p);
    const Matrix ric = ricci(c);
    const double s = c.ginv.cwiseProduct(ric).sum();
    const Matrix ric0 = ric - (s / m) * c.g;
    const Vector ds = scalar_curvature_differential(g, p);
    Vector x;
    if (d.x) {
      x = d.x->value(p);
    } else if (d.eta) {
      x = c.ginv * d.eta->jet(p, 1).d1;
    } else {
      x = Vector::Zero(m);
    }
    const Vector wsharp = c.ginv * omega_at(d, p);
    std::vector<double> out{norm_sq_tensor(ric0, c.ginv), ds.dot(x), wsharp.dot(ric0 * wsharp), 0, 0, 0};
    if (has_xi) {
      const ScalarJet xj = d.xi->jet(p, 2);
      const Matrix hx = hessian(xj, c.gamma);
      const double lap = c.ginv.cwiseProduct(hx).sum();
      out[3] = norm_sq_tensor(hx - (lap / m) * c.g, c.ginv);
      out[4] = lap * lap;
      out[5] = s / (m - 1.0) * norm_sq_covector(xj.d1, c.ginv);
    }
    return out;
  });
  const double k = (m - 2.0) / (2.0 * m);
  IntegralIdentityResult r;
  r.general = finish("int |Ric0|^2 = (m-2)/(2m) int <grad S, X> + theta int Ric0(w#, w#)", ints[0],
                     {{"scalar_gradient", k * ints[1]}, {"omega", theta * ints[2]}}, tolerance, q.order);
  if (has_xi) {
    const double c4 = theta * (m - 1.0) / m;
    r.gradient = finish(
        "int |Ric0|^2 = (m-2)/(2m) int <grad S, X> - theta int |Hess0 xi|^2 + theta (m-1)/m int "
        "[(Delta xi)^2 - S/(m-1) |grad xi|^2]",
        ints[0],
        {{"scalar_gradient", k * ints[1]},
         {"traceless_hessian", -theta * ints[3]},
         {"laplacian_sq", c4 * ints[4]},
         {"gradient_sq", -c4 * ints[5]}},
        tolerance, q.order);
  } else {
    r.gradient.identity = "not applicable: no xi";
    r.gradient.pass = true;
  }
  return r;
}

IntegralCheck bochner_stokes_check(const ScalarField& u, const GeometrySpec& sphere,
                                   const QuadratureRule& q, double tolerance) {
  require_sphere(sphere, q);
  const int m = q.m;
  const MetricField& g = sphere.metric;
  // 0 Ric0(grad u, grad u), 1 |Hess0 u|^2, 2 (Delta u)^2, 3 S/(m-1) |grad u|^2
  const auto ints = integrate_many(q, 4, [&](const Vector& p) {
    const Connection c = connection(g.jet(p, 2), p);
    const Matrix ric = ricci(c);
    const double s = c.ginv.cwiseProduct(ric).sum();
    const ScalarJet uj = u.jet(p, 2);
    const Vector grad = c.ginv * uj.d1;
    const Matrix hu = hessian(uj, c.gamma);
    const double lap = c.ginv.cwiseProduct(hu).sum();
    return std::vector<double>{grad.dot((ric - (s / m) * c.g) * grad),
                               norm_sq_tensor(hu - (lap / m) * c.g, c.ginv), lap * lap,
                               s / (m - 1.0) * grad.dot(c.g * grad)};
  });
  const double k = (m - 1.0) / m;
  return finish("int [Ric0(grad u, grad u) + |Hess0 u|^2] = (m-1)/m int [(Delta u)^2 - S/(m-1) |grad u|^2]",
                ints[0] + ints[1], {{"laplacian_sq", k * ints[2]}, {"gradient_sq", -k * ints[3]}},
                tolerance, q.order, std::abs(ints[0]) + std::abs(ints[1]));
}

IntegralCheck volume_calibration(const QuadratureRule& q, double tolerance) {
  const double vol = sphere_volume(q.m, q.radius);
  IntegralCheck c = finish("int 1 = Vol(S^m)", q.weight_sum(), {{"volume", vol}}, tolerance, q.order);
  return c;
}

IntegralCheck height_calibration(const QuadratureRule& q, const std::vector<double>& v,
                                 double tolerance) {
  const ScalarField h = height_function(q.m, q.radius, v);
  double v2 = 0.0;
  for (double x : v) v2 += x * x;
  const double expect = v2 * std::pow(q.radius, 2) * sphere_volume(q.m, q.radius) / (q.m + 1.0);
  const double got = integrate(q, [&h](const Vector& p) {
    const double x = h.value(p);
    return x * x;
  });
  return finish("int h_v^2 = |v|^2 r^2 Vol/(m+1)", got, {{"expected", expect}}, tolerance, q.order);
}

json to_json(const EigenCheck& c) {
  return {{"alpha", c.alpha},
          {"s_over_m1", c.s_over_m1},
          {"eigen_residual", c.eigen_residual},
          {"eigenfunction", c.eigenfunction},
          {"alpha_gap", c.alpha_gap},
          {"obata_residual", c.obata_residual},
          {"shifted", c.shifted},
          {"pass", c.pass},
          {"convention", c.convention}};
}

EigenCheck eigen_equality_check(const ScalarField& xi, double c1, const GeometrySpec& sphere,
                                const SampleOptions& opts) {
  if (sphere.name != "round-sphere" && sphere.name != "obata-sphere") {
    throw UnsupportedError(sphere.name + ": eigenvalue check needs the unit round sphere");
  }
  const int m = sphere.metric.dim();
  const ScalarField f = xi + ScalarField::constant(m, -c1);
  const MetricField& g = sphere.metric;
  const auto pts = sphere.chart.sample(opts.count, label_seed(sphere.name + "/eigen", opts.seed));
  struct Row {
    double f, lap, s;
    Matrix hess, g;
  };
  const auto rows = parallel_map<Row>(pts.size(), [&](std::size_t i) {
    const Connection c = connection(g.jet(pts[i], 2), pts[i]);
    const ScalarJet fj = f.jet(pts[i], 2);
    const Matrix h = hessian(fj, c.gamma);
    return Row{fj.value, c.ginv.cwiseProduct(h).sum(), c.ginv.cwiseProduct(ricci(c)).sum(), h, c.g};
  });
  double num = 0.0;
  double den = 0.0;
  double fmax = 0.0;
  double s_mean = 0.0;
  for (const Row& r : rows) {
    num -= r.lap * r.f;
    den += r.f * r.f;
    fmax = std::max(fmax, std::abs(r.f));
    s_mean += r.s;
  }
  s_mean /= static_cast<double>(rows.size());
  EigenCheck e;
  e.alpha = den > 0.0 ? num / den : 0.0;
  e.s_over_m1 = s_mean / (m - 1.0);
  double res = 0.0;
  for (const Row& r : rows) {
    res = std::max(res, std::abs(r.lap + e.alpha * r.f));
    e.obata_residual =
        std::max(e.obata_residual, (r.hess + (r.s * r.f / (m * (m - 1.0))) * r.g).norm());
  }
  e.eigen_residual = fmax > 0.0 ? res / fmax : res;
  e.eigenfunction = fmax > 0.0 && e.eigen_residual <= opts.tolerance;
  e.alpha_gap = std::abs(e.alpha - e.s_over_m1);
  e.shifted = c1 != 0.0;
  e.pass = e.eigenfunction && e.alpha_gap <= 1e-10 && e.obata_residual <= opts.tolerance;
  return e;
}

std::pair<Matrix, Matrix> obata_psi_gap(const SolitonData& d, const Vector& p) {
  if (!d.eta || !d.lambda_field) throw UnsupportedError("obata data needs eta and lambda");
  const int m = d.geometry.metric.dim();
  const double theta = d.theta;
  const double c1 = d.geometry.params.get("c1", 0.0);
  const ScalarField& hv = d.geometry.scalars.at("h_v");
  const ScalarField inner = ScalarField::constant(m, c1) + (-1.0 / m) * hv;
  const ScalarField psi = *d.eta + (-0.5 * theta) * square(inner);
  const Connection c = connection(d.geometry.metric.jet(p, 1), p);
  const double h = hv.value(p) / m;
  const double mu = d.lambda_field->value(p) + theta * (h - c1) * h - (m - 1.0);
  const Matrix gap = hessian(psi.jet(p, 2), c.gamma) - mu * c.g;
  return {gap, traceless(gap, c.g)};
}

json to_json(const RicciBound& r) {
  return {{"min_ricci", r.min_ricci}, {"lambda", r.lambda},
          {"c1", r.c1},               {"c2", r.c2},
          {"max_x_norm", r.max_x_norm}, {"diameter_bound", r.diameter_bound},
          {"samples", r.samples},     {"pass", r.pass}};
}

RicciBound ricci_lower_bound_and_diameter(double kappa, double tau, std::size_t count,
                                          std::uint64_t seed) {
  if (!(4.0 * tau * tau >= kappa)) {
    throw ParameterError("branch 4 tau^2 >= kappa violated (theta >= 0 decomposition)");
  }
  if (!(kappa > 2.0 * tau * tau)) throw ParameterError("branch kappa > 2 tau^2 violated (c2 > 0)");
  const GeometrySpec b = berger_sphere(kappa, tau);
  const auto pts = b.chart.sample(count, label_seed("berger-bound", seed));
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0; };
  std::vector<Vector> dirs;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Vector u(3);
    for (int k = 0; k < 3; ++k) u[k] = uniform();
    if (u.norm() == 0.0) u[0] = 1.0;
    dirs.push_back(u);
  }
  const VectorFieldSpec& e3 = b.vectors.at("E3");
  struct Row {
    double ric_uu, x_norm;
  };
  const auto rows = parallel_map<Row>(pts.size(), [&](std::size_t i) {
    const Matrix g = b.metric.value(pts[i]);
    const Matrix ric = ricci(b.metric, pts[i]);
    const Vector u = dirs[i] / std::sqrt(norm_sq_vector(dirs[i], g));
    return Row{u.dot(ric * u), std::sqrt(norm_sq_vector(e3.value(pts[i]), g))};
  });
  RicciBound r;
  r.lambda = kappa - 2.0 * tau * tau;
  r.c2 = r.lambda;
  r.c1 = 1.0;
  r.min_ricci = std::numeric_limits<double>::infinity();
  for (const Row& row : rows) {
    r.min_ricci = std::min(r.min_ricci, row.ric_uu);
    r.max_x_norm = std::max(r.max_x_norm, row.x_norm);
  }
  r.samples = rows.size();
  r.diameter_bound = std::numbers::pi / r.c2 * (r.c1 + std::sqrt(r.c1 * r.c1 + 2.0 * r.c2));
  r.pass = r.min_ricci >= r.lambda - 1e-8 && std::abs(r.max_x_norm - 1.0) <= 1e-10;
  return r;
}

}  // namespace rlab
