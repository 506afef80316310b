#include "rlab/catalog.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "rlab/errors.hpp"
#include "rlab/tensor.hpp"

namespace rlab {

Params& Params::set(const std::string& key, double value) {
  scalars_[key] = value;
  return *this;
}

Params& Params::set(const std::string& key, std::vector<double> value) {
  vectors_[key] = std::move(value);
  return *this;
}

bool Params::has(const std::string& key) const {
  return scalars_.count(key) || vectors_.count(key);
}

double Params::get(const std::string& key) const {
  auto it = scalars_.find(key);
  if (it == scalars_.end()) throw ParameterError("missing parameter '" + key + "'");
  return it->second;
}

double Params::get(const std::string& key, double fallback) const {
  auto it = scalars_.find(key);
  return it == scalars_.end() ? fallback : it->second;
}

int Params::get_int(const std::string& key, int fallback) const {
  const double v = get(key, static_cast<double>(fallback));
  if (v != std::round(v)) throw ParameterError("parameter '" + key + "' must be an integer");
  return static_cast<int>(v);
}

std::vector<double> Params::vec(const std::string& key) const {
  auto it = vectors_.find(key);
  if (it == vectors_.end()) throw ParameterError("missing vector parameter '" + key + "'");
  return it->second;
}

std::vector<double> Params::vec(const std::string& key, std::vector<double> fallback) const {
  auto it = vectors_.find(key);
  return it == vectors_.end() ? fallback : it->second;
}

std::string to_string(SolitonKind kind) {
  switch (kind) {
    case SolitonKind::soliton:
      return "soliton";
    case SolitonKind::almost_soliton:
      return "almost-soliton";
    case SolitonKind::gradient:
      return "gradient";
  }
  return "unknown";
}

ScalarField SolitonData::lambda_as_field() const {
  if (lambda_field) return *lambda_field;
  return ScalarField::constant(geometry.metric.dim(), lambda);
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void require(bool ok, const std::string& inequality) {
  if (!ok) throw ParameterError(inequality + " violated");
}

Vector filled(int n, double v) { return Vector::Constant(n, v); }

JetVec diag_metric(int m, const std::vector<Jet>& d) {
  JetVec g(static_cast<std::size_t>(m * m), Jet(0.0));
  for (int i = 0; i < m; ++i) g[static_cast<std::size_t>(i * m + i)] = d[static_cast<std::size_t>(i)];
  return g;
}

std::vector<double> unit_check(std::vector<double> v, int size, const std::string& name) {
  if (static_cast<int>(v.size()) != size) {
    throw ParameterError(name + " must have " + std::to_string(size) + " components");
  }
  double n2 = 0.0;
  for (double x : v) n2 += x * x;
  require(std::abs(std::sqrt(n2) - 1.0) <= 1e-9, "|" + name + "| = 1");
  return v;
}

std::vector<double> e_last(int size) {
  std::vector<double> v(static_cast<std::size_t>(size), 0.0);
  v.back() = 1.0;
  return v;
}

}  // namespace

JetVec stereographic_embedding(const JetVec& x, double r) {
  Jet s(0.0);
  for (const Jet& xi : x) s += xi * xi;
  const Jet denom = reciprocal(r * r + s);
  JetVec y;
  for (const Jet& xi : x) y.push_back(2.0 * r * r * xi * denom);
  y.push_back(r * (r * r - s) * denom);
  return y;
}

ScalarField height_function(int m, double r, const std::vector<double>& v) {
  if (static_cast<int>(v.size()) != m + 1) {
    throw ParameterError("height direction must have m + 1 = " + std::to_string(m + 1) +
                         " components");
  }
  return ScalarField::analytic(
      m,
      [v, r](const JetVec& x) {
        const JetVec y = stereographic_embedding(x, r);
        Jet h(0.0);
        for (std::size_t i = 0; i < y.size(); ++i) {
          if (v[i] != 0.0) h += v[i] * y[i];
        }
        return h;
      },
      "h_v");
}

GeometrySpec euclidean(int m) {
  require(m >= 1, "m >= 1");
  GeometrySpec g;
  g.name = "euclidean";
  g.chart = box_chart("R^" + std::to_string(m), filled(m, -2.0), filled(m, 2.0));
  g.metric = MetricField::euclidean(m);
  g.params.set("m", m);
  return g;
}

GeometrySpec hyperbolic_warped(int m) {
  require(m >= 2, "m >= 2");
  GeometrySpec g;
  g.name = "hyperbolic-warped";
  g.chart = box_chart("R^" + std::to_string(m), filled(m, -2.0), filled(m, 2.0));
  g.metric = MetricField::analytic(m, [m](const JetVec& x) {
    std::vector<Jet> d(static_cast<std::size_t>(m), exp(2.0 * x[0]));
    d[0] = Jet(1.0);
    return diag_metric(m, d);
  });
  g.params.set("m", m);
  return g;
}

GeometrySpec round_sphere(int m, double r) {
  require(m >= 1, "m >= 1");
  require(r > 0.0, "r > 0");
  GeometrySpec g;
  g.name = "round-sphere";
  g.chart = box_chart("stereographic", filled(m, -2.0 * r), filled(m, 2.0 * r));
  g.metric = MetricField::analytic(m, [m, r](const JetVec& x) {
    Jet s(0.0);
    for (const Jet& xi : x) s += xi * xi;
    const Jet f = 4.0 * std::pow(r, 4) * reciprocal(square(r * r + s));
    return diag_metric(m, std::vector<Jet>(static_cast<std::size_t>(m), f));
  });
  g.scalars.emplace("h_v", height_function(m, r, e_last(m + 1)));
  g.params.set("m", m).set("r", r);
  return g;
}

GeometrySpec berger_sphere(double kappa, double tau) {
  require(kappa > 0.0, "kappa > 0 (kappa = " + fmt(kappa) + ")");
  require(tau != 0.0, "tau != 0");
  GeometrySpec g;
  g.name = "berger-sphere";
  Vector lo(3);
  Vector hi(3);
  lo << 0.0, 0.0, 0.0;
  hi << std::numbers::pi / 2, 2 * std::numbers::pi, 2 * std::numbers::pi;
  g.chart = box_chart("hopf", lo, hi);
  g.chart.domain = [](const Vector& p) { return p[0] > 0.0 && p[0] < std::numbers::pi / 2; };
  const double s = 4.0 / kappa;
  const double k = 4.0 * tau * tau / kappa - 1.0;
  g.metric = MetricField::analytic(3, [s, k](const JetVec& x) {
    const Jet c2 = square(cos(x[0]));
    const Jet s2 = square(sin(x[0]));
    JetVec out(9, Jet(0.0));
    out[0] = Jet(s);
    out[4] = s * (c2 + k * c2 * c2);
    out[5] = s * k * c2 * s2;
    out[7] = out[5];
    out[8] = s * (s2 + k * s2 * s2);
    return out;
  });
  g.vectors.emplace("V", VectorFieldSpec::analytic(3, [](const JetVec&) {
    return JetVec{Jet(0.0), Jet(1.0), Jet(1.0)};
  }, "V"));
  const double e = kappa / (4.0 * tau);
  g.vectors.emplace("E3", VectorFieldSpec::analytic(3, [e](const JetVec&) {
    return JetVec{Jet(0.0), Jet(e), Jet(e)};
  }, "E3"));
  // E3 flat = (4 tau / kappa) V_round flat
  const double f = 4.0 * tau / kappa;
  g.oneforms.emplace("E3_flat", OneFormField::analytic(3, [f](const JetVec& x) {
    return JetVec{Jet(0.0), f * square(cos(x[0])), f * square(sin(x[0]))};
  }, "E3_flat"));
  g.params.set("kappa", kappa).set("tau", tau);
  return g;
}

GeometrySpec punctured_euclidean(int n, const std::vector<double>& a, double theta,
                                 double lambda) {
  require(n >= 1, "n >= 1");
  require(static_cast<int>(a.size()) == n, "len(a) = n");
  for (double ai : a) require(ai > 0.0, "a_gamma > 0");
  GeometrySpec g;
  g.name = "punctured-euclidean";
  Vector lo(n);
  Vector hi(n);
  for (int i = 0; i < n; ++i) {
    lo[i] = a[static_cast<std::size_t>(i)];
    hi[i] = a[static_cast<std::size_t>(i)] + 10.0;
  }
  g.chart = box_chart("R^" + std::to_string(n) + " minus a", lo, hi);
  g.chart.domain = [a](const Vector& y) {
    for (int i = 0; i < y.size(); ++i) {
      if (!(y[i] > a[static_cast<std::size_t>(i)])) return false;
    }
    return true;
  };
  g.metric = MetricField::euclidean(n);
  const double c = -1.0 / (n * theta * lambda);
  g.oneforms.emplace("omega_N", OneFormField::analytic(n, [a, c](const JetVec& y) {
    JetVec out;
    for (std::size_t i = 0; i < y.size(); ++i) out.push_back(c * reciprocal(y[i] - a[i]));
    return out;
  }, "omega_N"));
  g.params.set("n", n).set("a", a);
  return g;
}

SolitonData euclidean_trivial(int m) {
  SolitonData d;
  d.geometry = euclidean(m);
  d.kind = SolitonKind::soliton;
  d.x = VectorFieldSpec::zero(m);
  d.omega = OneFormField::zero(m);
  d.lambda = 0.0;
  d.theta = 0.0;
  return d;
}

SolitonData berger_soliton(double kappa, double tau) {
  require(4.0 * tau * tau > kappa, "4 tau^2 > kappa (theta > 0)");
  SolitonData d;
  d.geometry = berger_sphere(kappa, tau);
  d.kind = SolitonKind::soliton;
  d.x = d.geometry.vectors.at("E3");
  d.omega = d.geometry.oneforms.at("E3_flat");
  d.lambda = kappa - 2.0 * tau * tau;
  d.theta = 4.0 * tau * tau - kappa;
  return d;
}

VectorFieldSpec warped_soliton_field(int m, double lambda) {
  return VectorFieldSpec::analytic(
      m,
      [m, lambda](const JetVec& x) {
        JetVec v{Jet(m - lambda - 1.0)};
        for (int i = 1; i < m; ++i) v.push_back(2.0 * lambda * x[static_cast<std::size_t>(i)]);
        return v;
      },
      "X");
}

SolitonData warped_soliton(int m, double lambda, const std::vector<double>& a,
                           const std::vector<double>& b) {
  require(m >= 2, "m >= 2");
  require(lambda < 1.0 - m, "lambda < 1 - m (lambda = " + fmt(lambda) + ", m = " + std::to_string(m) + ")");
  require(!a.empty() && a.size() == b.size(), "len(a) = len(b) = n >= 1");
  for (double v : a) require(v > 0.0, "a_gamma > 0");
  for (double v : b) require(v > 0.0, "b_gamma > 0");
  const int n = static_cast<int>(a.size());
  const double theta = 1.0 / (1.0 - lambda - m);

  SolitonData d;
  d.geometry = hyperbolic_warped(m);
  d.geometry.name = "warped-soliton";
  d.geometry.params.set("lambda", lambda).set("n", n).set("a", a).set("b", b);
  d.kind = SolitonKind::soliton;
  d.x = warped_soliton_field(m, lambda);
  d.omega = OneFormField::analytic(m, [m, theta](const JetVec&) {
    JetVec w(static_cast<std::size_t>(m), Jet(0.0));
    w[0] = Jet(1.0 / theta);
    return w;
  }, "omega");
  d.lambda = lambda;
  d.theta = theta;
  d.phi = SmoothMap::analytic(m, n, [a, b, lambda](const JetVec& x) {
    const Jet e = exp(-lambda * x[0]);
    JetVec y;
    for (std::size_t i = 0; i < a.size(); ++i) y.push_back(b[i] * e + a[i]);
    return y;
  }, "phi");
  d.target = punctured_euclidean(n, a, theta, lambda);
  return d;
}

SolitonData obata_sphere(int m, double theta, double c1, double c2, const std::vector<double>& v,
                         const std::vector<double>& w) {
  require(m >= 2, "m >= 2");
  const auto vv = unit_check(v, m + 1, "v");
  const auto ww = unit_check(w, m + 1, "w");
  SolitonData d;
  d.geometry = round_sphere(m, 1.0);
  d.geometry.name = "obata-sphere";
  d.geometry.params.set("theta", theta).set("c1", c1).set("c2", c2).set("v", vv).set("w", ww);
  const ScalarField hv = height_function(m, 1.0, vv);
  const ScalarField hw = height_function(m, 1.0, ww);
  d.geometry.scalars["h_v"] = hv;
  d.geometry.scalars["h_w"] = hw;
  const double inv_m = 1.0 / m;
  d.kind = SolitonKind::gradient;
  d.xi = ScalarField::constant(m, c1) + (-inv_m) * hv;
  d.eta = (0.5 * theta) * square(*d.xi) + (-inv_m) * hw + ScalarField::constant(m, c2);
  d.lambda_field = theta * (*d.xi * (inv_m * hv)) + inv_m * hw + ScalarField::constant(m, m - 1.0);
  d.omega = OneFormField::differential(*d.xi);
  d.theta = theta;
  d.lambda = m - 1.0;
  return d;
}

NonGradientWitness non_gradient_witness(int m, double lambda) {
  require(m >= 2, "m >= 2");
  require(lambda != 0.0, "lambda != 0");
  NonGradientWitness w;
  w.flat = euclidean(m);
  w.warped = hyperbolic_warped(m);
  w.x = warped_soliton_field(m, lambda);
  w.u = ScalarField::analytic(m, [m, lambda](const JetVec& x) {
    Jet s(0.0);
    for (int i = 1; i < m; ++i) s += square(x[static_cast<std::size_t>(i)]);
    return (m - lambda - 1.0) * x[0] + lambda * s;
  }, "u");
  w.x_flat_warped = flat_field(w.x, w.warped.metric);
  w.lambda = lambda;
  return w;
}

std::vector<std::string> catalog_names() {
  return {"euclidean",      "euclidean-trivial", "hyperbolic-warped",
          "round-sphere",   "berger-sphere",     "punctured-euclidean",
          "berger-soliton", "warped-soliton",    "obata-sphere",
          "non-gradient-witness"};
}

CatalogEntry build(const std::string& name, const Params& p) {
  auto ab = [&](int n, const std::string& key) {
    return p.vec(key, std::vector<double>(static_cast<std::size_t>(n), 1.0));
  };
  CatalogEntry out;
  if (name == "euclidean") {
    out = euclidean(p.get_int("m", 3));
  } else if (name == "euclidean-trivial") {
    out = euclidean_trivial(p.get_int("m", 3));
  } else if (name == "hyperbolic-warped") {
    out = hyperbolic_warped(p.get_int("m", 2));
  } else if (name == "round-sphere") {
    out = round_sphere(p.get_int("m", 2), p.get("r", 1.0));
  } else if (name == "berger-sphere") {
    out = berger_sphere(p.get("kappa", 9.0), p.get("tau", 2.0));
  } else if (name == "punctured-euclidean") {
    const int n = p.get_int("n", 1);
    out = punctured_euclidean(n, ab(n, "a"), p.get("theta", 1.0), p.get("lambda", -2.0));
  } else if (name == "berger-soliton") {
    out = berger_soliton(p.get("kappa", 9.0), p.get("tau", 2.0));
  } else if (name == "warped-soliton") {
    const int n = p.get_int("n", 1);
    out = warped_soliton(p.get_int("m", 2), p.get("lambda", -2.0), ab(n, "a"), ab(n, "b"));
  } else if (name == "obata-sphere") {
    const int m = p.get_int("m", 2);
    out = obata_sphere(m, p.get("theta", 1.0), p.get("c1", 0.0), p.get("c2", 0.0),
                       p.vec("v", e_last(m + 1)), p.vec("w", e_last(m + 1)));
  } else if (name == "non-gradient-witness") {
    out = non_gradient_witness(p.get_int("m", 2), p.get("lambda", -2.0));
  } else {
    throw UnsupportedError("unknown catalog entry '" + name + "'");
  }
  std::visit(
      [](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, GeometrySpec>) {
          check_geometry(e);
        } else if constexpr (std::is_same_v<T, SolitonData>) {
          check_geometry(e.geometry);
          if (e.target) check_geometry(*e.target);
        } else {
          check_geometry(e.flat);
          check_geometry(e.warped);
        }
      },
      out);
  return out;
}

void check_geometry(const GeometrySpec& g, std::size_t count, std::uint64_t seed) {
  const auto pts = g.chart.sample(count, label_seed(g.name, seed));
  if (pts.size() < count) throw ParameterError(g.name + ": chart domain too small to sample");
  for (const Vector& p : pts) {
    if (!g.chart.contains(p)) throw ParameterError(g.name + ": sample outside chart domain");
    const Matrix m = g.metric.value(p);
    if (!m.allFinite()) throw ParameterError(g.name + ": metric not finite");
    if ((m - m.transpose()).norm() != 0.0) throw ParameterError(g.name + ": metric not symmetric");
    inverse_metric(m, p);
  }
}

std::uint64_t label_seed(const std::string& label, std::uint64_t seed) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h ^ (seed * 0x9E3779B97F4A7C15ULL);
}

}  // namespace rlab
