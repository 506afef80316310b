#include "rlab/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "rlab/errors.hpp"
#include "rlab/parallel.hpp"
#include "rlab/tensor.hpp"

namespace rlab {

using json = nlohmann::json;

Matrix flow_rhs(const MetricField& g, const OneFormField& w, double theta, const Vector& p) {
  const Vector wp = w.value(p);
  return -2.0 * ricci(g, p) + 2.0 * theta * wp * wp.transpose();
}

Vector map_rhs(const SmoothMap& phi, const MetricField& g, const MetricField& h, const Vector& p) {
  return tension_field(phi, g, h, p);
}

DeturckRhs deturck_rhs(const MetricField& gt, const OneFormField& wt, double theta,
                       const SmoothMap& phit, const MetricField& gb, const MetricField& h,
                       const Vector& p) {
  const MetricJet gj = gt.jet(p, 2);
  const VectorJet z = deturck_field(gj, gb.jet(p, 2), p);
  DeturckRhs r;
  r.z = z.value;
  r.metric = flow_rhs(gt, wt, theta, p) - lie_derivative_metric(z, gj);
  const FieldJet fj = phit.jet(p, 1);
  r.map = map_rhs(phit, gt, h, p) - Vector(fj.d1 * z.value);
  return r;
}

Vector tension_naturality_check(const SmoothMap& phi, const MetricField& g, const MetricField& h,
                                const SmoothMap& psi, const Vector& p) {
  const Vector lhs = tension_field(compose(phi, psi), pullback_metric_field(psi, g), h, p);
  const Vector rhs = tension_field(phi, g, h, psi.value(p));
  return lhs - rhs;
}

namespace {

// Quadratic polynomial map R^m -> R^n, coefficient blocks [1, x_k, x_k x_l (k <= l)].
struct Quadratic {
  int m = 0;
  std::vector<std::vector<double>> coef;  // per output component

  static int terms(int m) { return 1 + m + m * (m + 1) / 2; }

  JetVec operator()(const JetVec& x) const {
    JetVec out;
    for (const auto& c : coef) {
      Jet s(c[0]);
      std::size_t t = 1;
      for (int k = 0; k < m; ++k) s += c[t++] * x[static_cast<std::size_t>(k)];
      for (int k = 0; k < m; ++k) {
        for (int l = k; l < m; ++l) {
          s += c[t++] * x[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(l)];
        }
      }
      out.push_back(s);
    }
    return out;
  }
};

Quadratic random_quadratic(int m, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Quadratic q;
  q.m = m;
  for (int c = 0; c < n; ++c) {
    std::vector<double> row(static_cast<std::size_t>(Quadratic::terms(m)));
    for (double& v : row) v = u(rng);
    q.coef.push_back(std::move(row));
  }
  return q;
}

}  // namespace

SmoothMap random_polynomial_diffeo(int m, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Quadratic q = random_quadratic(m, m, rng);
  // every monomial is bounded by 1 on [-1, 1]^m
  for (auto& row : q.coef) {
    double sum = 0.0;
    for (double v : row) sum += std::abs(v);
    for (double& v : row) v *= amplitude / sum;
  }
  return SmoothMap::analytic(
      m, m,
      [q](const JetVec& x) {
        JetVec y = q(x);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += x[i];
        return y;
      },
      "psi");
}

ResidualReport tension_naturality_sweep(int m, std::size_t pairs, std::uint64_t seed,
                                        double tolerance, std::size_t points_per_pair) {
  const MetricField g = hyperbolic_warped(m).metric;
  const MetricField h = hyperbolic_warped(2).metric;
  std::mt19937_64 rng(label_seed("tension-naturality", seed));
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  struct Case {
    SmoothMap psi;
    SmoothMap phi;
    std::vector<Vector> points;
  };
  std::vector<Case> cases;
  for (std::size_t k = 0; k < pairs; ++k) {
    Case c;
    c.psi = random_polynomial_diffeo(m, 0.1, rng());
    const Quadratic q = random_quadratic(m, 2, rng);
    c.phi = SmoothMap::analytic(m, 2, q, "phi");
    for (std::size_t i = 0; i < points_per_pair; ++i) {
      Vector p(m);
      for (int j = 0; j < m; ++j) p[j] = u(rng);
      c.points.push_back(p);
    }
    cases.push_back(std::move(c));
  }
  auto res = parallel_map<double>(cases.size(), [&](std::size_t k) {
    double worst = 0.0;
    for (const Vector& p : cases[k].points) {
      worst = std::max(worst, tension_naturality_check(cases[k].phi, g, h, cases[k].psi, p).norm());
    }
    return worst;
  });
  return ResidualReport::make("tension-naturality", "tension(phi o psi; psi^* g) - tension(phi; g) o psi",
                              std::move(res), tolerance,
                              {{"m", m}, {"pairs", pairs}, {"seed", seed}, {"amplitude", 0.1},
                               {"points_per_pair", points_per_pair}});
}

json to_json(const MSolitonReport& r) {
  json j = {{"pullback", to_json(r.pullback, false)},
            {"soliton", to_json(r.soliton, false)},
            {"harmonic", to_json(r.harmonic, false)},
            {"negative_control", to_json(r.negative_control, false)},
            {"pass", r.pass}};
  j["negative_control"]["expected"] = "fail";
  return j;
}

MSolitonReport msoliton_conditions_check(const SolitonData& d, const SampleOptions& opts) {
  if (!d.phi || !d.target || !d.x || !d.omega || !d.target->oneforms.count("omega_N")) {
    throw UnsupportedError(d.geometry.name + ": needs X, w, phi and a target carrying w_N");
  }
  const SmoothMap& phi = *d.phi;
  const OneFormField& wn = d.target->oneforms.at("omega_N");
  const MetricField& g = d.geometry.metric;
  const MetricField& h = d.target->metric;
  const VectorFieldSpec& x = *d.x;
  const Chart& chart = d.geometry.chart;
  const std::string name = d.geometry.name;

  MSolitonReport r;
  r.pullback = sample_residual(name + "/pullback", "phi^* w_N - w", chart, [&](const Vector& p) {
    return (pullback_oneform(phi, wn, p) - d.omega->value(p)).norm();
  }, opts);
  r.soliton = sample_residual(name + "/soliton", "Ric + 1/2 L_X g - lambda g - theta w (x) w", chart,
                              [&](const Vector& p) { return soliton_residual(d, p).norm(); }, opts);
  r.harmonic = sample_residual(name + "/harmonic", "tension(phi) - dphi(X)", chart, [&](const Vector& p) {
    const Vector dx = phi.jet(p, 1).d1 * x.value(p);
    return (tension_field(phi, g, h, p) - dx).norm();
  }, opts);
  SolitonData shifted = d;
  shifted.lambda = d.lambda + 0.1;
  r.negative_control = sample_residual(name + "/soliton-lambda+0.1", "soliton residual, lambda + 0.1",
                                       chart, [&](const Vector& p) {
                                         return soliton_residual(shifted, p).norm();
                                       }, opts);
  r.pass = r.pullback.pass && r.soliton.pass && r.harmonic.pass && !r.negative_control.pass;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

MetricField scaled(const MetricField& g, double c) {
  const JetFn f = *g.generic();
  return MetricField::analytic(
      g.dim(),
      [f, c](const JetVec& x) {
        JetVec out = f(x);
        for (Jet& v : out) v *= Jet(c);
        return out;
      },
      g.order_loss());
}

JetVec axpy(const JetVec& y, double h, const JetVec& k) {
  JetVec out = y;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += h * k[i];
  return out;
}

// A dx1^2 + B e^{2 x1} sum dx_i^2 with constant A, B.
JetVec warped_components(int m, double a, double b, const JetVec& x) {
  JetVec out(static_cast<std::size_t>(m * m), Jet(0.0));
  out[0] = Jet(a);
  const Jet e = b * exp(2.0 * x[0]);
  for (int i = 1; i < m; ++i) out[static_cast<std::size_t>(i * m + i)] = e;
  return out;
}

}  // namespace

SelfSimilarOracle::SelfSimilarOracle(SolitonData d, double step) : d_(std::move(d)), step_(step) {
  if (!d_.x || !d_.phi || !d_.target || !d_.target->oneforms.count("omega_N")) {
    throw UnsupportedError(d_.geometry.name + ": self-similar data needs X, phi and w_N");
  }
  if (!d_.x->fn().generic() || !d_.geometry.metric.generic() || !d_.phi->fn().generic()) {
    throw UnsupportedError("self-similar oracle needs analytic X, g and phi");
  }
  if (!(step_ > 0.0)) throw ParameterError("step > 0 violated");
  if (d_.lambda == 0.0) throw ParameterError("lambda != 0 violated");
  n_ = d_.phi->target_dim();
  a_ = d_.geometry.params.vec("a", std::vector<double>(static_cast<std::size_t>(n_), 0.0));
  b_ = d_.geometry.params.vec("b", std::vector<double>(static_cast<std::size_t>(n_), 0.0));
}

double SelfSimilarOracle::c(double t) const {
  const double c = 1.0 - 2.0 * d_.lambda * t;
  if (!(c > 0.0)) {
    std::ostringstream os;
    os << "c(t) = 1 - 2 lambda t > 0 violated (t = " << t << ", lambda = " << d_.lambda
       << ", c = " << c << ")";
    throw WindowError(os.str());
  }
  return c;
}

SmoothMap SelfSimilarOracle::psi(double t) const {
  c(t);
  const JetFn x = *d_.x->fn().generic();
  const double lambda = d_.lambda;
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t) / step_)));
  const double h = t / steps;
  const int m = d_.geometry.metric.dim();
  return SmoothMap::analytic(
      m, m,
      [x, lambda, steps, h](const JetVec& x0) {
        auto f = [&](double s, const JetVec& y) {
          JetVec v = x(y);
          const double ic = 1.0 / (1.0 - 2.0 * lambda * s);
          for (Jet& vi : v) vi *= Jet(ic);
          return v;
        };
        JetVec y = x0;
        double s = 0.0;
        for (int k = 0; k < steps; ++k) {
          const JetVec k1 = f(s, y);
          const JetVec k2 = f(s + 0.5 * h, axpy(y, 0.5 * h, k1));
          const JetVec k3 = f(s + 0.5 * h, axpy(y, 0.5 * h, k2));
          const JetVec k4 = f(s + h, axpy(y, h, k3));
          for (std::size_t i = 0; i < y.size(); ++i) {
            y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
          }
          s += h;
        }
        return y;
      },
      "psi_t");
}

MetricField SelfSimilarOracle::metric(double t) const {
  return scaled(pullback_metric_field(psi(t), d_.geometry.metric), c(t));
}

SmoothMap SelfSimilarOracle::map(double t) const { return compose(*d_.phi, psi(t)); }

OneFormField SelfSimilarOracle::omega(double t) const {
  return pullback_oneform_field(map(t), d_.target->oneforms.at("omega_N"));
}

FlowSolution SelfSimilarOracle::solution() const {
  FlowSolution s;
  s.label = "oracle";
  s.m = d_.geometry.metric.dim();
  s.theta = d_.theta;
  s.target = d_.target->metric;
  const SelfSimilarOracle o = *this;
  s.metric = [o](double t) { return o.metric(t); };
  s.map = [o](double t) { return o.map(t); };
  s.omega = [o](double t) { return o.omega(t); };
  return s;
}

SmoothMap SelfSimilarOracle::printed_psi(double t) const {
  const double lc = std::log(c(t));
  const double lambda = d_.lambda;
  const int m = d_.geometry.metric.dim();
  return SmoothMap::analytic(
      m, m,
      [lc, lambda, m](const JetVec& x) {
        JetVec y{x[0] + ((lambda - m + 1.0) / (2.0 * lambda)) * lc};
        for (int i = 1; i < m; ++i) y.push_back((1.0 - lc) * x[static_cast<std::size_t>(i)]);
        return y;
      },
      "psi_t printed");
}

MetricField SelfSimilarOracle::printed_metric(double t) const {
  const double ct = c(t);
  const double lambda = d_.lambda;
  const int m = d_.geometry.metric.dim();
  const double lc = 1.0 - std::log(ct);
  const double bt = std::pow(ct, (2.0 * lambda - m + 1.0) / lambda) * lc * lc;
  return MetricField::analytic(m, [m, ct, bt](const JetVec& x) { return warped_components(m, ct, bt, x); });
}

SmoothMap SelfSimilarOracle::printed_map(double t) const {
  const int m = d_.geometry.metric.dim();
  const double lambda = d_.lambda;
  const double k = std::pow(c(t), (m - lambda - 1.0) / 2.0);
  const auto a = a_;
  const auto b = b_;
  return SmoothMap::analytic(
      m, n_,
      [k, lambda, a, b](const JetVec& x) {
        const Jet e = exp(-lambda * x[0]);
        JetVec y;
        for (std::size_t i = 0; i < a.size(); ++i) y.push_back(k * b[i] * e + a[i]);
        return y;
      },
      "phi_t printed");
}

FlowSolution SelfSimilarOracle::printed_solution() const {
  FlowSolution s;
  s.label = "printed";
  s.m = d_.geometry.metric.dim();
  s.theta = d_.theta;
  s.target = d_.target->metric;
  const SelfSimilarOracle o = *this;
  const OneFormField wn = d_.target->oneforms.at("omega_N");
  s.metric = [o](double t) { return o.printed_metric(t); };
  s.map = [o](double t) { return o.printed_map(t); };
  s.omega = [o, wn](double t) { return pullback_oneform_field(o.printed_map(t), wn); };
  return s;
}

SelfSimilarOracle::Profile SelfSimilarOracle::profile(double t, double x1) const {
  const int m = d_.geometry.metric.dim();
  Vector p = Vector::Zero(m);
  p[0] = x1;
  const FieldJet j = psi(t).jet(p, 1);
  const Vector q = j.value;
  const Matrix dq = j.d1;
  const Matrix g = c(t) * dq.transpose() * d_.geometry.metric.value(q) * dq;
  Profile pr;
  pr.a = g(0, 0);
  pr.b = m > 1 ? g(1, 1) * std::exp(-2.0 * x1) : 0.0;
  const Eigen::VectorXd f = d_.phi->value(q);
  pr.phi.assign(f.data(), f.data() + f.size());
  return pr;
}

SelfSimilarOracle build_self_similar(const SolitonData& d, double t) {
  SelfSimilarOracle o(d);
  o.c(t);
  return o;
}

double FlowResidual::relative() const {
  return std::max(metric_gap.norm() / std::max(1.0, metric_rate),
                  map_gap.norm() / std::max(1.0, map_rate));
}

FlowResidual flow_residual_of_solution(const FlowSolution& s, double t, const Vector& p, double dt) {
  const Matrix dg = (s.metric(t + dt).value(p) - s.metric(t - dt).value(p)) / (2.0 * dt);
  const Vector dphi = (s.map(t + dt).value(p) - s.map(t - dt).value(p)) / (2.0 * dt);
  const MetricField g = s.metric(t);
  FlowResidual r;
  r.metric_gap = dg - flow_rhs(g, s.omega(t), s.theta, p);
  r.map_gap = dphi - map_rhs(s.map(t), g, s.target, p);
  r.metric_rate = dg.norm();
  r.map_rate = dphi.norm();
  return r;
}

json to_json(const ResidualConvergence& r) {
  return {{"label", r.label}, {"t", r.t}, {"dt", r.dts}, {"residual", r.residuals},
          {"observed_order", r.orders}, {"tolerance", r.tolerance}, {"pass", r.pass}};
}

ResidualConvergence flow_residual_convergence(const FlowSolution& s, double t,
                                              const std::vector<Vector>& points, double dt,
                                              int halvings, double tolerance) {
  ResidualConvergence r;
  r.label = s.label;
  r.t = t;
  r.tolerance = tolerance;
  for (int k = 0; k <= halvings; ++k) {
    const double h = dt / std::pow(2.0, k);
    const auto vals = parallel_map<double>(points.size(), [&](std::size_t i) {
      return flow_residual_of_solution(s, t, points[i], h).relative();
    });
    r.dts.push_back(h);
    r.residuals.push_back(*std::max_element(vals.begin(), vals.end()));
  }
  bool orders_ok = true;
  for (std::size_t k = 1; k < r.residuals.size(); ++k) {
    const double o = std::log2(r.residuals[k - 1] / r.residuals[k]);
    r.orders.push_back(o);
    if (!(std::abs(o - 2.0) <= 0.2)) orders_ok = false;
  }
  r.pass = std::isfinite(r.residuals[0]) && r.residuals[0] <= tolerance && orders_ok;
  return r;
}

ResidualReport self_similar_velocity_check(const SelfSimilarOracle& o, const SampleOptions& opts,
                                           double dt) {
  const SolitonData& d = o.data();
  const MetricField gp = o.metric(dt);
  const MetricField gm = o.metric(-dt);
  return sample_residual(
      d.geometry.name + "/self-similar-velocity", "d_t g(0) - (-2 lambda g + L_X g)",
      d.geometry.chart,
      [&](const Vector& p) {
        const Matrix fd = (gp.value(p) - gm.value(p)) / (2.0 * dt);
        const Matrix alg = -2.0 * d.lambda * d.geometry.metric.value(p) +
                           lie_derivative_metric(*d.x, d.geometry.metric, p);
        return (fd - alg).norm();
      },
      opts, {{"dt", dt}});
}

ResidualReport printed_psi1_check(const SelfSimilarOracle& o, double t, const SampleOptions& opts) {
  const SmoothMap psi = o.psi(t);
  const SmoothMap printed = o.printed_psi(t);
  return sample_residual(o.data().geometry.name + "/psi1", "psi_t^1 (ODE) - psi_t^1 (printed)",
                         o.data().geometry.chart,
                         [&](const Vector& p) { return std::abs(psi.value(p)[0] - printed.value(p)[0]); },
                         opts, {{"t", t}});
}

// ---------------------------------------------------------------------------
// Reduced flow.

namespace {

// Finite-difference weights for derivatives 0..2 at z on the given nodes.
std::array<std::array<double, 5>, 3> fornberg(double z, const std::array<double, 5>& xs) {
  std::array<std::array<double, 5>, 3> c{};  // c[k][i]: derivative k, node i
  double c1 = 1.0;
  double c4 = xs[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < 5; ++i) {
    const int mn = std::min(i, 2);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

// Five-point stencils: centred in the interior, one-sided near the ends.
struct Stencils {
  int n = 0;
  double x0 = 0.0;
  double h = 0.0;
  std::vector<int> start;
  std::vector<std::array<std::array<double, 5>, 3>> w;

  explicit Stencils(const std::vector<double>& x) : n(static_cast<int>(x.size())) {
    if (n < 7) throw ParameterError("grid nodes >= 7 violated (nodes = " + std::to_string(n) + ")");
    x0 = x.front();
    h = x[1] - x[0];
    for (int j = 0; j < n; ++j) {
      const int s = std::clamp(j - 2, 0, n - 5);
      std::array<double, 5> xs{};
      for (int i = 0; i < 5; ++i) xs[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(s + i)];
      start.push_back(s);
      w.push_back(fornberg(x[static_cast<std::size_t>(j)], xs));
    }
  }

  template <class F>
  double apply(int j, int k, F&& f) const {
    double s = 0.0;
    for (int i = 0; i < 5; ++i) s += w[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] * f(start[static_cast<std::size_t>(j)] + i);
    return s;
  }

  // Degree-4 Lagrange interpolation of node values at an arbitrary point.
  template <class F>
  std::array<double, 2> interpolate(double z, F&& f) const {
    const int i0 = static_cast<int>(std::lround((z - x0) / h));
    const int s = std::clamp(i0 - 2, 0, n - 5);
    std::array<double, 5> xs{};
    for (int i = 0; i < 5; ++i) xs[static_cast<std::size_t>(i)] = x0 + (s + i) * h;
    const auto c = fornberg(z, xs);
    std::array<double, 2> out{0.0, 0.0};
    for (int i = 0; i < 5; ++i) {
      const double v = f(s + i);
      out[0] += c[0][static_cast<std::size_t>(i)] * v;
      out[1] += c[1][static_cast<std::size_t>(i)] * v;
    }
    return out;
  }
};

bool is_boundary(int j, int n) { return j < 2 || j >= n - 2; }

struct NodeJets {
  MetricJet g;
  FieldJet phi;
  Vector p;
};

NodeJets node_jets(const ReducedProblem& pr, const FlowState& s, const Stencils& st, int j) {
  const int m = pr.m;
  const int n = pr.n;
  const auto& x = s.x;
  auto gcomp = [&](int i) { return s.b[static_cast<std::size_t>(i)] * std::exp(2.0 * x[static_cast<std::size_t>(i)]); };
  auto acomp = [&](int i) { return s.a[static_cast<std::size_t>(i)]; };
  const std::size_t ju = static_cast<std::size_t>(j);
  NodeJets nj;
  nj.p = Vector::Zero(m);
  nj.p[0] = x[ju];
  const double gv = gcomp(j);
  const double g1 = st.apply(j, 1, gcomp);
  const double g2 = st.apply(j, 2, gcomp);
  MetricJet& mj = nj.g;
  mj.order = 2;
  mj.g = Matrix::Zero(m, m);
  mj.d1.assign(static_cast<std::size_t>(m), Matrix::Zero(m, m));
  mj.d2.assign(static_cast<std::size_t>(m), std::vector<Matrix>(static_cast<std::size_t>(m), Matrix::Zero(m, m)));
  mj.g(0, 0) = s.a[ju];
  mj.d1[0](0, 0) = st.apply(j, 1, acomp);
  mj.d2[0][0](0, 0) = st.apply(j, 2, acomp);
  for (int i = 1; i < m; ++i) {
    mj.g(i, i) = gv;
    mj.d1[0](i, i) = g1;
    mj.d2[0][0](i, i) = g2;
  }
  FieldJet& f = nj.phi;
  f.order = 2;
  f.value.resize(n);
  f.d1 = Eigen::MatrixXd::Zero(n, m);
  f.d2.assign(static_cast<std::size_t>(n), Matrix::Zero(m, m));
  for (int c = 0; c < n; ++c) {
    auto pc = [&](int i) { return s.phi[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)]; };
    f.value[c] = pc(j);
    f.d1(c, 0) = st.apply(j, 1, pc);
    f.d2[static_cast<std::size_t>(c)](0, 0) = st.apply(j, 2, pc);
  }
  return nj;
}

struct NodeRate {
  double a = 0.0;
  double b = 0.0;
  std::vector<double> phi;
  double z = 0.0;
};

// background: gauge metric jet for the DeTurck variant, or null.
NodeRate node_rate(const ReducedProblem& pr, const NodeJets& nj, const MetricJet* background) {
  const int n = pr.n;
  const Connection c = connection(nj.g, nj.p);
  const Matrix ric = ricci(c);
  double w1 = 0.0;
  if (!pr.omega_target.fn().empty()) {
    const Vector wn = pr.omega_target.value(Vector(nj.phi.value));
    for (int k = 0; k < n; ++k) w1 += wn[k] * nj.phi.d1(k, 0);
  }
  Matrix dg = -2.0 * ric;
  dg(0, 0) += 2.0 * pr.theta * w1 * w1;
  const Christoffel tgt = christoffel(pr.target, Vector(nj.phi.value));
  Vector dphi = tension_field(nj.phi, c, tgt);
  NodeRate r;
  if (background) {
    const VectorJet z = deturck_field(nj.g, *background, nj.p);
    dg -= lie_derivative_metric(z, nj.g);
    dphi -= Vector(nj.phi.d1 * z.value);
    r.z = z.value[0];
  }
  const double x1 = nj.p[0];
  r.a = dg(0, 0);
  r.b = pr.m > 1 ? dg(1, 1) * std::exp(-2.0 * x1) : 0.0;
  r.phi.assign(dphi.data(), dphi.data() + dphi.size());
  return r;
}

FlowState zero_like(const FlowState& s) {
  FlowState z = s;
  std::fill(z.a.begin(), z.a.end(), 0.0);
  std::fill(z.b.begin(), z.b.end(), 0.0);
  for (auto& v : z.phi) std::fill(v.begin(), v.end(), 0.0);
  return z;
}

FlowState rates(const ReducedProblem& pr, const FlowState& s, const Stencils& st,
                const std::vector<MetricJet>* background, std::vector<double>* z) {
  const int n = static_cast<int>(s.x.size());
  FlowState out = zero_like(s);
  if (z) z->assign(static_cast<std::size_t>(n), 0.0);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ju) {
    const int j = static_cast<int>(ju);
    const bool edge = is_boundary(j, n);
    if (edge && !z) return;
    const NodeJets nj = node_jets(pr, s, st, j);
    const NodeRate r = node_rate(pr, nj, background ? &(*background)[ju] : nullptr);
    if (z) (*z)[ju] = r.z;
    if (edge) return;
    out.a[ju] = r.a;
    out.b[ju] = r.b;
    out.phi[ju] = r.phi;
  });
  return out;
}

void axpy_state(FlowState& y, double h, const FlowState& k) {
  for (std::size_t j = 0; j < y.a.size(); ++j) {
    y.a[j] += h * k.a[j];
    y.b[j] += h * k.b[j];
    for (std::size_t c = 0; c < y.phi[j].size(); ++c) y.phi[j][c] += h * k.phi[j][c];
  }
}

void set_node(FlowState& s, std::size_t j, const NodeValue& v) {
  s.a[j] = v.a;
  s.b[j] = v.b;
  s.phi[j] = v.phi;
}

void pin(const ReducedProblem& pr, FlowState& s, double t) {
  if (!pr.boundary) return;
  const int n = static_cast<int>(s.x.size());
  for (int j : {0, 1, n - 2, n - 1}) {
    set_node(s, static_cast<std::size_t>(j), pr.boundary(t, s.x[static_cast<std::size_t>(j)]));
  }
}

std::string dump_node(const FlowState& s, std::size_t j) {
  std::ostringstream os;
  os << std::setprecision(10) << "t = " << s.t << ", node " << j << ", x1 = " << s.x[j]
     << ", A = " << s.a[j] << ", B = " << s.b[j] << ", phi = (";
  for (std::size_t c = 0; c < s.phi[j].size(); ++c) os << (c ? ", " : "") << s.phi[j][c];
  os << ")";
  return os.str();
}

void check_invariants(const ReducedProblem& pr, const FlowState& s) {
  for (std::size_t j = 0; j < s.x.size(); ++j) {
    Vector v(pr.n);
    bool finite = std::isfinite(s.a[j]) && std::isfinite(s.b[j]);
    for (int c = 0; c < pr.n; ++c) {
      v[c] = s.phi[j][static_cast<std::size_t>(c)];
      finite = finite && std::isfinite(v[c]);
    }
    if (!finite || !(s.a[j] > 0.0) || !(s.b[j] > 0.0)) {
      throw InvariantBreach("A > 0, B > 0 violated: " + dump_node(s, j));
    }
    if (!pr.target_chart.contains(v)) {
      throw InvariantBreach("map left the target chart: " + dump_node(s, j));
    }
  }
}

void check_shape(const ReducedProblem& pr, const FlowState& s) {
  const std::size_t n = s.x.size();
  if (s.a.size() != n || s.b.size() != n || s.phi.size() != n) {
    throw DimensionError("flow state arrays disagree in length");
  }
  for (const auto& v : s.phi) {
    if (static_cast<int>(v.size()) != pr.n) throw DimensionError("flow state map dimension");
  }
  if (pr.m < 2 || pr.m > kMaxDim) throw ParameterError("2 <= m <= 8 violated");
  if (pr.target.dim() != pr.n) throw DimensionError("target metric dimension differs from n");
}

// Step count and step size for [0, t_end].
std::pair<int, double> plan_steps(double t_end, double dt, double bound) {
  if (!(t_end >= 0.0)) throw ParameterError("T >= 0 violated");
  if (t_end == 0.0) return {0, 0.0};
  if (dt <= 0.0) {
    const int steps = std::max(1, static_cast<int>(std::ceil(t_end / bound)));
    return {steps, t_end / steps};
  }
  if (dt > bound * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "dt <= stability bound violated (dt = " << dt << ", bound = " << bound << ")";
    throw ParameterError(os.str());
  }
  const int steps = std::max(1, static_cast<int>(std::ceil(t_end / dt - 1e-9)));
  return {steps, t_end / steps};
}

}  // namespace

FlowState reduced_rhs(const ReducedProblem& p, const FlowState& s) {
  check_shape(p, s);
  const Stencils st(s.x);
  return rates(p, s, st, nullptr, nullptr);
}

double stability_bound(const ReducedProblem& p, const FlowState& s, double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("sigma > 0 violated");
  const FlowState r = reduced_rhs(p, s);
  const double h = s.x[1] - s.x[0];
  double min_a = *std::min_element(s.a.begin(), s.a.end());
  double rate = 0.0;
  for (std::size_t j = 0; j < s.x.size(); ++j) {
    rate = std::max(rate, std::abs(r.a[j]) / std::max(1.0, std::abs(s.a[j])));
    rate = std::max(rate, std::abs(r.b[j]) / std::max(1.0, std::abs(s.b[j])));
    for (std::size_t c = 0; c < s.phi[j].size(); ++c) {
      rate = std::max(rate, std::abs(r.phi[j][c]) / std::max(1.0, std::abs(s.phi[j][c])));
    }
  }
  return sigma * h * h * min_a / std::max(1.0, rate);
}

ReducedProblem reduced_problem(const SelfSimilarOracle& o) {
  const SolitonData& d = o.data();
  ReducedProblem p;
  p.m = d.geometry.metric.dim();
  p.n = d.phi->target_dim();
  p.theta = d.theta;
  p.target = d.target->metric;
  p.omega_target = d.target->oneforms.at("omega_N");
  p.target_chart = d.target->chart;
  p.boundary = [o](double t, double x1) {
    const auto pr = o.profile(t, x1);
    return NodeValue{pr.a, pr.b, pr.phi};
  };
  return p;
}

FlowState oracle_state(const SelfSimilarOracle& o, const FlowGrid& grid, double t) {
  FlowState s;
  s.t = t;
  const auto n = static_cast<std::size_t>(grid.nodes);
  for (int j = 0; j < grid.nodes; ++j) s.x.push_back(grid.x(j));
  s.a.resize(n);
  s.b.resize(n);
  s.phi.resize(n);
  parallel_for(n, [&](std::size_t j) {
    const auto pr = o.profile(t, s.x[j]);
    s.a[j] = pr.a;
    s.b[j] = pr.b;
    s.phi[j] = pr.phi;
  });
  return s;
}

FlowTrajectory integrate_flow_1d(const ReducedProblem& p, const FlowState& s0,
                                 const FlowOptions& opts) {
  check_shape(p, s0);
  check_invariants(p, s0);
  const Stencils st(s0.x);
  const auto [steps, dt] = plan_steps(opts.t_end, opts.dt, stability_bound(p, s0, opts.sigma));
  FlowTrajectory tr;
  tr.dt = dt;
  tr.steps = steps;
  tr.snapshots.push_back(s0);
  FlowState y = s0;
  auto f = [&](const FlowState& s) { return rates(p, s, st, nullptr, nullptr); };
  for (int k = 0; k < steps; ++k) {
    const double t = s0.t + k * dt;
    const FlowState k1 = f(y);
    FlowState y2 = y;
    axpy_state(y2, 0.5 * dt, k1);
    pin(p, y2, t + 0.5 * dt);
    const FlowState k2 = f(y2);
    FlowState y3 = y;
    axpy_state(y3, 0.5 * dt, k2);
    pin(p, y3, t + 0.5 * dt);
    const FlowState k3 = f(y3);
    FlowState y4 = y;
    axpy_state(y4, dt, k3);
    pin(p, y4, t + dt);
    const FlowState k4 = f(y4);
    axpy_state(y, dt / 6.0, k1);
    axpy_state(y, dt / 3.0, k2);
    axpy_state(y, dt / 3.0, k3);
    axpy_state(y, dt / 6.0, k4);
    y.t = s0.t + (k + 1) * dt;
    pin(p, y, y.t);
    check_invariants(p, y);
    if (opts.snapshot_every > 0 && (k + 1) % opts.snapshot_every == 0 && k + 1 < steps) {
      tr.snapshots.push_back(y);
    }
  }
  if (steps > 0) tr.snapshots.push_back(y);
  return tr;
}

double relative_state_error(const FlowState& s, const FlowState& ref) {
  double e = 0.0;
  auto upd = [&](double u, double r) { e = std::max(e, std::abs(u - r) / std::max(1.0, std::abs(r))); };
  for (std::size_t j = 0; j < ref.x.size(); ++j) {
    upd(s.a[j], ref.a[j]);
    upd(s.b[j], ref.b[j]);
    for (std::size_t c = 0; c < ref.phi[j].size(); ++c) upd(s.phi[j][c], ref.phi[j][c]);
  }
  return e;
}

double max_state_change(const FlowState& a, const FlowState& b) {
  double e = 0.0;
  for (std::size_t j = 0; j < a.x.size(); ++j) {
    e = std::max({e, std::abs(a.a[j] - b.a[j]), std::abs(a.b[j] - b.b[j])});
    for (std::size_t c = 0; c < a.phi[j].size(); ++c) e = std::max(e, std::abs(a.phi[j][c] - b.phi[j][c]));
  }
  return e;
}

void write_trajectory_csv(std::ostream& os, const FlowTrajectory& tr) {
  const std::size_t n = tr.snapshots.empty() || tr.snapshots[0].phi.empty() ? 0 : tr.snapshots[0].phi[0].size();
  os << "t,node,A,B";
  for (std::size_t c = 0; c < n; ++c) os << ",phi_" << c + 1;
  os << "\n" << std::setprecision(17);
  for (const FlowState& s : tr.snapshots) {
    for (std::size_t j = 0; j < s.x.size(); ++j) {
      os << s.t << "," << j << "," << s.a[j] << "," << s.b[j];
      for (double v : s.phi[j]) os << "," << v;
      os << "\n";
    }
  }
}

json to_json(const FlowComparison& c) {
  return {{"T", c.t_end},         {"nodes", c.nodes},         {"dt", c.dt},
          {"steps", c.steps},     {"relative_error", c.relative_error},
          {"tolerance", c.tolerance}, {"pass", c.pass}};
}

FlowComparison compare_with_oracle(const SelfSimilarOracle& o, const FlowGrid& grid,
                                   const FlowOptions& opts, double tolerance,
                                   FlowTrajectory* trajectory) {
  const ReducedProblem p = reduced_problem(o);
  const FlowState s0 = oracle_state(o, grid, 0.0);
  FlowTrajectory tr = integrate_flow_1d(p, s0, opts);
  const FlowState ref = oracle_state(o, grid, opts.t_end);
  FlowComparison c;
  c.t_end = opts.t_end;
  c.nodes = grid.nodes;
  c.dt = tr.dt;
  c.steps = tr.steps;
  c.relative_error = relative_state_error(tr.final(), ref);
  c.tolerance = tolerance;
  c.pass = std::isfinite(c.relative_error) && c.relative_error <= tolerance;
  if (trajectory) *trajectory = std::move(tr);
  return c;
}

json to_json(const ZeroRhsControl& c) {
  return {{"max_change", c.max_change}, {"tolerance", c.tolerance}, {"pass", c.pass}};
}

ZeroRhsControl zero_rhs_control(int m, int n, const FlowGrid& grid, const FlowOptions& opts,
                                double tolerance) {
  ReducedProblem p;
  p.m = m;
  p.n = n;
  p.theta = 0.0;
  p.target = MetricField::euclidean(n);
  p.target_chart = box_chart("R^" + std::to_string(n), Vector::Constant(n, -1.0), Vector::Constant(n, 1.0));
  p.target_chart.dim = n;
  auto flat = [n](double, double x1) {
    NodeValue v;
    v.a = 1.0;
    v.b = std::exp(-2.0 * x1);
    v.phi.assign(static_cast<std::size_t>(n), 1.0);
    return v;
  };
  p.boundary = flat;
  FlowState s0;
  for (int j = 0; j < grid.nodes; ++j) {
    s0.x.push_back(grid.x(j));
    const NodeValue v = flat(0.0, grid.x(j));
    s0.a.push_back(v.a);
    s0.b.push_back(v.b);
    s0.phi.push_back(v.phi);
  }
  const FlowTrajectory tr = integrate_flow_1d(p, s0, opts);
  ZeroRhsControl c;
  c.max_change = max_state_change(tr.final(), s0);
  c.tolerance = tolerance;
  c.pass = c.max_change <= tolerance;
  return c;
}

json to_json(const DeturckCorrespondence& c) {
  return {{"T", c.t_end},
          {"gap", c.gap},
          {"initial_rhs_gap", c.initial_rhs_gap},
          {"max_shift", c.max_shift},
          {"tolerance", c.tolerance},
          {"pass", c.pass}};
}

DeturckCorrespondence deturck_correspondence_check(const SelfSimilarOracle& o, const FlowGrid& grid,
                                                   const FlowOptions& opts, double tolerance) {
  const ReducedProblem p = reduced_problem(o);
  const FlowState s0 = oracle_state(o, grid, 0.0);
  check_shape(p, s0);
  const Stencils st(s0.x);
  const int n = grid.nodes;
  const auto nu = static_cast<std::size_t>(n);

  std::vector<MetricJet> background(nu);
  for (int j = 0; j < n; ++j) background[static_cast<std::size_t>(j)] = node_jets(p, s0, st, j).g;

  DeturckCorrespondence out;
  out.t_end = opts.t_end;
  out.tolerance = tolerance;
  {
    std::vector<double> z;
    const FlowState gauged = rates(p, s0, st, &background, &z);
    const FlowState plain = rates(p, s0, st, nullptr, nullptr);
    out.initial_rhs_gap = max_state_change(gauged, plain);
  }

  const auto [steps, dt] = plan_steps(opts.t_end, opts.dt, stability_bound(p, s0, opts.sigma));
  const FlowTrajectory direct = integrate_flow_1d(p, s0, FlowOptions{opts.t_end, dt > 0 ? dt : opts.dt, opts.sigma, 0});

  // DeTurck state plus chi per node.
  struct Gauged {
    FlowState s;
    std::vector<double> chi;
  };
  auto pin_gauged = [&](Gauged& y, double t) {
    for (int j : {0, 1, n - 2, n - 1}) {
      const auto ju = static_cast<std::size_t>(j);
      const double xb = y.s.x[ju];
      const double jac = st.apply(j, 1, [&](int i) { return y.chi[static_cast<std::size_t>(i)]; });
      const double eta = xb - (y.chi[ju] - xb) / jac;
      const auto pr = o.profile(t, eta);
      set_node(y.s, ju, NodeValue{pr.a / (jac * jac), pr.b * std::exp(2.0 * (eta - xb)), pr.phi});
    }
  };
  auto f = [&](const Gauged& y, Gauged& k) {
    std::vector<double> z;
    k.s = rates(p, y.s, st, &background, &z);
    k.chi.assign(nu, 0.0);
    for (std::size_t j = 0; j < nu; ++j) {
      k.chi[j] = st.interpolate(y.chi[j], [&](int i) { return z[static_cast<std::size_t>(i)]; })[0];
    }
  };
  auto combine = [&](const Gauged& y, double h, const Gauged& k) {
    Gauged r = y;
    axpy_state(r.s, h, k.s);
    for (std::size_t j = 0; j < nu; ++j) r.chi[j] += h * k.chi[j];
    return r;
  };
  Gauged y{s0, s0.x};
  Gauged k1, k2, k3, k4;
  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    f(y, k1);
    Gauged y2 = combine(y, 0.5 * dt, k1);
    pin_gauged(y2, t + 0.5 * dt);
    f(y2, k2);
    Gauged y3 = combine(y, 0.5 * dt, k2);
    pin_gauged(y3, t + 0.5 * dt);
    f(y3, k3);
    Gauged y4 = combine(y, dt, k3);
    pin_gauged(y4, t + dt);
    f(y4, k4);
    y = combine(y, dt / 6.0, k1);
    y = combine(y, dt / 3.0, k2);
    y = combine(y, dt / 3.0, k3);
    y = combine(y, dt / 6.0, k4);
    y.s.t = (k + 1) * dt;
    pin_gauged(y, y.s.t);
    check_invariants(p, y.s);
  }

  // chi^* of the DeTurck state, sampled at the nodes.
  FlowState pulled = y.s;
  for (int j = 0; j < n; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const double z = y.chi[ju];
    const double jac = st.apply(j, 1, [&](int i) { return y.chi[static_cast<std::size_t>(i)]; });
    pulled.a[ju] = st.interpolate(z, [&](int i) { return y.s.a[static_cast<std::size_t>(i)]; })[0] * jac * jac;
    pulled.b[ju] = st.interpolate(z, [&](int i) { return y.s.b[static_cast<std::size_t>(i)]; })[0] *
                   std::exp(2.0 * (z - y.s.x[ju]));
    for (int c = 0; c < p.n; ++c) {
      pulled.phi[ju][static_cast<std::size_t>(c)] = st.interpolate(z, [&](int i) {
        return y.s.phi[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
      })[0];
    }
    out.max_shift = std::max(out.max_shift, std::abs(z - y.s.x[ju]));
  }
  out.gap = relative_state_error(pulled, direct.final());
  out.pass = std::isfinite(out.gap) && out.gap <= tolerance && out.initial_rhs_gap <= 1e-10;
  return out;
}

}  // namespace rlab
