#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <variant>

#include "rlab/catalog.hpp"
#include "rlab/errors.hpp"
#include "rlab/flow.hpp"
#include "rlab/quadrature.hpp"
#include "rlab/tensor.hpp"
#include "rlab/verifier.hpp"

namespace rlab::cli {

using json = nlohmann::json;

namespace {

void add(ReportEnvelope& env, const ResidualReport& r) {
  env.add("residual", r.label, r.pass, to_json(r, false));
}

void add(ReportEnvelope& env, const IntegralCheck& c) {
  env.add("integral", c.identity, c.pass, to_json(c));
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what + " violated");
}

std::vector<double> unit(int dim, int k) {
  std::vector<double> e(static_cast<std::size_t>(dim), 0.0);
  e[static_cast<std::size_t>(k)] = 1.0;
  return e;
}

SampleOptions sample_options(const CommonOptions& c, double tol) {
  require(c.samples >= 1 && c.samples <= 100000, "1 <= samples <= 100000");
  require(tol > 0.0, "tol > 0");
  return SampleOptions{c.samples, c.seed, tol};
}

json common_json(const CommonOptions& c) {
  return {{"seed", c.seed}, {"samples", c.samples}};
}

// div Ric - 1/2 dS
ResidualReport bianchi(const GeometrySpec& g, const SampleOptions& opts) {
  const TensorField2 ric = ricci_field(g.metric);
  return sample_residual(g.name + "/bianchi", "div Ric - 1/2 dS", g.chart, [&](const Vector& p) {
    return (divergence_sym2(ric, g.metric, p) - 0.5 * scalar_curvature_differential(g.metric, p)).norm();
  }, opts);
}

ResidualReport einstein(const GeometrySpec& g, double lambda, const SampleOptions& opts) {
  const OneFormField zero = OneFormField::zero(g.metric.dim());
  return sample_residual(g.name + "/einstein", "Ric - lambda g", g.chart, [&](const Vector& p) {
    return ricci_structure_residual(g.metric, lambda, 0.0, zero, p).norm();
  }, opts, {{"lambda", lambda}});
}

void verify_geometry(ReportEnvelope& env, const GeometrySpec& g, const SampleOptions& opts,
                     const SampleOptions& fd) {
  env.add("structure", g.name + "/metric", true,
          {{"check", "finite, symmetric, positive definite at sampled points"},
           {"dimension", g.metric.dim()}});
  add(env, bianchi(g, fd));
  const int m = g.metric.dim();
  if (g.name == "euclidean" || g.name == "punctured-euclidean") {
    add(env, einstein(g, 0.0, opts));
  } else if (g.name == "hyperbolic-warped") {
    add(env, einstein(g, -(m - 1.0), opts));
  } else if (g.name == "round-sphere") {
    const double r = g.params.get("r", 1.0);
    add(env, einstein(g, (m - 1.0) / (r * r), opts));
    if (m == 2 || m == 3) {
      const QuadratureRule q = sphere_rule(m, 16, r);
      add(env, volume_calibration(q));
    }
  }
}

void verify_soliton(ReportEnvelope& env, const SolitonData& d, const SampleOptions& opts,
                    const SampleOptions& fd) {
  const std::string& name = d.geometry.name;
  const Chart& chart = d.geometry.chart;
  if (d.kind == SolitonKind::gradient) {
    add(env, sample_residual(name + "/gradient-soliton", "Ric + Hess eta - lambda g - theta dxi (x) dxi",
                             chart, [&](const Vector& p) { return gradient_soliton_residual(d, p).norm(); },
                             opts));
  } else {
    add(env, sample_residual(name + "/soliton", "Ric + 1/2 L_X g - lambda g - theta w (x) w", chart,
                             [&](const Vector& p) { return soliton_residual(d, p).norm(); }, opts));
  }
  if (d.x) {
    add(env, sample_residual(name + "/trace", "S + div X - m lambda - theta |w|^2", chart,
                             [&](const Vector& p) { return std::abs(trace_identity_residual(d, p)); },
                             opts));
  }
  if (name == "berger-sphere") {
    const double kappa = d.geometry.params.get("kappa");
    const double tau = d.geometry.params.get("tau");
    const VectorFieldSpec& e3 = d.geometry.vectors.at("E3");
    add(env, sample_residual(name + "/E3-unit", "|E3|^2 - 1", chart, [&](const Vector& p) {
      return std::abs(norm_sq_vector(e3.value(p), d.geometry.metric.value(p)) - 1.0);
    }, opts));
    if (kappa > 2.0 * tau * tau && 4.0 * tau * tau >= kappa) {
      const RicciBound rb = ricci_lower_bound_and_diameter(kappa, tau, opts.count, opts.seed);
      env.add("bound", name + "/ricci-diameter", rb.pass, to_json(rb));
    } else {
      env.add("bound", name + "/ricci-diameter", true,
              {{"skipped", true}, {"reason", "needs 2 tau^2 < kappa <= 4 tau^2"}});
    }
  }
  if (d.phi && d.target) {
    const MSolitonReport r = msoliton_conditions_check(d, opts);
    add(env, r.pullback);
    add(env, r.harmonic);
    json ctrl = to_json(r.negative_control, false);
    ctrl["expected"] = "fail";
    env.add("negative-control", r.negative_control.label, !r.negative_control.pass, ctrl);
    const SelfSimilarOracle o(d);
    add(env, self_similar_velocity_check(o, fd));

    // 1/2 L_X g on the fibre block, per e^{2 x1} dx_i^2
    const int m = d.geometry.metric.dim();
    const double derived = m + d.lambda - 1.0;
    const double printed = m - d.lambda - 1.0;
    const ResidualReport lie = sample_residual(
        name + "/lie-coefficient", "1/2 (L_X g)_22 e^{-2 x1} - (m + lambda - 1)", chart,
        [&](const Vector& p) {
          const Matrix l = lie_derivative_metric(*d.x, d.geometry.metric, p);
          return std::abs(0.5 * l(1, 1) * std::exp(-2.0 * p[0]) - derived);
        },
        opts, {{"derived", derived}, {"printed", printed}, {"printed_matches", std::abs(derived - printed) < 1e-12}});
    add(env, lie);
  }
  if (name == "obata-sphere") {
    add(env, sample_residual(name + "/conformal-hessian", "traceless(Hess Psi - mu g)", chart,
                             [&](const Vector& p) { return obata_psi_gap(d, p).second.norm(); }, opts));
    const EigenCheck e = eigen_equality_check(*d.xi, d.geometry.params.get("c1"), d.geometry, opts);
    env.add("eigen", name + "/eigen-equality", e.pass, to_json(e));
  }
}

void verify_witness(ReportEnvelope& env, const NonGradientWitness& w, const SampleOptions& opts) {
  add(env, sample_residual("non-gradient-witness/flat-gradient", "grad_flat u - X", w.flat.chart,
                           [&](const Vector& p) {
                             return (gradient(w.u, w.flat.metric, p) - w.x.value(p)).norm();
                           }, opts));
  const OneFormField flat = flat_field(w.x, w.flat.metric);
  add(env, sample_residual("non-gradient-witness/flat-closed", "d(X flat), Euclidean", w.flat.chart,
                           [&](const Vector& p) { return exterior_derivative_oneform(flat, p).norm(); },
                           opts));
  // On the warped metric X-flat is not closed, so X is not a gradient there.
  const ResidualReport warped = sample_residual(
      "non-gradient-witness/warped-closed", "d(X flat), warped", w.warped.chart,
      [&](const Vector& p) { return exterior_derivative_oneform(w.x_flat_warped, p).norm(); }, opts);
  double smallest = warped.residuals.empty() ? 0.0 : *std::min_element(warped.residuals.begin(), warped.residuals.end());
  json data = to_json(warped, false);
  data["expected"] = "nonzero";
  data["min"] = smallest;
  env.add("negative-control", warped.label, warped.max > 1e-3, data);
}

}  // namespace

std::vector<std::string> verify_names() {
  std::vector<std::string> names = catalog_names();
  names.push_back("berger");
  return names;
}

ReportEnvelope run_verify(const VerifyOptions& o, const CommonOptions& c) {
  const auto names = verify_names();
  if (std::find(names.begin(), names.end(), o.name) == names.end()) {
    std::ostringstream os;
    os << "unknown name '" << o.name << "'; available:";
    for (const auto& n : names) os << " " << n;
    throw UsageError(os.str());
  }
  Params params;
  for (const auto& [k, v] : o.scalars) params.set(k, v);
  for (const auto& [k, v] : o.vectors) params.set(k, v);
  const std::string entry = o.name == "berger" ? "berger-soliton" : o.name;

  json config = common_json(c);
  config["name"] = o.name;
  config["tol"] = o.tol;
  config["fd_tol"] = o.fd_tol;
  config["params"] = {{"scalars", o.scalars}, {"vectors", o.vectors}};
  ReportEnvelope env("verify", config);

  const SampleOptions opts = sample_options(c, o.tol);
  const SampleOptions fd = sample_options(c, o.fd_tol);
  const CatalogEntry e = build(entry, params);
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, GeometrySpec>) {
          verify_geometry(env, x, opts, fd);
        } else if constexpr (std::is_same_v<T, SolitonData>) {
          verify_soliton(env, x, opts, fd);
        } else {
          verify_witness(env, x, opts);
        }
      },
      e);
  return env;
}

ReportEnvelope run_identities(const IdentitiesOptions& o, const CommonOptions& c) {
  require(o.m >= 2, "m >= 2 (m = " + std::to_string(o.m) + ")");
  require(o.m <= 3, "m <= 3 for sphere quadrature (m = " + std::to_string(o.m) + ")");
  require(o.order >= 2 && o.order <= 64, "2 <= order <= 64");
  require(o.tol > 0.0 && o.calib_tol > 0.0 && o.eigen_tol > 0.0, "tolerances > 0");
  const std::vector<double> v = o.v.empty() ? unit(o.m + 1, o.m) : o.v;
  const std::vector<double> w = o.w.empty() ? unit(o.m + 1, 0) : o.w;

  json config = common_json(c);
  config.update({{"m", o.m}, {"order", o.order}, {"tol", o.tol}, {"calib_tol", o.calib_tol},
                 {"eigen_tol", o.eigen_tol}, {"theta", o.theta}, {"c1", o.c1}, {"c2", o.c2},
                 {"v", v}, {"w", w}});
  ReportEnvelope env("identities", config);

  const SolitonData d = obata_sphere(o.m, o.theta, o.c1, o.c2, v, w);
  const QuadratureRule q = sphere_rule(o.m, o.order);
  add(env, volume_calibration(q, o.calib_tol));
  add(env, height_calibration(q, v, o.calib_tol));

  // gap table over order/4, order/2, order
  std::vector<int> orders;
  for (int k : {o.order / 4, o.order / 2, o.order}) {
    if (k >= 2 && (orders.empty() || orders.back() != k)) orders.push_back(k);
  }
  json table = json::array();
  std::vector<double> gaps;
  IntegralIdentityResult at_order;
  for (int k : orders) {
    const IntegralIdentityResult r = integral_identity_check(d, k == o.order ? q : sphere_rule(o.m, k), o.tol);
    table.push_back({{"order", k}, {"rel_gap", r.gradient.rel_gap}, {"rel_gap_general", r.general.rel_gap},
                     {"nodes", k == o.order ? q.nodes.size() : sphere_rule(o.m, k).nodes.size()}});
    gaps.push_back(std::max(r.gradient.rel_gap, r.general.rel_gap));
    if (k == o.order) at_order = r;
  }
  add(env, at_order.general);
  add(env, at_order.gradient);
  // Non-increasing once round-off dominates: later gaps may exceed earlier ones
  // only by the floor.
  const double floor = 1e-10;
  bool monotone = true;
  for (std::size_t k = 1; k < gaps.size(); ++k) monotone = monotone && gaps[k] <= gaps[k - 1] + floor;
  env.add("convergence", "integral-identity/orders", monotone,
          {{"table", table}, {"criterion", "gap non-increasing in order up to a round-off floor"},
           {"floor", floor}});

  const ScalarField u = d.geometry.scalars.at("h_v") + d.geometry.scalars.at("h_w");
  add(env, bochner_stokes_check(u, d.geometry, q, o.tol));

  const SampleOptions opts = sample_options(c, o.eigen_tol);
  const EigenCheck e = eigen_equality_check(*d.xi, o.c1, d.geometry, opts);
  env.add("eigen", "obata-sphere/eigen-equality", e.pass, to_json(e));
  const ScalarField bad = *d.xi + 0.1 * square(d.geometry.scalars.at("h_w"));
  const EigenCheck n = eigen_equality_check(bad, o.c1, d.geometry, opts);
  json nj = to_json(n);
  nj["expected"] = "not an eigenfunction";
  nj["perturbation"] = "xi + 0.1 h_w^2";
  env.add("negative-control", "obata-sphere/perturbed-eigen", !n.eigenfunction, nj);
  return env;
}

ReportEnvelope run_flow(const FlowOptionsCli& o, const CommonOptions& c) {
  require(o.n >= 1, "n >= 1");
  require(o.nodes >= 7 && o.nodes <= 100001, "7 <= N <= 100001");
  require(o.half_width > 0.0, "L > 0");
  require(o.t_end >= 0.0, "T >= 0");
  require(o.dt >= 0.0, "dt >= 0");
  require(o.sigma > 0.0 && o.sigma <= 1.0, "0 < sigma <= 1");
  require(o.snapshot_every >= 0, "snapshot-every >= 0");
  require(o.dt_residual > 0.0, "dt-residual > 0");
  require(o.deturck_t >= 0.0, "deturck-T >= 0");
  const std::vector<double> ones(static_cast<std::size_t>(o.n), 1.0);
  const std::vector<double> a = o.a.empty() ? ones : o.a;
  const std::vector<double> b = o.b.empty() ? ones : o.b;
  require(static_cast<int>(a.size()) == o.n && static_cast<int>(b.size()) == o.n, "len(a) = len(b) = n");

  json config = common_json(c);
  config.update({{"m", o.m}, {"lambda", o.lambda}, {"n", o.n}, {"a", a}, {"b", b}, {"T", o.t_end},
                 {"N", o.nodes}, {"L", o.half_width}, {"dt", o.dt}, {"sigma", o.sigma},
                 {"t_residual", o.t_residual}, {"dt_residual", o.dt_residual}, {"tol", o.tol},
                 {"fd_tol", o.fd_tol}, {"residual_tol", o.residual_tol}, {"flow_tol", o.flow_tol},
                 {"zero_tol", o.zero_tol}, {"paper_forms", o.paper_forms}, {"deturck", o.deturck},
                 {"deturck_T", o.deturck_t}, {"deturck_tol", o.deturck_tol},
                 {"snapshot_every", o.snapshot_every}});
  ReportEnvelope env("flow", config);

  const SolitonData d = warped_soliton(o.m, o.lambda, a, b);
  const SelfSimilarOracle oracle = build_self_similar(d, std::max(o.t_end, o.t_residual + o.dt_residual));
  oracle.c(o.t_residual - o.dt_residual);  // window check
  const SampleOptions opts = sample_options(c, o.tol);

  const MSolitonReport ms = msoliton_conditions_check(d, opts);
  add(env, ms.pullback);
  add(env, ms.soliton);
  add(env, ms.harmonic);
  {
    json ctrl = to_json(ms.negative_control, false);
    ctrl["expected"] = "fail";
    env.add("negative-control", ms.negative_control.label, !ms.negative_control.pass, ctrl);
  }
  add(env, printed_psi1_check(oracle, o.t_residual, opts));
  add(env, self_similar_velocity_check(oracle, sample_options(c, o.fd_tol)));

  const auto points = d.geometry.chart.sample(std::min<std::size_t>(c.samples, 20), label_seed("flow-residual", c.seed));
  const ResidualConvergence rc =
      flow_residual_convergence(oracle.solution(), o.t_residual, points, o.dt_residual, 2, o.residual_tol);
  env.add("flow-residual", "oracle", rc.pass, to_json(rc));

  // Printed closed forms: recorded side by side, never part of the verdict.
  const ResidualConvergence pc =
      flow_residual_convergence(oracle.printed_solution(), o.t_residual, points, o.dt_residual, 2, o.residual_tol);
  json finding = {{"printed_residual", to_json(pc)},
                  {"satisfies_flow", pc.pass},
                  {"expected", "fail"},
                  {"informational", true}};
  {
    Vector origin = Vector::Zero(o.m);
    const double t = o.t_residual;
    finding["B_oracle"] = oracle.metric(t).value(origin)(1, 1);
    finding["B_printed"] = oracle.printed_metric(t).value(origin)(1, 1);
    double psi_gap = 0.0;
    const SmoothMap ps = oracle.psi(t);
    const SmoothMap pp = oracle.printed_psi(t);
    for (const Vector& p : points) {
      const Vector diff = ps.value(p) - pp.value(p);
      for (int i = 1; i < o.m; ++i) psi_gap = std::max(psi_gap, std::abs(diff[i]));
    }
    finding["psi_i_gap"] = psi_gap;
    if (o.paper_forms) {
      json per_point = json::array();
      const FlowSolution s = oracle.printed_solution();
      for (const Vector& p : points) {
        const FlowResidual r = flow_residual_of_solution(s, t, p, o.dt_residual);
        per_point.push_back({{"x", std::vector<double>(p.data(), p.data() + p.size())},
                             {"metric_gap", r.metric_gap.norm()},
                             {"map_gap", r.map_gap.norm()},
                             {"relative", r.relative()}});
      }
      finding["points"] = per_point;
    }
  }
  env.add("finding", "printed-forms", true, finding);

  const FlowGrid grid{o.nodes, o.half_width};
  FlowOptions fo;
  fo.t_end = o.t_end;
  fo.dt = o.dt;
  fo.sigma = o.sigma;
  fo.snapshot_every = o.snapshot_every;
  FlowTrajectory tr;
  const FlowComparison cmp = compare_with_oracle(oracle, grid, fo, o.flow_tol, &tr);
  env.add("integrator", "reduced-flow/oracle", cmp.pass, to_json(cmp));
  const ZeroRhsControl z = zero_rhs_control(o.m, o.n, grid, fo, o.zero_tol);
  env.add("integrator", "reduced-flow/zero-rhs", z.pass, to_json(z));
  if (o.deturck) {
    FlowOptions dfo = fo;
    dfo.t_end = o.deturck_t;
    const DeturckCorrespondence dc = deturck_correspondence_check(oracle, grid, dfo, o.deturck_tol);
    env.add("integrator", "deturck-correspondence", dc.pass, to_json(dc));
  }
  if (!o.traj.empty()) {
    std::ofstream f(o.traj);
    if (!f) throw UsageError("cannot write trajectory file '" + o.traj + "'");
    write_trajectory_csv(f, tr);
  }
  return env;
}

ReportEnvelope run_report(const std::vector<std::string>& files) {
  if (files.empty()) throw UsageError("report: no input files");
  ReportEnvelope env("report", {{"files", files}});
  for (const auto& path : files) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot read '" + path + "'");
    json j;
    try {
      f >> j;
    } catch (const json::exception& e) {
      throw UsageError("'" + path + "' is not valid JSON: " + e.what());
    }
    if (auto why = validate_report(j)) throw UsageError("'" + path + "': " + *why);
    json failed = json::array();
    for (const json& r : j["records"]) {
      if (!r["pass"].get<bool>()) failed.push_back(r.value("name", std::string("?")));
    }
    env.add("report", path, j["pass"].get<bool>(),
            {{"command", j["command"]}, {"records", j["records"].size()}, {"failed", failed}});
  }
  return env;
}

}  // namespace rlab::cli
