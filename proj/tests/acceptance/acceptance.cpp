// One PASS/FAIL line per acceptance criterion; exits 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "rlab/errors.hpp"
#include "rlab/flow.hpp"
#include "rlab/quadrature.hpp"
#include "rlab/tensor.hpp"
#include "rlab/verifier.hpp"

using namespace rlab;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Criterion = std::function<void(Outcome&)>;

double sup(const Chart& chart, std::size_t n, std::uint64_t seed, const std::function<double(const Vector&)>& f) {
  double mx = 0.0;
  for (const Vector& p : chart.sample(n, seed)) mx = std::max(mx, f(p));
  return mx;
}

std::vector<double> unit(int dim, int k) {
  std::vector<double> e(static_cast<std::size_t>(dim), 0.0);
  e[static_cast<std::size_t>(k)] = 1.0;
  return e;
}

void berger(Outcome& o) {
  double worst = 0.0;
  for (auto [k, t] : {std::pair{9.0, 2.0}, {16.0, 3.0}, {4.0, 2.0}}) {
    const SolitonData d = berger_soliton(k, t);
    worst = std::max(worst, sup(d.geometry.chart, 100, 1, [&](const Vector& p) {
      return soliton_residual(d, p).norm();
    }));
  }
  o.detail << "max residual " << worst;
  o.check(worst <= 1e-8, "residual <= 1e-8");
}

void msoliton(Outcome& o) {
  double worst = 0.0;
  for (auto [m, lambda] : {std::pair{2, -2.0}, {3, -3.0}, {4, -4.0}}) {
    for (int n : {1, 2}) {
      const std::vector<double> a = n == 1 ? std::vector<double>{1.0} : std::vector<double>{1.0, 0.5};
      const std::vector<double> b = n == 1 ? std::vector<double>{1.0} : std::vector<double>{0.5, 2.0};
      const MSolitonReport r = msoliton_conditions_check(warped_soliton(m, lambda, a, b), SampleOptions{100, 1, 1e-8});
      worst = std::max({worst, r.pullback.max, r.soliton.max, r.harmonic.max});
      o.check(r.pullback.pass && r.soliton.pass && r.harmonic.pass,
              "m=" + std::to_string(m) + " n=" + std::to_string(n));
      o.check(!r.negative_control.pass, "negative control m=" + std::to_string(m));
    }
  }
  o.detail << "max residual " << worst;
}

void obata(Outcome& o) {
  const double s = 1.0 / std::sqrt(2.0);
  const std::vector<SolitonData> cases = {
      obata_sphere(2, 1.0, 0.0, 0.0, {0, 0, 1}, {0, 0, 1}),
      obata_sphere(3, 2.0, 1.0, 0.5, {1, 0, 0, 0}, {0, s, s, 0}),
      obata_sphere(2, 0.5, 0.3, -0.2, {0.6, 0.0, 0.8}, {0, 1, 0}),
  };
  double res = 0.0, gap = 0.0;
  for (const SolitonData& d : cases) {
    res = std::max(res, sup(d.geometry.chart, 100, 2, [&](const Vector& p) {
      return gradient_soliton_residual(d, p).norm();
    }));
    gap = std::max(gap, sup(d.geometry.chart, 100, 3, [&](const Vector& p) {
      return obata_psi_gap(d, p).second.norm();
    }));
  }
  o.detail << "max residual " << res << ", traceless Hess Psi gap " << gap;
  o.check(res <= 1e-8, "residual <= 1e-8");
  o.check(gap <= 1e-8, "conformal Hessian <= 1e-8");
}

void integral(Outcome& o) {
  for (int m : {2, 3}) {
    const SolitonData d = obata_sphere(m, 1.0, 0.3, 0.0, unit(m + 1, m), unit(m + 1, 0));
    std::vector<double> gaps;
    for (int order : {8, 16, 32}) {
      const QuadratureRule q = sphere_rule(m, order);
      const IntegralIdentityResult r = integral_identity_check(d, q, 1e-6);
      gaps.push_back(std::max(r.general.rel_gap, r.gradient.rel_gap));
      if (order == 32) {
        o.check(r.general.pass && r.gradient.pass, "S^" + std::to_string(m) + " gap <= 1e-6");
        o.check(volume_calibration(q, 1e-8).pass, "volume calibration");
        o.check(height_calibration(q, unit(m + 1, m), 1e-8).pass, "height calibration");
      }
    }
    for (std::size_t k = 1; k < gaps.size(); ++k) {
      o.check(gaps[k] <= gaps[k - 1] + 1e-10, "monotone on S^" + std::to_string(m));
    }
    o.detail << "S^" << m << " gaps 8/16/32: " << gaps[0] << " " << gaps[1] << " " << gaps[2] << "; ";
  }
}

void eigen(Outcome& o) {
  for (int m : {2, 3}) {
    const SolitonData d = obata_sphere(m, 1.0, 0.3, 0.0, unit(m + 1, m), unit(m + 1, 0));
    const EigenCheck e = eigen_equality_check(*d.xi, 0.3, d.geometry, SampleOptions{100, 1, 1e-8});
    o.detail << "m=" << m << " alpha " << e.alpha << " |alpha - S/(m-1)| " << e.alpha_gap << "; ";
    o.check(std::abs(e.alpha - m) <= 1e-10 && e.alpha_gap <= 1e-10, "alpha = m = S/(m-1)");
    o.check(e.obata_residual <= 1e-8, "Hessian equation");
    const ScalarField bad = *d.xi + 0.1 * square(d.geometry.scalars.at("h_w"));
    o.check(!eigen_equality_check(bad, 0.3, d.geometry, SampleOptions{100, 1, 1e-8}).eigenfunction,
            "negative control");
  }
}

void naturality(Outcome& o) {
  for (int m : {2, 3}) {
    const ResidualReport r = tension_naturality_sweep(m, 20, 2024);
    o.detail << "m=" << m << " max gap " << r.max << "; ";
    o.check(r.pass && r.residuals.size() == 20, "20 pairs <= 1e-6");
  }
}

void self_similar(Outcome& o) {
  const SelfSimilarOracle oracle(warped_soliton(2, -2.0, {1.0}, {1.0}));
  const ResidualReport psi1 = printed_psi1_check(oracle, 0.1, SampleOptions{50, 1, 1e-8});
  const auto pts = oracle.data().geometry.chart.sample(10, 4);
  const ResidualConvergence rc = flow_residual_convergence(oracle.solution(), 0.1, pts, 1e-3, 2, 1e-5);
  const ResidualConvergence pc = flow_residual_convergence(oracle.printed_solution(), 0.1, pts, 1e-3, 2, 1e-5);
  o.detail << "psi^1 gap " << psi1.max << ", residual " << rc.residuals[0] << " orders " << rc.orders[0] << " "
           << rc.orders[1] << ", printed forms residual " << pc.residuals[0]
           << (pc.pass ? " (satisfy flow)" : " (do not satisfy flow, as expected)");
  o.check(psi1.pass, "psi^1 <= 1e-8");
  o.check(rc.pass, "residual <= 1e-5 with order 2 +- 0.2");
}

void integrator(Outcome& o) {
  const SelfSimilarOracle oracle(warped_soliton(2, -2.0, {1.0}, {1.0}));
  FlowOptions opts;
  opts.t_end = 0.01;
  const FlowComparison c = compare_with_oracle(oracle, FlowGrid{201, 2.0}, opts, 1e-3);
  const ZeroRhsControl z = zero_rhs_control(2, 1, FlowGrid{201, 2.0}, opts, 1e-12);
  o.detail << "relative error " << c.relative_error << " (" << c.steps << " steps), zero control change "
           << z.max_change;
  o.check(c.pass, "error <= 1e-3");
  o.check(z.pass, "zero control <= 1e-12");
}

void deturck(Outcome& o) {
  const SelfSimilarOracle oracle(warped_soliton(2, -2.0, {1.0}, {1.0}));
  FlowOptions opts;
  opts.t_end = 0.005;
  const DeturckCorrespondence d = deturck_correspondence_check(oracle, FlowGrid{201, 2.0}, opts, 1e-2);
  o.detail << "gap " << d.gap << ", max shift " << d.max_shift;
  o.check(d.pass, "gap <= 1e-2");
}

MetricField lumpy() {
  return MetricField::analytic(3, [](const JetVec& x) {
    JetVec g(9, Jet(0.0));
    g[0] = 1.0 + 0.3 * sin(x[0]) * cos(x[1]);
    g[1] = 0.2 * x[0] * x[1];
    g[2] = 0.1 * sin(x[2]);
    g[4] = 2.0 + 0.1 * x[0] * x[0] + 0.2 * x[2];
    g[5] = 0.05 * x[1];
    g[8] = exp(0.3 * x[0]) + 0.1 * x[1] * x[1];
    return g;
  });
}

void structural(Outcome& o) {
  const MetricField g = lumpy();
  const TensorField2 ric = ricci_field(g);
  const Chart box = box_chart("box", Vector::Constant(3, -0.5), Vector::Constant(3, 0.5));
  const double bianchi = sup(box, 10, 5, [&](const Vector& p) {
    return (divergence_sym2(ric, g, p) - 0.5 * scalar_curvature_differential(g, p)).norm();
  });

  double trace = 0.0;
  for (const SolitonData& d : {berger_soliton(9.0, 2.0), warped_soliton(3, -3.0, {1.0}, {2.0})}) {
    trace = std::max(trace, sup(d.geometry.chart, 20, 6, [&](const Vector& p) {
      const Matrix ginv = d.geometry.metric.value(p).inverse();
      return std::abs(trace_identity_residual(d, p) - ginv.cwiseProduct(soliton_residual(d, p)).sum());
    }));
  }

  const SmoothMap psi = SmoothMap::analytic(3, 3, [](const JetVec& x) {
    return JetVec{x[0] + 0.1 * sin(x[1]), x[1] + 0.05 * x[0] * x[2], x[2] + 0.1 * x[0] * x[0]};
  });
  const SmoothMap chi = SmoothMap::analytic(3, 3, [](const JetVec& x) {
    return JetVec{x[0] - 0.08 * x[2] * x[2], x[1] + 0.1 * cos(x[0]), x[2] + 0.02 * x[1]};
  });
  const MetricField pulled = pullback_metric_field(psi, g);
  const double functorial = sup(box, 20, 7, [&](const Vector& p) {
    return (pullback_metric(compose(psi, chi), g, p) - pullback_metric(chi, pulled, p)).norm();
  });

  cli::CommonOptions common;
  common.seed = 17;
  cli::VerifyOptions vo;
  vo.name = "berger";
  vo.scalars = {{"kappa", 9.0}, {"tau", 2.0}};
  cli::IdentitiesOptions io;
  io.order = 8;
  const std::string a = cli::run_verify(vo, common).to_json().dump(2) + cli::run_identities(io, common).to_json().dump(2);
  const std::string b = cli::run_verify(vo, common).to_json().dump(2) + cli::run_identities(io, common).to_json().dump(2);

  o.detail << "Bianchi " << bianchi << ", trace consistency " << trace << ", functoriality " << functorial
           << ", reports " << (a == b ? "identical" : "differ");
  o.check(bianchi <= 1e-6, "Bianchi <= 1e-6");
  o.check(trace <= 1e-12, "trace consistency <= 1e-12");
  o.check(functorial <= 1e-10, "functoriality <= 1e-10");
  o.check(a == b, "byte-identical reports");
}

}  // namespace

int main() {
  struct Item {
    const char* name;
    Criterion run;
    double budget_s;
  };
  const std::vector<Item> items = {
      {"Berger soliton identity", berger, 10},
      {"warped soliton triple", msoliton, 10},
      {"Obata structures", obata, 10},
      {"integral identities", integral, 10},
      {"eigenvalue equality case", eigen, 10},
      {"tension naturality", naturality, 10},
      {"self-similar oracle", self_similar, 10},
      {"flow integrator", integrator, 60},
      {"DeTurck correspondence", deturck, 10},
      {"structural suite", structural, 10},
  };
  int failed = 0;
  int index = 0;
  for (const Item& it : items) {
    ++index;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      it.run(o);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(secs <= it.budget_s, "runtime budget");
    if (!o.pass) ++failed;
    std::printf("%s %2d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", index, it.name, o.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
