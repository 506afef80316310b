#include "rlab/fields.hpp"

#include <array>
#include <cmath>
#include <random>

#include "rlab/errors.hpp"

namespace rlab {

std::string to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::analytic:
      return "analytic";
    case OracleKind::finite_difference:
      return "finite_difference";
    case OracleKind::provided:
      return "provided";
  }
  return "unknown";
}

namespace {

FieldJet field_jet_from(const JetVec& out, int dim_in, int order) {
  const int n = static_cast<int>(out.size());
  FieldJet j;
  j.order = order;
  j.value.resize(n);
  j.d1 = Eigen::MatrixXd::Zero(n, dim_in);
  for (int c = 0; c < n; ++c) {
    j.value[c] = out[c].value();
    if (order >= 1) {
      for (int k = 0; k < dim_in; ++k) j.d1(c, k) = out[c].derivative(k);
    }
  }
  if (order >= 2) {
    j.d2.assign(n, Matrix::Zero(dim_in, dim_in));
    for (int c = 0; c < n; ++c) {
      for (int k = 0; k < dim_in; ++k) {
        for (int l = k; l < dim_in; ++l) {
          const double v = out[c].second_derivative(k, l);
          j.d2[c](k, l) = v;
          j.d2[c](l, k) = v;
        }
      }
    }
  }
  return j;
}

double scaled_step(double h, double x) { return h * std::max(1.0, std::abs(x)); }

}  // namespace

ComponentFunction::ComponentFunction(int dim_in, int dim_out, Provider provider,
                                     int max_order, OracleKind kind)
    : dim_in_(dim_in),
      dim_out_(dim_out),
      provider_(std::move(provider)),
      max_order_(max_order),
      kind_(kind) {
  if (dim_in < 0 || dim_in > kMaxDim)
    throw DimensionError("chart dimension " + std::to_string(dim_in) + " outside [0, " +
                         std::to_string(kMaxDim) + "]");
}

ComponentFunction ComponentFunction::analytic(int dim_in, int dim_out, JetFn fn,
                                              int order_loss) {
  auto provider = [dim_in, dim_out, fn, order_loss](const Vector& p, int order) {
    const JetVec x = seed_point(std::span<const double>(p.data(), p.size()), order + order_loss);
    const JetVec out = fn(x);
    if (static_cast<int>(out.size()) != dim_out) {
      throw DimensionError("analytic field returned " + std::to_string(out.size()) +
                           " components, expected " + std::to_string(dim_out));
    }
    return field_jet_from(out, dim_in, order);
  };
  ComponentFunction f(dim_in, dim_out, std::move(provider),
                      JetLayout::kMaxOrder - order_loss, OracleKind::analytic);
  f.generic_ = std::move(fn);
  f.order_loss_ = order_loss;
  return f;
}

ComponentFunction ComponentFunction::sampled(int dim_in, int dim_out,
                                             std::function<Eigen::VectorXd(const Vector&)> fn,
                                             FdSteps steps) {
  auto provider = [dim_in, dim_out, fn, steps](const Vector& p, int order) {
    FieldJet j;
    j.order = order;
    j.value = fn(p);
    j.d1 = Eigen::MatrixXd::Zero(dim_out, dim_in);
    if (order >= 1) {
      for (int k = 0; k < dim_in; ++k) {
        const double h = scaled_step(steps.h1, p[k]);
        Vector a = p;
        Vector b = p;
        a[k] += h;
        b[k] -= h;
        j.d1.col(k) = (fn(a) - fn(b)) / (2.0 * h);
      }
    }
    if (order >= 2) {
      j.d2.assign(dim_out, Matrix::Zero(dim_in, dim_in));
      for (int k = 0; k < dim_in; ++k) {
        for (int l = k; l < dim_in; ++l) {
          const double hk = scaled_step(steps.h2, p[k]);
          const double hl = scaled_step(steps.h2, p[l]);
          auto at = [&](double sk, double sl) {
            Vector q = p;
            q[k] += sk * hk;
            q[l] += sl * hl;
            return fn(q);
          };
          const Eigen::VectorXd v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * hk * hl);
          for (int c = 0; c < dim_out; ++c) {
            j.d2[c](k, l) = v[c];
            j.d2[c](l, k) = v[c];
          }
        }
      }
    }
    return j;
  };
  return ComponentFunction(dim_in, dim_out, std::move(provider), 2,
                           OracleKind::finite_difference);
}

FieldJet ComponentFunction::jet(const Vector& p, int order) const {
  if (!provider_) throw UnsupportedError("field has no evaluator");
  if (p.size() != dim_in_) {
    throw DimensionError("point has dimension " + std::to_string(p.size()) + ", field expects " +
                         std::to_string(dim_in_));
  }
  if (order > max_order_) {
    throw UnsupportedError("derivative order " + std::to_string(order) +
                           " exceeds the field's oracle (max " + std::to_string(max_order_) + ")");
  }
  return provider_(p, order);
}

Eigen::VectorXd ComponentFunction::value(const Vector& p) const { return jet(p, 0).value; }

bool Chart::contains(const Vector& p) const {
  if (p.size() != dim) return false;
  for (int k = 0; k < dim; ++k) {
    if (!std::isfinite(p[k])) return false;
  }
  return !domain || domain(p);
}

namespace {

constexpr std::array<int, 12> kPrimes = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

double radical_inverse(std::uint64_t i, int base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += static_cast<double>(i % static_cast<std::uint64_t>(base)) * f;
    i /= static_cast<std::uint64_t>(base);
    f *= inv;
  }
  return r;
}

}  // namespace

std::vector<Vector> Chart::sample(std::size_t count, std::uint64_t seed) const {
  if (dim > static_cast<int>(kPrimes.size())) throw DimensionError("sampling supports dim <= 12");
  std::mt19937_64 rng(seed);
  std::vector<double> shift(static_cast<std::size_t>(dim));
  for (double& s : shift) s = static_cast<double>(rng() >> 11) * 0x1.0p-53;

  std::vector<Vector> pts;
  pts.reserve(count);
  const std::size_t cap = 64 * count + 1024;
  for (std::uint64_t i = 1; pts.size() < count && i < cap; ++i) {
    Vector p(dim);
    for (int k = 0; k < dim; ++k) {
      double u = radical_inverse(i, kPrimes[static_cast<std::size_t>(k)]) + shift[static_cast<std::size_t>(k)];
      u -= std::floor(u);
      const double lo = sample_lo[k] + margin;
      const double hi = sample_hi[k] - margin;
      p[k] = lo + u * (hi - lo);
    }
    if (contains(p)) pts.push_back(std::move(p));
  }
  return pts;
}

Chart box_chart(std::string label, const Vector& lo, const Vector& hi, double margin) {
  Chart c;
  c.dim = static_cast<int>(lo.size());
  c.label = std::move(label);
  c.sample_lo = lo;
  c.sample_hi = hi;
  c.margin = margin;
  return c;
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(ComponentFunction fn, std::string label)
    : fn_(std::move(fn)), label_(std::move(label)) {
  if (fn_.dim_out() != 1) throw DimensionError("scalar field must have one component");
}

ScalarField ScalarField::analytic(int dim, std::function<Jet(const JetVec&)> fn,
                                  std::string label) {
  return ScalarField(
      ComponentFunction::analytic(dim, 1, [fn](const JetVec& x) { return JetVec{fn(x)}; }),
      std::move(label));
}

ScalarField ScalarField::constant(int dim, double c) {
  return analytic(dim, [c](const JetVec&) { return Jet(c); }, "constant");
}

ScalarJet ScalarField::jet(const Vector& p, int order) const {
  const FieldJet f = fn_.jet(p, order);
  ScalarJet s;
  s.order = order;
  s.value = f.value[0];
  s.d1 = f.d1.row(0).transpose();
  s.d2 = order >= 2 ? f.d2[0] : Matrix::Zero(dim(), dim());
  return s;
}

double ScalarField::value(const Vector& p) const { return fn_.value(p)[0]; }

ScalarField ScalarField::map(std::function<Jet(const Jet&)> f,
                             std::function<double(double)> fd) const {
  if (fn_.generic()) {
    const JetFn inner = *fn_.generic();
    return ScalarField(ComponentFunction::analytic(
        dim(), 1, [inner, f](const JetVec& x) { return JetVec{f(inner(x)[0])}; },
        fn_.order_loss()));
  }
  const ComponentFunction src = fn_;
  return ScalarField(ComponentFunction::sampled(dim(), 1, [src, fd](const Vector& p) {
    Eigen::VectorXd v(1);
    v[0] = fd(src.value(p)[0]);
    return v;
  }));
}

namespace {

ScalarField combine(const ScalarField& a, const ScalarField& b,
                    std::function<Jet(const Jet&, const Jet&)> op,
                    std::function<double(double, double)> fd) {
  if (a.dim() != b.dim()) throw DimensionError("scalar fields live on different charts");
  if (a.fn().generic() && b.fn().generic()) {
    const JetFn fa = *a.fn().generic();
    const JetFn fb = *b.fn().generic();
    return ScalarField(ComponentFunction::analytic(
        a.dim(), 1, [fa, fb, op](const JetVec& x) { return JetVec{op(fa(x)[0], fb(x)[0])}; },
        std::max(a.fn().order_loss(), b.fn().order_loss())));
  }
  const ComponentFunction ca = a.fn();
  const ComponentFunction cb = b.fn();
  return ScalarField(ComponentFunction::sampled(a.dim(), 1, [ca, cb, fd](const Vector& p) {
    Eigen::VectorXd v(1);
    v[0] = fd(ca.value(p)[0], cb.value(p)[0]);
    return v;
  }));
}

}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  return combine(a, b, [](const Jet& x, const Jet& y) { return x + y; },
                 [](double x, double y) { return x + y; });
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  return combine(a, b, [](const Jet& x, const Jet& y) { return x * y; },
                 [](double x, double y) { return x * y; });
}

ScalarField operator*(double s, const ScalarField& a) {
  return a.map([s](const Jet& x) { return s * x; }, [s](double x) { return s * x; });
}

ScalarField square(const ScalarField& f) {
  return f.map([](const Jet& x) { return x * x; }, [](double x) { return x * x; });
}

ScalarField exp(const ScalarField& f) {
  return f.map([](const Jet& x) { return exp(x); }, [](double x) { return std::exp(x); });
}

ScalarField log(const ScalarField& f) {
  return f.map([](const Jet& x) { return log(x); }, [](double x) { return std::log(x); });
}

// ---------------------------------------------------------------------------

namespace {

VectorJet vector_jet_from(const FieldJet& f) {
  VectorJet v;
  v.value = f.value;
  v.d1 = f.d1;
  v.order = f.order;
  return v;
}

}  // namespace

VectorFieldSpec::VectorFieldSpec(ComponentFunction fn, std::string label)
    : fn_(std::move(fn)), label_(std::move(label)) {
  if (fn_.dim_in() != fn_.dim_out()) throw DimensionError("vector field must be tangent");
}

VectorFieldSpec VectorFieldSpec::analytic(int dim, JetFn fn, std::string label) {
  return VectorFieldSpec(ComponentFunction::analytic(dim, dim, std::move(fn)), std::move(label));
}

VectorFieldSpec VectorFieldSpec::zero(int dim) {
  return analytic(dim, [dim](const JetVec&) { return JetVec(static_cast<std::size_t>(dim), Jet(0.0)); },
                  "zero");
}

VectorJet VectorFieldSpec::jet(const Vector& p, int order) const {
  return vector_jet_from(fn_.jet(p, order));
}

Vector VectorFieldSpec::value(const Vector& p) const { return fn_.value(p); }

OneFormField::OneFormField(ComponentFunction fn, std::string label)
    : fn_(std::move(fn)), label_(std::move(label)) {
  if (fn_.dim_in() != fn_.dim_out()) throw DimensionError("one-form must have dim components");
}

OneFormField OneFormField::analytic(int dim, JetFn fn, std::string label) {
  return OneFormField(ComponentFunction::analytic(dim, dim, std::move(fn)), std::move(label));
}

OneFormField OneFormField::zero(int dim) {
  return analytic(dim, [dim](const JetVec&) { return JetVec(static_cast<std::size_t>(dim), Jet(0.0)); },
                  "zero");
}

OneFormField OneFormField::differential(const ScalarField& f) {
  const int m = f.dim();
  if (f.fn().generic()) {
    const JetFn inner = *f.fn().generic();
    return OneFormField(ComponentFunction::analytic(
        m, m,
        [inner, m](const JetVec& x) {
          const Jet v = inner(x)[0];
          JetVec out;
          for (int k = 0; k < m; ++k) out.push_back(v.d(k));
          return out;
        },
        f.fn().order_loss() + 1));
  }
  const ScalarField src = f;
  auto provider = [src, m](const Vector& p, int order) {
    const ScalarJet s = src.jet(p, order + 1);
    FieldJet j;
    j.order = order;
    j.value = s.d1;
    j.d1 = order >= 1 ? Eigen::MatrixXd(s.d2) : Eigen::MatrixXd::Zero(m, m);
    return j;
  };
  return OneFormField(ComponentFunction(m, m, provider, 1, f.fn().kind()), "d" + f.label());
}

VectorJet OneFormField::jet(const Vector& p, int order) const {
  return vector_jet_from(fn_.jet(p, order));
}

Vector OneFormField::value(const Vector& p) const { return fn_.value(p); }

SmoothMap::SmoothMap(ComponentFunction fn, std::string label)
    : fn_(std::move(fn)), label_(std::move(label)) {}

SmoothMap SmoothMap::analytic(int source_dim, int target_dim, JetFn fn, std::string label) {
  return SmoothMap(ComponentFunction::analytic(source_dim, target_dim, std::move(fn)),
                   std::move(label));
}

SmoothMap SmoothMap::identity(int dim) {
  return analytic(dim, dim, [](const JetVec& x) { return x; }, "id");
}

SmoothMap compose(const SmoothMap& phi, const SmoothMap& psi) {
  if (phi.source_dim() != psi.target_dim()) {
    throw DimensionError("compose: inner map lands in dimension " +
                         std::to_string(psi.target_dim()) + ", outer expects " +
                         std::to_string(phi.source_dim()));
  }
  if (phi.fn().generic() && psi.fn().generic()) {
    const JetFn f = *phi.fn().generic();
    const JetFn g = *psi.fn().generic();
    return SmoothMap(ComponentFunction::analytic(
        psi.source_dim(), phi.target_dim(), [f, g](const JetVec& x) { return f(g(x)); },
        phi.fn().order_loss() + psi.fn().order_loss()));
  }
  const SmoothMap a = phi;
  const SmoothMap b = psi;
  return SmoothMap(ComponentFunction::sampled(psi.source_dim(), phi.target_dim(),
                                              [a, b](const Vector& p) { return Eigen::VectorXd(a.value(b.value(p))); }));
}

// ---------------------------------------------------------------------------

MetricJet metric_jet_from(const FieldJet& packed, int dim) {
  MetricJet j;
  j.order = packed.order;
  j.g.resize(dim, dim);
  auto idx = [dim](int i, int k) { return i <= k ? i * dim + k : k * dim + i; };
  for (int i = 0; i < dim; ++i) {
    for (int k = 0; k < dim; ++k) j.g(i, k) = packed.value[idx(i, k)];
  }
  if (packed.order >= 1) {
    j.d1.assign(dim, Matrix(dim, dim));
    for (int a = 0; a < dim; ++a) {
      for (int i = 0; i < dim; ++i) {
        for (int k = 0; k < dim; ++k) j.d1[a](i, k) = packed.d1(idx(i, k), a);
      }
    }
  }
  if (packed.order >= 2) {
    j.d2.assign(dim, std::vector<Matrix>(dim, Matrix(dim, dim)));
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) {
        for (int i = 0; i < dim; ++i) {
          for (int k = 0; k < dim; ++k) j.d2[a][b](i, k) = packed.d2[idx(i, k)](a, b);
        }
      }
    }
  }
  return j;
}

MetricField::MetricField(int dim, Provider provider, int max_order, OracleKind kind,
                         std::optional<JetFn> generic, int order_loss)
    : dim_(dim),
      provider_(std::move(provider)),
      max_order_(max_order),
      kind_(kind),
      generic_(std::move(generic)),
      order_loss_(order_loss) {
  if (dim < 1 || dim > kMaxDim)
    throw DimensionError("metric dimension " + std::to_string(dim) + " outside [1, " +
                         std::to_string(kMaxDim) + "]");
}

MetricField MetricField::analytic(int dim, JetFn fn, int order_loss) {
  const ComponentFunction c = ComponentFunction::analytic(dim, dim * dim, fn, order_loss);
  auto provider = [c, dim](const Vector& p, int order) { return metric_jet_from(c.jet(p, order), dim); };
  return MetricField(dim, provider, c.max_order(), OracleKind::analytic, std::move(fn), order_loss);
}

MetricField MetricField::sampled(int dim, std::function<Matrix(const Vector&)> fn, FdSteps steps) {
  const ComponentFunction c = ComponentFunction::sampled(
      dim, dim * dim,
      [fn, dim](const Vector& p) {
        const Matrix g = fn(p);
        Eigen::VectorXd v(dim * dim);
        for (int i = 0; i < dim; ++i) {
          for (int k = 0; k < dim; ++k) v[i * dim + k] = g(i, k);
        }
        return v;
      },
      steps);
  auto provider = [c, dim](const Vector& p, int order) { return metric_jet_from(c.jet(p, order), dim); };
  return MetricField(dim, provider, 2, OracleKind::finite_difference);
}

MetricField MetricField::euclidean(int dim) {
  return analytic(dim, [dim](const JetVec&) {
    JetVec out(static_cast<std::size_t>(dim * dim), Jet(0.0));
    for (int i = 0; i < dim; ++i) out[static_cast<std::size_t>(i * dim + i)] = Jet(1.0);
    return out;
  });
}

MetricJet MetricField::jet(const Vector& p, int order) const {
  if (!provider_) throw UnsupportedError("metric has no evaluator");
  if (p.size() != dim_) {
    throw DimensionError("point has dimension " + std::to_string(p.size()) + ", metric expects " +
                         std::to_string(dim_));
  }
  if (order > max_order_) {
    throw UnsupportedError("metric derivative order " + std::to_string(order) + " unavailable");
  }
  return provider_(p, order);
}

// ---------------------------------------------------------------------------

TensorField2::TensorField2(int dim, ValueFn value, bool symmetric, DerivativeFn derivative,
                           double fd_step)
    : dim_(dim),
      value_(std::move(value)),
      symmetric_(symmetric),
      derivative_(std::move(derivative)),
      fd_step_(fd_step) {}

std::vector<Matrix> TensorField2::derivative(const Vector& p) const {
  if (derivative_) return derivative_(p);
  return central_difference(value_, p, fd_step_);
}

std::vector<Matrix> central_difference(const std::function<Matrix(const Vector&)>& f,
                                       const Vector& p, double h) {
  std::vector<Matrix> d;
  d.reserve(static_cast<std::size_t>(p.size()));
  for (int k = 0; k < p.size(); ++k) {
    const double hk = scaled_step(h, p[k]);
    Vector a = p;
    Vector b = p;
    a[k] += hk;
    b[k] -= hk;
    d.push_back((f(a) - f(b)) / (2.0 * hk));
  }
  return d;
}

}  // namespace rlab
