#include "rlab/tensor.hpp"

#include <Eigen/Cholesky>

#include "rlab/errors.hpp"

namespace rlab {

namespace {

std::vector<double> to_std(const Vector& p) { return {p.data(), p.data() + p.size()}; }

std::string point_text(const Vector& p) {
  std::string s = "(";
  for (int i = 0; i < p.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(p[i]);
  }
  return s + ")";
}

}  // namespace

Matrix inverse_metric(const Matrix& g, const Vector& p) {
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success || !g.allFinite()) {
    throw SingularMetricError("metric is not positive-definite at " + point_text(p), to_std(p));
  }
  Matrix inv = llt.solve(Matrix::Identity(g.rows(), g.cols()));
  return 0.5 * (inv + inv.transpose());
}

Connection connection(const MetricJet& j, const Vector& p) {
  const int m = j.dim();
  if (j.order < 1) throw UnsupportedError("connection needs first metric derivatives");
  Connection c;
  c.g = j.g;
  c.ginv = inverse_metric(j.g, p);

  // lowered symbols G[a](i, j) = Gamma_{a, ij}
  std::vector<Matrix> lowered(m, Matrix(m, m));
  for (int a = 0; a < m; ++a) {
    for (int i = 0; i < m; ++i) {
      for (int k = 0; k < m; ++k) {
        lowered[a](i, k) = 0.5 * (j.d1[i](a, k) + j.d1[k](i, a) - j.d1[a](i, k));
      }
    }
  }
  c.gamma.assign(m, Matrix::Zero(m, m));
  for (int l = 0; l < m; ++l) {
    for (int a = 0; a < m; ++a) c.gamma[l] += c.ginv(l, a) * lowered[a];
  }
  if (j.order < 2) return c;

  c.dgamma.assign(m, Christoffel(m, Matrix::Zero(m, m)));
  for (int k = 0; k < m; ++k) {
    const Matrix dginv = -c.ginv * j.d1[k] * c.ginv;
    for (int a = 0; a < m; ++a) {
      Matrix dlow(m, m);
      for (int i = 0; i < m; ++i) {
        for (int b = 0; b < m; ++b) {
          dlow(i, b) = 0.5 * (j.d2[k][i](a, b) + j.d2[k][b](i, a) - j.d2[k][a](i, b));
        }
      }
      for (int l = 0; l < m; ++l) {
        c.dgamma[k][l] += dginv(l, a) * lowered[a] + c.ginv(l, a) * dlow;
      }
    }
  }
  return c;
}

Christoffel christoffel(const MetricField& g, const Vector& p) {
  return connection(g.jet(p, 1), p).gamma;
}

Matrix ricci(const Connection& c) {
  const int m = static_cast<int>(c.g.rows());
  if (c.dgamma.empty()) throw UnsupportedError("Ricci needs second metric derivatives");
  Matrix r = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      double s = 0.0;
      for (int l = 0; l < m; ++l) {
        s += c.dgamma[l][l](i, j) - c.dgamma[j][l](i, l);
        for (int k = 0; k < m; ++k) {
          s += c.gamma[l](l, k) * c.gamma[k](i, j) - c.gamma[l](j, k) * c.gamma[k](i, l);
        }
      }
      r(i, j) = s;
      r(j, i) = s;
    }
  }
  return r;
}

Matrix ricci(const MetricField& g, const Vector& p) { return ricci(connection(g.jet(p, 2), p)); }

double scalar_curvature(const MetricField& g, const Vector& p) {
  const Connection c = connection(g.jet(p, 2), p);
  return (c.ginv.cwiseProduct(ricci(c))).sum();
}

Vector scalar_curvature_differential(const MetricField& g, const Vector& p, double h) {
  const auto d = central_difference(
      [&g](const Vector& q) {
        Matrix s(1, 1);
        s(0, 0) = scalar_curvature(g, q);
        return s;
      },
      p, h);
  Vector out(p.size());
  for (int k = 0; k < p.size(); ++k) out[k] = d[static_cast<std::size_t>(k)](0, 0);
  return out;
}

Vector grad_scalar_curvature(const MetricField& g, const Vector& p, double h) {
  return inverse_metric(g.value(p), p) * scalar_curvature_differential(g, p, h);
}

Matrix lie_derivative_metric(const VectorJet& x, const MetricJet& g) {
  const int m = g.dim();
  if (x.order < 1 || g.order < 1) throw UnsupportedError("Lie derivative needs first derivatives");
  Matrix out = Matrix::Zero(m, m);
  for (int k = 0; k < m; ++k) out += x.value[k] * g.d1[k];
  // g_kj d_i X^k + g_ik d_j X^k
  const Matrix gdx = g.g * x.d1;  // (j, i) -> g_jk d_i X^k
  out += gdx.transpose() + gdx;
  return 0.5 * (out + out.transpose());
}

Matrix lie_derivative_metric(const VectorFieldSpec& x, const MetricField& g, const Vector& p) {
  return lie_derivative_metric(x.jet(p, 1), g.jet(p, 1));
}

Matrix hessian(const ScalarJet& f, const Christoffel& gamma) {
  if (f.order < 2) throw UnsupportedError("Hessian needs second derivatives of the function");
  Matrix h = f.d2;
  for (std::size_t k = 0; k < gamma.size(); ++k) h -= f.d1[static_cast<int>(k)] * gamma[k];
  return 0.5 * (h + h.transpose());
}

Matrix hessian_scalar(const ScalarField& f, const MetricField& g, const Vector& p) {
  return hessian(f.jet(p, 2), christoffel(g, p));
}

double laplacian_scalar(const ScalarField& f, const MetricField& g, const Vector& p) {
  const Connection c = connection(g.jet(p, 1), p);
  return c.ginv.cwiseProduct(hessian(f.jet(p, 2), c.gamma)).sum();
}

Vector gradient(const ScalarField& f, const MetricField& g, const Vector& p) {
  return inverse_metric(g.value(p), p) * f.jet(p, 1).d1;
}

Matrix traceless(const Matrix& t, const Matrix& g) {
  const int m = static_cast<int>(g.rows());
  const Matrix ginv = g.inverse();
  const double tr = ginv.cwiseProduct(t).sum();
  return t - (tr / m) * g;
}

Matrix traceless(const TensorField2& t, const MetricField& g, const Vector& p) {
  const Matrix gv = g.value(p);
  const double tr = inverse_metric(gv, p).cwiseProduct(t.value(p)).sum();
  return t.value(p) - (tr / g.dim()) * gv;
}

Vector divergence_sym2(const Matrix& t, const std::vector<Matrix>& dt, const Connection& c) {
  const int m = static_cast<int>(t.rows());
  Vector div = Vector::Zero(m);
  for (int i = 0; i < m; ++i) {
    // (nabla_i T)_kj = d_i T_kj - Gamma^a_ik T_aj - Gamma^a_ij T_ka
    Matrix nt = dt[static_cast<std::size_t>(i)];
    for (int a = 0; a < m; ++a) {
      for (int k = 0; k < m; ++k) {
        for (int j = 0; j < m; ++j) {
          nt(k, j) -= c.gamma[a](i, k) * t(a, j) + c.gamma[a](i, j) * t(k, a);
        }
      }
    }
    for (int k = 0; k < m; ++k) div += c.ginv(i, k) * nt.row(k).transpose();
  }
  return div;
}

Vector divergence_sym2(const TensorField2& t, const MetricField& g, const Vector& p) {
  return divergence_sym2(t.value(p), t.derivative(p), connection(g.jet(p, 1), p));
}

TensorField2 ricci_field(const MetricField& g, double fd_step) {
  return TensorField2(
      g.dim(), [g](const Vector& p) { return ricci(g, p); }, true, {}, fd_step);
}

Vector tension_field(const FieldJet& phi, const Connection& source, const Christoffel& target) {
  const int n = static_cast<int>(phi.value.size());
  if (phi.order < 2) throw UnsupportedError("tension field needs second map derivatives");
  if (static_cast<int>(target.size()) != n) throw DimensionError("target connection dimension");
  Vector tau(n);
  for (int c = 0; c < n; ++c) {
    Matrix h = phi.d2[static_cast<std::size_t>(c)];
    for (std::size_t k = 0; k < source.gamma.size(); ++k) {
      h -= phi.d1(c, static_cast<int>(k)) * source.gamma[k];
    }
    h += phi.d1.transpose() * target[static_cast<std::size_t>(c)] * phi.d1;
    tau[c] = source.ginv.cwiseProduct(h).sum();
  }
  return tau;
}

Vector tension_field(const SmoothMap& phi, const MetricField& g, const MetricField& h,
                     const Vector& p) {
  if (phi.source_dim() != g.dim() || phi.target_dim() != h.dim()) {
    throw DimensionError("tension field: map " + std::to_string(phi.source_dim()) + "->" +
                         std::to_string(phi.target_dim()) + " against metrics of dimension " +
                         std::to_string(g.dim()) + " and " + std::to_string(h.dim()));
  }
  const FieldJet j = phi.jet(p, 2);
  const Connection src = connection(g.jet(p, 1), p);
  const Christoffel tgt = christoffel(h, j.value);
  return tension_field(j, src, tgt);
}

Matrix pullback_metric(const SmoothMap& psi, const MetricField& g, const Vector& p) {
  const FieldJet j = psi.jet(p, 1);
  return j.d1.transpose() * g.value(j.value) * j.d1;
}

Vector pullback_oneform(const SmoothMap& psi, const OneFormField& w, const Vector& p) {
  const FieldJet j = psi.jet(p, 1);
  return j.d1.transpose() * w.value(j.value);
}

MetricField pullback_metric_field(const SmoothMap& psi, const MetricField& g) {
  const int m = psi.source_dim();
  const int n = psi.target_dim();
  if (psi.fn().generic() && g.generic()) {
    const JetFn f = *psi.fn().generic();
    const JetFn gg = *g.generic();
    const int loss = psi.fn().order_loss() + std::max(1, g.order_loss());
    return MetricField::analytic(
        m,
        [f, gg, m, n](const JetVec& x) {
          const JetVec y = f(x);
          const JetVec gy = gg(y);
          std::vector<JetVec> dy(static_cast<std::size_t>(n));
          for (int a = 0; a < n; ++a) {
            for (int i = 0; i < m; ++i) dy[a].push_back(y[a].d(i));
          }
          JetVec out(static_cast<std::size_t>(m * m), Jet(0.0));
          for (int i = 0; i < m; ++i) {
            for (int j = i; j < m; ++j) {
              Jet s(0.0);
              for (int a = 0; a < n; ++a) {
                for (int b = 0; b < n; ++b) {
                  const Jet& gab = a <= b ? gy[a * n + b] : gy[b * n + a];
                  s += dy[a][i] * dy[b][j] * gab;
                }
              }
              out[i * m + j] = s;
            }
          }
          return out;
        },
        loss);
  }
  return MetricField::sampled(m, [psi, g](const Vector& p) { return pullback_metric(psi, g, p); });
}

OneFormField pullback_oneform_field(const SmoothMap& psi, const OneFormField& w) {
  const int m = psi.source_dim();
  const int n = psi.target_dim();
  if (psi.fn().generic() && w.fn().generic()) {
    const JetFn f = *psi.fn().generic();
    const JetFn ww = *w.fn().generic();
    const int loss = psi.fn().order_loss() + std::max(1, w.fn().order_loss());
    return OneFormField(ComponentFunction::analytic(
        m, m,
        [f, ww, m, n](const JetVec& x) {
          const JetVec y = f(x);
          const JetVec wy = ww(y);
          JetVec out;
          for (int i = 0; i < m; ++i) {
            Jet s(0.0);
            for (int a = 0; a < n; ++a) s += y[a].d(i) * wy[a];
            out.push_back(s);
          }
          return out;
        },
        loss));
  }
  return OneFormField(ComponentFunction::sampled(
      m, m, [psi, w](const Vector& p) { return pullback_oneform(psi, w, p); }));
}

Vector sharp(const Vector& w, const Matrix& g, const Vector& p) { return inverse_metric(g, p) * w; }

Vector flat(const Vector& x, const Matrix& g) { return g * x; }

Vector sharp(const OneFormField& w, const MetricField& g, const Vector& p) {
  return sharp(w.value(p), g.value(p), p);
}

Vector flat(const VectorFieldSpec& x, const MetricField& g, const Vector& p) {
  return flat(x.value(p), g.value(p));
}

OneFormField flat_field(const VectorFieldSpec& x, const MetricField& g) {
  const int m = g.dim();
  if (x.fn().generic() && g.generic()) {
    const JetFn fx = *x.fn().generic();
    const JetFn fg = *g.generic();
    return OneFormField(ComponentFunction::analytic(
        m, m,
        [fx, fg, m](const JetVec& p) {
          const JetVec xv = fx(p);
          const JetVec gv = fg(p);
          JetVec out;
          for (int i = 0; i < m; ++i) {
            Jet s(0.0);
            for (int j = 0; j < m; ++j) s += (i <= j ? gv[i * m + j] : gv[j * m + i]) * xv[j];
            out.push_back(s);
          }
          return out;
        },
        std::max(x.fn().order_loss(), g.order_loss())));
  }
  return OneFormField(
      ComponentFunction::sampled(m, m, [x, g](const Vector& p) { return flat(x, g, p); }));
}

double norm_sq_vector(const Vector& x, const Matrix& g) { return x.dot(g * x); }

double norm_sq_covector(const Vector& w, const Matrix& ginv) { return w.dot(ginv * w); }

double norm_sq_tensor(const Matrix& t, const Matrix& ginv) {
  return (ginv * t * ginv).cwiseProduct(t).sum();
}

Matrix exterior_derivative(const VectorJet& w) {
  if (w.order < 1) throw UnsupportedError("exterior derivative needs first derivatives");
  // d1(j, i) = d_i w_j
  return w.d1.transpose() - w.d1;
}

Matrix exterior_derivative_oneform(const OneFormField& w, const Vector& p) {
  return exterior_derivative(w.jet(p, 1));
}

VectorJet deturck_field(const MetricJet& gt, const MetricJet& gb, const Vector& p) {
  const int m = gt.dim();
  const Connection ct = connection(gt, p);
  const Connection cb = connection(gb, p);
  VectorJet z;
  z.value = Vector::Zero(m);
  std::vector<Matrix> diff(m);
  for (int l = 0; l < m; ++l) {
    diff[l] = cb.gamma[l] - ct.gamma[l];
    z.value[l] = ct.ginv.cwiseProduct(diff[l]).sum();
  }
  z.d1 = Matrix::Zero(m, m);
  if (ct.dgamma.empty() || cb.dgamma.empty()) return z;
  z.order = 1;
  for (int k = 0; k < m; ++k) {
    const Matrix dginv = -ct.ginv * gt.d1[k] * ct.ginv;
    for (int l = 0; l < m; ++l) {
      z.d1(l, k) = dginv.cwiseProduct(diff[l]).sum() +
                   ct.ginv.cwiseProduct(cb.dgamma[k][l] - ct.dgamma[k][l]).sum();
    }
  }
  return z;
}

Vector deturck_field(const MetricField& gt, const MetricField& gb, const Vector& p) {
  return deturck_field(gt.jet(p, 1), gb.jet(p, 1), p).value;
}

}  // namespace rlab
