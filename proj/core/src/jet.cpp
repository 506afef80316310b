#include "rlab/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

namespace rlab {

namespace {

void enumerate_degree(int vars, int degree, int var, std::vector<int>& cur,
                      std::vector<std::vector<int>>& out) {
  if (var == vars - 1) {
    cur[var] = degree;
    out.push_back(cur);
    cur[var] = 0;
    return;
  }
  for (int e = degree; e >= 0; --e) {
    cur[var] = e;
    enumerate_degree(vars, degree - e, var + 1, cur, out);
  }
  cur[var] = 0;
}

}  // namespace

JetLayout::JetLayout(int vars) : vars_(vars) {
  if (vars < 1) throw std::invalid_argument("JetLayout: vars must be >= 1");
  std::vector<int> cur(static_cast<std::size_t>(vars), 0);
  size_upto_.resize(kMaxOrder + 1);
  for (int d = 0; d <= kMaxOrder; ++d) {
    enumerate_degree(vars, d, 0, cur, exponents_);
    size_upto_[d] = exponents_.size();
  }
  degree_.reserve(exponents_.size());
  std::map<std::vector<int>, std::size_t> index;
  for (std::size_t i = 0; i < exponents_.size(); ++i) {
    int deg = 0;
    for (int e : exponents_[i]) deg += e;
    degree_.push_back(deg);
    index.emplace(exponents_[i], i);
  }

  pair_.resize(static_cast<std::size_t>(vars * vars));
  for (int k = 0; k < vars; ++k) {
    for (int l = 0; l < vars; ++l) {
      std::vector<int> e(static_cast<std::size_t>(vars), 0);
      e[k] += 1;
      e[l] += 1;
      pair_[static_cast<std::size_t>(k * vars + l)] = index.at(e);
    }
  }

  std::vector<int> sum(static_cast<std::size_t>(vars));
  for (std::size_t i = 0; i < exponents_.size(); ++i) {
    for (std::size_t j = 0; j < exponents_.size(); ++j) {
      if (degree_[i] + degree_[j] > kMaxOrder) continue;
      for (int v = 0; v < vars; ++v) sum[v] = exponents_[i][v] + exponents_[j][v];
      products_.push_back({i, j, index.at(sum)});
    }
  }
  std::stable_sort(products_.begin(), products_.end(),
                   [this](const Product& a, const Product& b) {
                     return degree_[a.out] < degree_[b.out];
                   });
  product_count_.assign(kMaxOrder + 1, 0);
  for (int d = 0; d <= kMaxOrder; ++d) {
    product_count_[d] = static_cast<std::size_t>(
        std::count_if(products_.begin(), products_.end(),
                      [&](const Product& p) { return degree_[p.out] <= d; }));
  }

  derivative_.resize(static_cast<std::size_t>(vars));
  derivative_count_.assign(static_cast<std::size_t>(vars),
                           std::vector<std::size_t>(kMaxOrder + 1, 0));
  for (int v = 0; v < vars; ++v) {
    for (std::size_t dst = 0; dst < size_upto_[kMaxOrder - 1]; ++dst) {
      std::vector<int> src = exponents_[dst];
      src[v] += 1;
      derivative_[v].push_back({index.at(src), dst, static_cast<double>(src[v])});
    }
    for (int d = 0; d < kMaxOrder; ++d) derivative_count_[v][d] = size_upto_[d];
    derivative_count_[v][kMaxOrder] = size_upto_[kMaxOrder - 1];
  }
}

const JetLayout* JetLayout::get(int vars) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<const JetLayout>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[vars];
  if (!slot) slot = std::make_unique<const JetLayout>(vars);
  return slot.get();
}

std::size_t JetLayout::index_of(const std::vector<int>& exponent) const {
  auto it = std::find(exponents_.begin(), exponents_.end(), exponent);
  if (it == exponents_.end()) throw std::out_of_range("JetLayout: exponent out of range");
  return static_cast<std::size_t>(it - exponents_.begin());
}

Jet Jet::variable(const JetLayout* layout, int order, int var, double value) {
  if (order < 1) return Jet(value);
  if (order > JetLayout::kMaxOrder) {
    throw std::invalid_argument("Jet: order " + std::to_string(order) +
                                " exceeds the supported maximum");
  }
  Jet j;
  j.c_.assign(layout->size_upto(order), 0.0);
  j.c_[0] = value;
  j.c_[layout->unit(var)] = 1.0;
  j.layout_ = layout;
  j.order_ = order;
  return j;
}

double Jet::derivative(int k) const {
  if (order_ < 1) return 0.0;
  return c_[layout_->unit(k)];
}

double Jet::second_derivative(int k, int l) const {
  if (order_ < 2) return 0.0;
  const double c = c_[layout_->pair(k, l)];
  return k == l ? 2.0 * c : c;
}

double Jet::coefficient(const std::vector<int>& exponent) const {
  if (!layout_) {
    for (int e : exponent) {
      if (e != 0) return 0.0;
    }
    return c_[0];
  }
  const std::size_t idx = layout_->index_of(exponent);
  return idx < c_.size() ? c_[idx] : 0.0;
}

Jet Jet::d(int var) const {
  if (order_ < 1) return Jet(0.0);
  if (order_ == 1) return Jet(c_[layout_->unit(var)]);
  Jet r;
  r.layout_ = layout_;
  r.order_ = order_ - 1;
  r.c_.assign(layout_->size_upto(r.order_), 0.0);
  for (const auto& s : layout_->derivative(var, r.order_)) r.c_[s.dst] = s.factor * c_[s.src];
  return r;
}

Jet Jet::truncated(int order) const {
  if (order >= order_) return *this;
  if (order < 1) return Jet(c_[0]);
  Jet r = *this;
  r.order_ = order;
  r.c_.resize(layout_->size_upto(order));
  return r;
}

void Jet::align(const Jet& o) {
  if (o.is_constant()) return;
  if (is_constant()) {
    const double v = c_[0];
    layout_ = o.layout_;
    order_ = o.order_;
    c_.assign(layout_->size_upto(order_), 0.0);
    c_[0] = v;
    return;
  }
  if (layout_ != o.layout_) throw std::invalid_argument("Jet: mixing jets over different variables");
  if (o.order_ < order_) *this = truncated(o.order_);
}

Jet& Jet::operator+=(const Jet& o) {
  align(o);
  const std::size_t n = std::min(c_.size(), o.c_.size());
  for (std::size_t i = 0; i < n; ++i) c_[i] += o.c_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  align(o);
  const std::size_t n = std::min(c_.size(), o.c_.size());
  for (std::size_t i = 0; i < n; ++i) c_[i] -= o.c_[i];
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  if (b.is_constant()) {
    Jet r = a;
    for (double& c : r.c_) c *= b.c_[0];
    return r;
  }
  if (a.is_constant()) {
    Jet r = b;
    for (double& c : r.c_) c *= a.c_[0];
    return r;
  }
  if (a.layout_ != b.layout_) throw std::invalid_argument("Jet: mixing jets over different variables");
  Jet r;
  r.layout_ = a.layout_;
  r.order_ = std::min(a.order_, b.order_);
  r.c_.assign(r.layout_->size_upto(r.order_), 0.0);
  for (const auto& p : r.layout_->products(r.order_)) r.c_[p.out] += a.c_[p.lhs] * b.c_[p.rhs];
  return r;
}

Jet& Jet::operator*=(const Jet& o) { return *this = *this * o; }

Jet operator/(const Jet& a, const Jet& b) {
  if (b.is_constant()) {
    Jet r = a;
    for (double& c : r.c_) c /= b.c_[0];
    return r;
  }
  return a * reciprocal(b);
}

Jet& Jet::operator/=(const Jet& o) { return *this = *this / o; }

Jet operator-(Jet a) {
  for (double& c : a.c_) c = -c;
  return a;
}

Jet Jet::compose(const Jet& x, const Series& series) {
  if (x.is_constant()) return Jet(series[0]);
  Jet delta = x;
  delta.c_[0] = 0.0;
  Jet r(series[static_cast<std::size_t>(x.order_)]);
  for (int k = x.order_ - 1; k >= 0; --k) {
    r = r * delta;
    r.c_[0] += series[static_cast<std::size_t>(k)];
  }
  return r;
}

Jet exp(const Jet& x) {
  const double e = std::exp(x.value());
  Jet::Series s{};
  double fact = 1.0;
  for (std::size_t k = 0; k <= static_cast<std::size_t>(x.order_); ++k) {
    if (k > 0) fact *= static_cast<double>(k);
    s[k] = e / fact;
  }
  return Jet::compose(x, s);
}

Jet log(const Jet& x) {
  const double a = x.value();
  Jet::Series s{};
  s[0] = std::log(a);
  for (std::size_t k = 1; k <= static_cast<std::size_t>(x.order_); ++k) {
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    s[k] = sign / (static_cast<double>(k) * std::pow(a, static_cast<double>(k)));
  }
  return Jet::compose(x, s);
}

Jet pow(const Jet& x, double p) {
  const double a = x.value();
  Jet::Series s{};
  double binom = 1.0;
  for (std::size_t k = 0; k <= static_cast<std::size_t>(x.order_); ++k) {
    if (k > 0) binom *= (p - static_cast<double>(k - 1)) / static_cast<double>(k);
    s[k] = binom * std::pow(a, p - static_cast<double>(k));
  }
  return Jet::compose(x, s);
}

Jet sqrt(const Jet& x) { return pow(x, 0.5); }

Jet reciprocal(const Jet& x) {
  const double a = x.value();
  Jet::Series s{};
  double term = 1.0 / a;
  for (std::size_t k = 0; k <= static_cast<std::size_t>(x.order_); ++k) {
    s[k] = term;
    term *= -1.0 / a;
  }
  return Jet::compose(x, s);
}

namespace {

// k-th derivative of sin (cos when `cosine`) at a, divided by k!
Jet::Series trig_series(double a, int order, bool cosine) {
  Jet::Series s{};
  const double sa = std::sin(a);
  const double ca = std::cos(a);
  double fact = 1.0;
  for (std::size_t k = 0; k <= static_cast<std::size_t>(order); ++k) {
    if (k > 0) fact *= static_cast<double>(k);
    const std::size_t phase = (k + (cosine ? 1 : 0)) % 4;
    const double d = phase == 0 ? sa : phase == 1 ? ca : phase == 2 ? -sa : -ca;
    s[k] = d / fact;
  }
  return s;
}

}  // namespace

Jet sin(const Jet& x) { return Jet::compose(x, trig_series(x.value(), x.order_, false)); }
Jet cos(const Jet& x) { return Jet::compose(x, trig_series(x.value(), x.order_, true)); }

Jet square(const Jet& x) { return x * x; }

JetVec seed_point(std::span<const double> p, int order) {
  JetVec out;
  out.reserve(p.size());
  if (order < 1) {
    for (double v : p) out.emplace_back(v);
    return out;
  }
  auto layout = JetLayout::get(static_cast<int>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) {
    out.push_back(Jet::variable(layout, order, static_cast<int>(i), p[i]));
  }
  return out;
}

}  // namespace rlab
