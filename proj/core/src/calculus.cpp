#include "hhardy/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hh {

MultiIndex::MultiIndex(std::vector<int> entries) : e(std::move(entries)) {
  require(e.size() % 2 == 1 && e.size() >= 3, ErrorKind::configuration, "multi-index needs 2n+1 entries");
  for (int v : e) require(v >= 0, ErrorKind::configuration, "multi-index entries must be non-negative");
}

int MultiIndex::length() const {
  int s = 0;
  for (int v : e) s += v;
  return s;
}

int MultiIndex::homogeneous_degree() const { return length() + e.back(); }

std::vector<MultiIndex> monomial_basis(int n, int k) {
  check_n(n);
  require(k >= 0, ErrorKind::configuration, "degree must be non-negative");
  const int d = 2 * n + 1;
  std::vector<MultiIndex> out;
  std::vector<int> cur(d, 0);
  // Enumerate all exponent vectors with bounded degree, then sort.
  std::function<void(int, int)> rec = [&](int pos, int budget) {
    if (pos == d) {
      out.emplace_back(cur);
      return;
    }
    const int w = pos == d - 1 ? 2 : 1;
    for (int v = 0; v * w <= budget; ++v) {
      cur[pos] = v;
      rec(pos + 1, budget - v * w);
    }
    cur[pos] = 0;
  };
  rec(0, k);
  std::sort(out.begin(), out.end(), [](const MultiIndex& a, const MultiIndex& b) {
    const int da = a.homogeneous_degree(), db = b.homogeneous_degree();
    if (da != db) return da < db;
    return a.e > b.e;
  });
  return out;
}

Polynomial::Polynomial(int n) : n_(n), dim_(2 * n + 1), maxexp_(2 * n + 1, 0) { check_n(n); }

Polynomial Polynomial::constant(int n, double c) {
  Polynomial p(n);
  if (c != 0.0) p.assign({{std::vector<int>(2 * n + 1, 0), c}});
  return p;
}

Polynomial Polynomial::coordinate(int n, int k) {
  Polynomial p(n);
  require(k >= 0 && k < 2 * n + 1, ErrorKind::configuration, "coordinate index out of range");
  std::vector<int> e(2 * n + 1, 0);
  e[k] = 1;
  p.assign({{e, 1.0}});
  return p;
}

Polynomial Polynomial::monomial(const MultiIndex& I, double c) {
  Polynomial p(I.n());
  if (c != 0.0) p.assign({{I.e, c}});
  return p;
}

std::map<std::vector<int>, double> Polynomial::terms() const {
  std::map<std::vector<int>, double> m;
  for (std::size_t t = 0; t < coef_.size(); ++t)
    m[std::vector<int>(exps_.begin() + t * dim_, exps_.begin() + (t + 1) * dim_)] += coef_[t];
  return m;
}

void Polynomial::assign(const std::map<std::vector<int>, double>& m) {
  exps_.clear();
  coef_.clear();
  std::fill(maxexp_.begin(), maxexp_.end(), 0);
  for (const auto& [e, c] : m) {
    if (c == 0.0) continue;
    for (int k = 0; k < dim_; ++k) {
      exps_.push_back(e[k]);
      maxexp_[k] = std::max(maxexp_[k], e[k]);
    }
    coef_.push_back(c);
  }
}

int Polynomial::homogeneous_degree() const {
  int d = 0;
  for (std::size_t t = 0; t < coef_.size(); ++t) {
    int s = 0;
    for (int k = 0; k < dim_; ++k) s += exps_[t * dim_ + k] * (k == dim_ - 1 ? 2 : 1);
    d = std::max(d, s);
  }
  return d;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  require(o.n_ == n_, ErrorKind::configuration, "polynomials over different groups");
  auto m = terms();
  for (const auto& [e, c] : o.terms()) m[e] += c;
  assign(m);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  Polynomial neg = o;
  neg *= -1.0;
  return *this += neg;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    assign({});
    return *this;
  }
  for (double& c : coef_) c *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  require(a.n_ == b.n_, ErrorKind::configuration, "polynomials over different groups");
  std::map<std::vector<int>, double> m;
  std::vector<int> e(a.dim_);
  for (std::size_t i = 0; i < a.coef_.size(); ++i)
    for (std::size_t j = 0; j < b.coef_.size(); ++j) {
      for (int k = 0; k < a.dim_; ++k) e[k] = a.exps_[i * a.dim_ + k] + b.exps_[j * a.dim_ + k];
      m[e] += a.coef_[i] * b.coef_[j];
    }
  Polynomial r(a.n_);
  r.assign(m);
  return r;
}

Polynomial Polynomial::derivative(int k) const {
  std::map<std::vector<int>, double> m;
  for (std::size_t t = 0; t < coef_.size(); ++t) {
    const int ek = exps_[t * dim_ + k];
    if (ek == 0) continue;
    std::vector<int> e(exps_.begin() + t * dim_, exps_.begin() + (t + 1) * dim_);
    e[k] -= 1;
    m[e] += coef_[t] * ek;
  }
  Polynomial r(n_);
  r.assign(m);
  return r;
}

Polynomial Polynomial::apply_field(int i) const {
  require(i >= 1 && i <= dim_, ErrorKind::configuration, "vector field index out of range");
  const int t = dim_ - 1;
  if (i == dim_) return derivative(t);
  const int k = i - 1;
  Polynomial dt = derivative(t);
  if (k < n_) return derivative(k) + 2.0 * (Polynomial::coordinate(n_, k + n_) * dt);
  return derivative(k) - 2.0 * (Polynomial::coordinate(n_, k - n_) * dt);
}

Polynomial Polynomial::apply(const MultiIndex& I) const {
  Polynomial r = *this;
  for (int k = dim_ - 1; k >= 0; --k)
    for (int c = 0; c < I.e[k]; ++c) r = r.apply_field(k + 1);
  return r;
}

double Polynomial::evaluate(const double* z) const {
  if (coef_.empty()) return 0.0;
  // Power table per coordinate.
  double pw[kMaxDim][32];
  for (int k = 0; k < dim_; ++k) {
    require(maxexp_[k] < 32, ErrorKind::unsupported, "polynomial degree too high");
    pw[k][0] = 1.0;
    for (int e = 1; e <= maxexp_[k]; ++e) pw[k][e] = pw[k][e - 1] * z[k];
  }
  double s = 0.0;
  const int* ep = exps_.data();
  for (std::size_t t = 0; t < coef_.size(); ++t, ep += dim_) {
    double v = coef_[t];
    for (int k = 0; k < dim_; ++k) v *= pw[k][ep[k]];
    s += v;
  }
  return s;
}

Polynomial Polynomial::left_translate(const HPoint& z0) const {
  require(z0.n() == n_, ErrorKind::configuration, "translation point has wrong n");
  std::vector<Polynomial> sub;
  for (int k = 0; k < 2 * n_; ++k) sub.push_back(Polynomial::constant(n_, z0.x(k)) + Polynomial::coordinate(n_, k));
  Polynomial tt = Polynomial::constant(n_, z0.t()) + Polynomial::coordinate(n_, dim_ - 1);
  // symplectic(z0, w) is linear in w.
  for (int i = 0; i < n_; ++i) {
    tt += 2.0 * z0.x(i + n_) * Polynomial::coordinate(n_, i);
    tt -= 2.0 * z0.x(i) * Polynomial::coordinate(n_, i + n_);
  }
  sub.push_back(tt);
  std::vector<std::vector<Polynomial>> powers(dim_);
  for (int k = 0; k < dim_; ++k) {
    powers[k].push_back(Polynomial::constant(n_, 1.0));
    for (int e = 1; e <= maxexp_[k]; ++e) powers[k].push_back(powers[k].back() * sub[k]);
  }
  Polynomial r(n_);
  for (std::size_t t = 0; t < coef_.size(); ++t) {
    Polynomial term = Polynomial::constant(n_, coef_[t]);
    for (int k = 0; k < dim_; ++k) {
      const int e = exps_[t * dim_ + k];
      if (e > 0) term = term * powers[k][e];
    }
    r += term;
  }
  return r;
}

AlgebraicField AlgebraicField::polynomial(const Polynomial& p) {
  AlgebraicField f;
  f.base_ = Polynomial::constant(p.n(), 1.0);
  f.add_term(0.0, p);
  return f;
}

AlgebraicField AlgebraicField::power(const Polynomial& base, double exponent, bool cutoff,
                                     const std::optional<Polynomial>& coeff) {
  AlgebraicField f;
  f.base_ = base;
  f.cutoff_ = cutoff;
  f.add_term(exponent, coeff ? *coeff : Polynomial::constant(base.n(), 1.0));
  return f;
}

std::size_t AlgebraicField::size() const {
  std::size_t s = 0;
  for (const auto& t : terms_) s += t.coeff.term_count();
  return s;
}

void AlgebraicField::add_term(double exponent, const Polynomial& p) {
  if (p.is_zero()) return;
  for (auto& t : terms_)
    if (t.exponent == exponent) {
      t.coeff += p;
      return;
    }
  terms_.push_back({exponent, p});
}

double AlgebraicField::evaluate(const double* z) const {
  if (terms_.empty()) return 0.0;
  const double b = base_.evaluate(z);
  if (cutoff_ && b <= 0.0) return 0.0;
  double s = 0.0;
  for (const auto& t : terms_) {
    const double c = t.coeff.evaluate(z);
    s += t.exponent == 0.0 ? c : c * std::pow(b, t.exponent);
  }
  return s;
}

AlgebraicField AlgebraicField::apply_field(int i) const {
  AlgebraicField r;
  r.base_ = base_;
  r.cutoff_ = cutoff_;
  const Polynomial db = base_.apply_field(i);
  for (const auto& t : terms_) {
    r.add_term(t.exponent, t.coeff.apply_field(i));
    if (t.exponent != 0.0 && !db.is_zero()) r.add_term(t.exponent - 1.0, t.exponent * (t.coeff * db));
  }
  return r;
}

AlgebraicField AlgebraicField::apply(const MultiIndex& I) const {
  AlgebraicField r = *this;
  for (int k = int(I.e.size()) - 1; k >= 0; --k)
    for (int c = 0; c < I.e[k]; ++c) r = r.apply_field(k + 1);
  return r;
}

AlgebraicField& AlgebraicField::operator*=(double s) {
  for (auto& t : terms_) t.coeff *= s;
  return *this;
}

AlgebraicField& AlgebraicField::operator+=(const AlgebraicField& o) {
  if (terms_.empty()) {
    *this = o;
    return *this;
  }
  if (o.terms_.empty()) return *this;
  require(o.cutoff_ == cutoff_ && (o.base_ - base_).is_zero(), ErrorKind::unsupported,
          "adding algebraic fields with different bases");
  for (const auto& t : o.terms_) add_term(t.exponent, t.coeff);
  return *this;
}

SmoothField SmoothField::from(const AlgebraicField& f) {
  SmoothField s;
  s.n = f.n();
  s.exact = f;
  s.eval = [f](const HPoint& z) { return f.evaluate(z); };
  return s;
}

SmoothField SmoothField::from(int n, std::function<double(const HPoint&)> fn) {
  SmoothField s;
  s.n = n;
  s.eval = std::move(fn);
  return s;
}

namespace {

HPoint step_point(const HPoint& z, int k, double h) {
  HPoint e(z.n());
  e.coord(k) = h;
  return multiply(z, e);
}

double nested_difference(const SmoothField& f, const std::vector<int>& ops, std::size_t pos, const HPoint& z,
                         double h) {
  if (pos == ops.size()) return f(z);
  const int k = ops[pos];
  return (nested_difference(f, ops, pos + 1, step_point(z, k, h), h) -
          nested_difference(f, ops, pos + 1, step_point(z, k, -h), h)) /
         (2.0 * h);
}

// Larger steps for deeper nesting keep roundoff below truncation error.
double fd_step(double base, int order) {
  return std::max(base, std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (order + 2)));
}

}  // namespace

double vector_field(int i, const SmoothField& f, const HPoint& z, const DerivativeOptions& opt) {
  MultiIndex I = MultiIndex::zero(z.n());
  require(i >= 1 && i <= z.dim(), ErrorKind::configuration, "vector field index out of range");
  I.e[i - 1] = 1;
  return apply_multiindex(I, f, z, opt);
}

double apply_multiindex(const MultiIndex& I, const SmoothField& f, const HPoint& z, const DerivativeOptions& opt) {
  require(I.n() == z.n() && f.n == z.n(), ErrorKind::configuration, "dimension mismatch in derivative");
  if (opt.prefer_exact && f.exact) return f.exact->apply(I).evaluate(z);
  require(I.homogeneous_degree() <= opt.max_fd_degree, ErrorKind::unsupported,
          "finite-difference derivative of degree " + std::to_string(I.homogeneous_degree()) + " exceeds limit " +
              std::to_string(opt.max_fd_degree));
  std::vector<int> ops;
  for (int k = 0; k < int(I.e.size()); ++k)
    for (int c = 0; c < I.e[k]; ++c) ops.push_back(k);
  return nested_difference(f, ops, 0, z, fd_step(opt.step, int(ops.size())));
}

double sublaplacian(const SmoothField& f, const HPoint& z, const DerivativeOptions& opt) {
  double s = 0.0;
  for (int i = 0; i < 2 * z.n(); ++i) {
    MultiIndex I = MultiIndex::zero(z.n());
    I.e[i] = 2;
    s += apply_multiindex(I, f, z, opt);
  }
  return -s;
}

AlgebraicField sublaplacian(const AlgebraicField& f) {
  AlgebraicField r;
  for (int i = 1; i <= 2 * f.n(); ++i) r += f.apply_field(i).apply_field(i);
  r *= -1.0;
  return r;
}

double schwartz_seminorm(const SmoothField& phi, int N, const Box& box, int resolution,
                         const DerivativeOptions& opt) {
  const int n = phi.n;
  const int d = 2 * n + 1;
  require(N >= 0, ErrorKind::configuration, "seminorm order must be non-negative");
  require(int(box.lo.size()) == d && int(box.hi.size()) == d, ErrorKind::configuration, "box dimension mismatch");
  require(resolution >= 2, ErrorKind::configuration, "seminorm lattice needs resolution >= 2");
  const bool exact = opt.prefer_exact && phi.exact.has_value();
  require(exact || N <= opt.max_fd_degree, ErrorKind::unsupported,
          "seminorm order " + std::to_string(N) + " needs an exact derivative form");

  // Lattice vertices.
  std::vector<HPoint> pts;
  std::vector<double> weight;
  std::vector<int> idx(d, 0);
  for (;;) {
    HPoint z(n);
    for (int k = 0; k < d; ++k) z.coord(k) = box.lo[k] + (box.hi[k] - box.lo[k]) * idx[k] / resolution;
    pts.push_back(z);
    weight.push_back(std::pow(1.0 + koranyi_norm(z), N));
    int k = d - 1;
    while (k >= 0 && ++idx[k] > resolution) idx[k--] = 0;
    if (k < 0) break;
  }

  double total = 0.0;
  auto sup_of = [&](const std::function<double(const HPoint&)>& g) {
    double s = 0.0;
    for (std::size_t p = 0; p < pts.size(); ++p) s = std::max(s, weight[p] * std::abs(g(pts[p])));
    return s;
  };

  if (exact) {
    // Depth-first over exponents, innermost field first, so each node costs one application.
    std::function<void(int, int, const AlgebraicField&)> rec = [&](int k, int budget, const AlgebraicField& g) {
      if (k < 0) {
        total += sup_of([&](const HPoint& z) { return g.evaluate(z); });
        return;
      }
      const int w = k == d - 1 ? 2 : 1;
      AlgebraicField cur = g;
      for (int e = 0; e * w <= budget; ++e) {
        rec(k - 1, budget - e * w, cur);
        if ((e + 1) * w <= budget) cur = cur.apply_field(k + 1);
      }
    };
    rec(d - 1, N, *phi.exact);
  } else {
    for (const auto& I : monomial_basis(n, N))
      total += sup_of([&](const HPoint& z) { return apply_multiindex(I, phi, z, opt); });
  }
  return total;
}

std::vector<std::vector<double>> first_order_taylor_system(const HPoint& z0) {
  const int n = z0.n();
  std::vector<Polynomial> basis{Polynomial::constant(n, 1.0)};
  for (int k = 0; k < 2 * n; ++k) basis.push_back(Polynomial::coordinate(n, k));
  std::vector<std::vector<double>> rows;
  std::vector<double> r0;
  for (const auto& p : basis) r0.push_back(p.evaluate(z0));
  rows.push_back(r0);
  for (int i = 1; i <= 2 * n; ++i) {
    std::vector<double> r;
    for (const auto& p : basis) r.push_back(p.apply_field(i).evaluate(z0));
    rows.push_back(r);
  }
  return rows;
}

namespace {

// rho(c^{-1} z)^4 as a polynomial in z.
Polynomial translated_norm4(const HPoint& c) {
  const int n = c.n();
  const int d = 2 * n + 1;
  Polynomial r2(n);
  for (int k = 0; k < 2 * n; ++k) {
    Polynomial u = Polynomial::coordinate(n, k) - Polynomial::constant(n, c.x(k));
    r2 += u * u;
  }
  Polynomial ut = Polynomial::coordinate(n, d - 1) - Polynomial::constant(n, c.t());
  for (int i = 0; i < n; ++i) {
    ut -= 2.0 * c.x(i + n) * Polynomial::coordinate(n, i);
    ut += 2.0 * c.x(i) * Polynomial::coordinate(n, i + n);
  }
  return r2 * r2 + ut * ut;
}

}  // namespace

AlgebraicField radial_bump(const HPoint& center, double radius, int k, const std::vector<double>& q_coeffs) {
  require(radius > 0.0, ErrorKind::domain, "bump radius must be positive");
  require(k >= 1, ErrorKind::configuration, "bump exponent must be at least 1");
  const int n = center.n();
  const Polynomial s = translated_norm4(center) * (1.0 / std::pow(radius, 4));
  const Polynomial base = Polynomial::constant(n, 1.0) - s;
  Polynomial q(n), sp = Polynomial::constant(n, 1.0);
  for (double c : q_coeffs) {
    q += c * sp;
    sp = sp * s;
  }
  return AlgebraicField::power(base, double(k), true, q);
}

AlgebraicField koranyi_power(int n, double alpha) {
  return AlgebraicField::power(translated_norm4(identity(n)), alpha / 4.0, false);
}

}  // namespace hh
