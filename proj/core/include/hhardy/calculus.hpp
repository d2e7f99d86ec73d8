#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "hhardy/group.hpp"

namespace hh {

// Exponents (i_1, ..., i_{2n+1}); the last entry acts on t.
struct MultiIndex {
  std::vector<int> e;

  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> entries);
  static MultiIndex zero(int n) { return MultiIndex(std::vector<int>(2 * n + 1, 0)); }
  int n() const { return int(e.size() / 2); }
  int length() const;
  int homogeneous_degree() const;
  bool operator<(const MultiIndex& o) const { return e < o.e; }
  bool operator==(const MultiIndex& o) const { return e == o.e; }
};

// All I with d(I) <= k, graded by d(I) then lexicographic (x_1 first).
std::vector<MultiIndex> monomial_basis(int n, int k);

class Polynomial {
 public:
  explicit Polynomial(int n = 1);
  static Polynomial constant(int n, double c);
  static Polynomial coordinate(int n, int k);
  static Polynomial monomial(const MultiIndex& I, double c = 1.0);

  int n() const { return n_; }
  bool is_zero() const { return coef_.empty(); }
  std::size_t term_count() const { return coef_.size(); }
  int homogeneous_degree() const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  Polynomial derivative(int k) const;
  // X_i for i in [1, 2n+1].
  Polynomial apply_field(int i) const;
  Polynomial apply(const MultiIndex& I) const;
  double evaluate(const double* coords) const;
  double evaluate(const HPoint& z) const { return evaluate(z.coords().data()); }
  // p(z0 . w) as a polynomial in w.
  Polynomial left_translate(const HPoint& z0) const;
  std::map<std::vector<int>, double> terms() const;

 private:
  void assign(const std::map<std::vector<int>, double>& m);
  int n_;
  int dim_;
  std::vector<int> exps_;  // term-major, dim_ entries per term
  std::vector<double> coef_;
  std::vector<int> maxexp_;
};

// Sum_k p_k(z) B(z)^{e_k}. With cutoff the field vanishes where B <= 0.
class AlgebraicField {
 public:
  struct Term {
    double exponent;
    Polynomial coeff;
  };

  AlgebraicField() = default;
  static AlgebraicField polynomial(const Polynomial& p);
  static AlgebraicField power(const Polynomial& base, double exponent, bool cutoff,
                              const std::optional<Polynomial>& coeff = std::nullopt);

  int n() const { return base_.n(); }
  bool cutoff() const { return cutoff_; }
  const Polynomial& base() const { return base_; }
  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const;

  double evaluate(const double* coords) const;
  double evaluate(const HPoint& z) const { return evaluate(z.coords().data()); }
  AlgebraicField apply_field(int i) const;
  AlgebraicField apply(const MultiIndex& I) const;
  AlgebraicField& operator*=(double s);
  AlgebraicField& operator+=(const AlgebraicField& o);

 private:
  void add_term(double exponent, const Polynomial& p);
  Polynomial base_;
  bool cutoff_ = false;
  std::vector<Term> terms_;
};

struct SmoothField {
  int n = 1;
  std::function<double(const HPoint&)> eval;
  std::optional<AlgebraicField> exact;

  static SmoothField from(const AlgebraicField& f);
  static SmoothField from(int n, std::function<double(const HPoint&)> fn);
  double operator()(const HPoint& z) const { return eval(z); }
};

struct DerivativeOptions {
  double step = 1e-4;
  int max_fd_degree = 4;
  bool prefer_exact = true;
};

double vector_field(int i, const SmoothField& f, const HPoint& z, const DerivativeOptions& opt = {});
double apply_multiindex(const MultiIndex& I, const SmoothField& f, const HPoint& z,
                        const DerivativeOptions& opt = {});
double sublaplacian(const SmoothField& f, const HPoint& z, const DerivativeOptions& opt = {});
// Exact -sum X_i^2 f when f carries an exact form.
AlgebraicField sublaplacian(const AlgebraicField& f);

struct Box {
  std::vector<double> lo, hi;
};

// sum_{d(I) <= N} sup (1 + rho(z))^N |X^I phi(z)| over the vertices of a uniform lattice.
double schwartz_seminorm(const SmoothField& phi, int N, const Box& box, int resolution,
                         const DerivativeOptions& opt = {});

// Rows: evaluation at z0 and X_1..X_{2n} at z0, columns: the basis 1, x_1..x_{2n}.
std::vector<std::vector<double>> first_order_taylor_system(const HPoint& z0);

// Profile (1 - rho(c^{-1} z)^4 / R^4)^k q(rho(c^{-1}z)^4 / R^4) with compact support.
AlgebraicField radial_bump(const HPoint& center, double radius, int k,
                           const std::vector<double>& q_coeffs = {1.0});
// rho(z)^{-2n} as S^{-n/2}, S = |x|^4 + t^2.
AlgebraicField koranyi_power(int n, double alpha);

}  // namespace hh
