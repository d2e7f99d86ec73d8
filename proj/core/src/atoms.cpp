#include "hhardy/atoms.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace hh {

int critical_moment_order(const OrliczSpec& phi, int n) {
  check_n(n);
  const auto i = phi.lower_index();
  require(i.has_value() && *i > 0.0, ErrorKind::configuration,
          "critical moment order needs the lower index of " + phi.name());
  const double k = std::floor(1.0 / *i - 1.0 + 1e-12) + 1.0;
  return std::max(0, int(k)) * homogeneous_dimension(n);
}

void local_monomials(const std::vector<MultiIndex>& basis, const HPoint& center, double radius, const double* z,
                     double* out) {
  const int n = center.n(), d = 2 * n + 1;
  double u[kMaxDim];
  for (int k = 0; k < 2 * n; ++k) u[k] = (z[k] - center.x(k)) / radius;
  u[2 * n] = (z[2 * n] - center.t() - symplectic(n, center.coords().data(), z)) / (radius * radius);
  for (std::size_t b = 0; b < basis.size(); ++b) {
    double v = 1.0;
    for (int k = 0; k < d; ++k)
      for (int p = 0; p < basis[b].e[k]; ++p) v *= u[k];
    out[b] = v;
  }
}

double LocalPolynomial::operator()(const double* z) const {
  std::vector<double> mono(basis.size());
  local_monomials(basis, center, radius, z, mono.data());
  double s = 0.0;
  for (std::size_t b = 0; b < basis.size(); ++b) s += coeffs[b] * mono[b];
  return s;
}

double LocalPolynomial::operator()(const HPoint& z) const { return (*this)(z.coords().data()); }

namespace {

struct GramSystem {
  Eigen::MatrixXd G;
  Eigen::VectorXd rhs;
};

GramSystem assemble(const GridSpec& g, const GridFunction* f, const GridFunction* weight, const KoranyiBall& ball,
                    const std::vector<MultiIndex>& basis) {
  const int d = g.dim();
  const std::size_t nb = basis.size();
  GramSystem s{Eigen::MatrixXd::Zero(nb, nb), Eigen::VectorXd::Zero(nb)};
  const std::vector<double> c = g.centers();
  std::vector<double> mono(nb);
  const double vol = g.cell_volume();
  for (std::size_t i = 0; i < g.size(); ++i) {
    double w;
    if (weight) {
      w = (*weight)[i];
      if (w == 0.0) continue;
    } else {
      if (!ball.contains(g.center(i))) continue;
      w = 1.0;
    }
    local_monomials(basis, ball.center, ball.radius, &c[i * d], mono.data());
    for (std::size_t a = 0; a < nb; ++a) {
      const double wa = w * vol * mono[a];
      for (std::size_t b = a; b < nb; ++b) s.G(a, b) += wa * mono[b];
      if (f) s.rhs[a] += wa * (*f)[i];
    }
  }
  for (std::size_t a = 0; a < nb; ++a)
    for (std::size_t b = 0; b < a; ++b) s.G(a, b) = s.G(b, a);
  return s;
}

}  // namespace

LocalPolynomial moment_projection(const GridFunction& f, const GridFunction& weight, const KoranyiBall& ball, int m) {
  require(m >= 0, ErrorKind::configuration, "moment order must be non-negative");
  require(f.spec() == weight.spec(), ErrorKind::configuration, "function and weight must share a grid");
  LocalPolynomial p;
  p.center = ball.center;
  p.radius = ball.radius;
  p.basis = monomial_basis(f.spec().n, m);
  const GramSystem s = assemble(f.spec(), &f, &weight, ball, p.basis);
  const Eigen::VectorXd c = s.G.completeOrthogonalDecomposition().solve(s.rhs);
  p.coeffs.assign(c.data(), c.data() + c.size());
  return p;
}

std::vector<double> moment_gram(const GridSpec& grid, const KoranyiBall& ball, int m) {
  const auto basis = monomial_basis(grid.n, m);
  const GramSystem s = assemble(grid, nullptr, nullptr, ball, basis);
  std::vector<double> out(s.G.size());
  for (Eigen::Index a = 0; a < s.G.rows(); ++a)
    for (Eigen::Index b = 0; b < s.G.cols(); ++b) out[a * s.G.cols() + b] = s.G(a, b);
  return out;
}

double smallest_eigenvalue(const std::vector<double>& symmetric, int size) {
  require(int(symmetric.size()) == size * size, ErrorKind::configuration, "matrix size mismatch");
  const Eigen::Map<const Eigen::MatrixXd> M(symmetric.data(), size, size);
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M, Eigen::EigenvaluesOnly).eigenvalues()[0];
}

namespace {

double size_bound_for(const KoranyiBall& ball, const OrliczSpec& phi, double p0) {
  const double vol = ball_volume(ball.radius, ball.center.n());
  const double chi = indicator_norm(vol, phi);
  return std::isinf(p0) ? 1.0 / chi : std::pow(vol, 1.0 / p0) / chi;
}

void check_exponent(const OrliczSpec& phi, double p0) {
  const double upper = phi.upper_index().value_or(1.0);
  require(p0 > std::max(1.0, upper), ErrorKind::parameter,
          "atom exponent must satisfy p0 > max{1, I(Phi)}");
}

}  // namespace

double Atom::size_bound() const { return size_bound_for(ball, phi, p0); }

nlohmann::json Atom::to_json(const std::string& grid_ref) const {
  nlohmann::json p0j = std::isinf(p0) ? nlohmann::json("inf") : nlohmann::json(p0);
  return {{"ball", {{"center", ball.center.to_vector()}, {"radius", ball.radius}}},
          {"grid", grid_ref},
          {"params", {{"family", phi.name()}, {"phi", phi.params()}, {"p0", p0j}, {"m", m}}}};
}

nlohmann::json AtomValidation::to_json() const {
  return {{"support", support},   {"size", size},         {"moments", moments},
          {"outside_sup", outside_sup}, {"norm", norm}, {"bound", bound},
          {"moment_max", moment_max},   {"moment_tol", moment_tol}};
}

AtomValidation validate_atom(const Atom& a, const AtomTolerances& tol) { return validate_atom(a, a.p0, tol); }

AtomValidation validate_atom(const Atom& a, double p0, const AtomTolerances& tol) {
  std::vector<std::size_t> cells;
  std::vector<double> values;
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    if (a.samples[i] != 0.0) {
      cells.push_back(i);
      values.push_back(a.samples[i]);
    }
  return validate_atom(a.samples.spec(), cells, values, a.ball, a.phi, p0, a.m, tol);
}

AtomValidation validate_atom(const GridSpec& g, const std::vector<std::size_t>& cells,
                             const std::vector<double>& values, const KoranyiBall& ball, const OrliczSpec& phi,
                             double p0, int m, const AtomTolerances& tol) {
  require(cells.size() == values.size(), ErrorKind::configuration, "cell and value lists differ in length");
  const int n = g.n, d = g.dim();
  const double r = ball.radius;
  for (int k = 0; k < d; ++k) {
    const double extent = k < 2 * n ? 2.0 * r : 2.0 * r * r;
    require(extent / g.spacing(k) >= tol.min_cells_across, ErrorKind::resolution,
            "grid resolves the atom ball with fewer than " + std::to_string(tol.min_cells_across) + " cells");
  }
  AtomValidation v;
  double sup = 0.0, sum_p = 0.0;
  for (std::size_t s = 0; s < cells.size(); ++s) {
    const double x = std::abs(values[s]);
    sup = std::max(sup, x);
    if (!std::isinf(p0)) sum_p += std::pow(x, p0);
    if (x != 0.0 && !ball.contains(g.center(cells[s]))) v.outside_sup = std::max(v.outside_sup, x);
  }
  v.support = v.outside_sup == 0.0;

  v.norm = std::isinf(p0) ? sup : std::pow(sum_p * g.cell_volume(), 1.0 / p0);
  v.bound = size_bound_for(ball, phi, p0);
  v.size = v.norm <= v.bound * (1.0 + tol.size_rel);

  const auto basis = monomial_basis(n, m);
  std::vector<double> mom(basis.size(), 0.0), mono(basis.size());
  for (std::size_t s = 0; s < cells.size(); ++s) {
    if (values[s] == 0.0) continue;
    const HPoint z = g.center(cells[s]);
    local_monomials(basis, ball.center, r, z.coords().data(), mono.data());
    for (std::size_t b = 0; b < basis.size(); ++b) mom[b] += values[s] * mono[b] * g.cell_volume();
  }
  for (double x : mom) v.moment_max = std::max(v.moment_max, std::abs(x));
  v.moment_tol = tol.moment_rel * sup * ball_volume(r, n);
  v.moments = v.moment_max <= v.moment_tol;
  return v;
}

Atom make_atom(const GridSpec& grid, const SmoothField& bump, const KoranyiBall& ball, const OrliczSpec& phi,
               double p0, int m) {
  return make_atom(GridFunction::sample(grid, [&](const HPoint& z) { return bump(z); }), ball, phi, p0, m);
}

Atom make_atom(const GridFunction& bump, const KoranyiBall& ball, const OrliczSpec& phi, double p0, int m) {
  const GridSpec& g = bump.spec();
  require(ball.center.n() == g.n, ErrorKind::configuration, "ball and grid dimension differ");
  require(m >= 0, ErrorKind::configuration, "moment order must be non-negative");
  check_exponent(phi, p0);
  if (phi.lower_index()) {
    const int mphi = critical_moment_order(phi, g.n);
    require(m >= mphi, ErrorKind::parameter,
            "moment order " + std::to_string(m) + " is below m_Phi = " + std::to_string(mphi));
  }
  const GridFunction chi = GridFunction::indicator(g, ball);
  GridFunction f = bump;
  for (std::size_t i = 0; i < g.size(); ++i) f[i] *= chi[i];
  const LocalPolynomial p = moment_projection(f, chi, ball, m);
  const std::vector<double> c = g.centers();
  GridFunction a(g);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (chi[i] != 0.0) a[i] = f[i] - p(&c[i * g.dim()]);
  // One refinement sweep removes the round-off left by the first solve.
  const LocalPolynomial p2 = moment_projection(a, chi, ball, m);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (chi[i] != 0.0) a[i] -= p2(&c[i * g.dim()]);
  const double before = f.lp_norm(2.0), after = a.lp_norm(2.0);
  require(before > 0.0 && after > 1e-10 * before, ErrorKind::degenerate,
          "bump lies in the span of the moment monomials on the ball");
  Atom out;
  out.ball = ball;
  out.phi = phi;
  out.p0 = p0;
  out.m = m;
  const double norm = std::isinf(p0) ? a.sup_norm() : a.lp_norm(p0);
  a *= out.size_bound() / norm;
  out.samples = std::move(a);
  return out;
}

}  // namespace hh
