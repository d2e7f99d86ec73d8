#include "hhardy/potential.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Dense>

namespace hh {

namespace {

double cn_integrand(int n, const HPoint& z) {
  double x2 = 0.0;
  for (int k = 0; k < 2 * n; ++k) x2 += z.x(k) * z.x(k);
  const double r4 = koranyi_norm4(n, z.coords().data());
  return x2 * std::pow(r4 + 1.0, -(n + 4) / 2.0);
}

}  // namespace

double cn_integral_polar(int n, int radial_order) {
  check_n(n);
  const int Q = homogeneous_dimension(n);
  // s = u / (1 - u) grades the radial nodes towards infinity.
  const GaussLegendre g = GaussLegendre::on(radial_order, 0.0, 1.0);
  double radial = 0.0;
  for (int i = 0; i < radial_order; ++i) {
    const double u = g.x[i], s = u / (1.0 - u), jac = 1.0 / ((1.0 - u) * (1.0 - u));
    radial += g.w[i] * jac * std::pow(s, Q + 1) * std::pow(std::pow(s, 4) + 1.0, -(n + 4) / 2.0);
  }
  const SphereRule sr = SphereRule::make(n, 16, 8);
  double angular = 0.0;
  for (std::size_t k = 0; k < sr.nodes.size(); ++k) {
    double x2 = 0.0;
    for (int j = 0; j < 2 * n; ++j) x2 += sr.nodes[k].x(j) * sr.nodes[k].x(j);
    angular += sr.weights[k] * x2;
  }
  return radial * angular;
}

double cn_integral_tensor(int n, double half_width, int res_x, int res_t) {
  check_n(n);
  require(res_x >= 2 && res_t >= 2 && half_width > 0.0, ErrorKind::configuration,
          "tensor rule needs two or more cells per axis and a positive box");
  const GridSpec g = GridSpec::symmetric(n, half_width, half_width * half_width, res_x, res_t);
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += cn_integrand(n, g.center(i));
  return s * g.cell_volume();
}

MonteCarloEstimate cn_integral_monte_carlo(int n, std::size_t samples, std::uint64_t seed) {
  check_n(n);
  require(samples >= 2, ErrorKind::configuration, "need at least two samples");
  // Importance sampling with independent standard Cauchy coordinates.
  std::mt19937_64 rng(seed);
  std::cauchy_distribution<double> c(0.0, 1.0);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    HPoint z(n);
    double dens = 1.0;
    for (int k = 0; k <= 2 * n; ++k) {
      const double v = c(rng);
      z.coord(k) = v;
      dens *= 1.0 / (std::numbers::pi * (1.0 + v * v));
    }
    const double w = cn_integrand(n, z) / dens;
    sum += w;
    sum2 += w * w;
  }
  const double mean = sum / samples;
  const double var = std::max(0.0, sum2 / samples - mean * mean);
  return {mean, std::sqrt(var / double(samples - 1)), static_cast<std::int64_t>(samples), seed};
}

double cn_constant(int n) {
  check_n(n);
  static std::array<std::once_flag, kMaxN + 1> once;
  static std::array<double, kMaxN + 1> cache{};
  std::call_once(once[n], [n] {
    const double a = cn_integral_polar(n, 48), b = cn_integral_polar(n, 64);
    require(std::abs(a - b) <= 1e-9 * std::abs(b), ErrorKind::accuracy,
            "c_n quadrature did not settle between radial orders 48 and 64");
    // 4 n (n+2) I: the generator X_i = d_i + 2 x_{i+n} d_t carries the factor 2, so L (rho^4 + 1)^{-n/2}
    // = 4 n (n+2) |x|^2 (rho^4 + 1)^{-(n+4)/2}.
    cache[n] = 1.0 / (4.0 * n * (n + 2) * b);
  });
  return cache[n];
}

double fundamental_kernel(const HPoint& z) {
  const int n = z.n();
  const double r4 = koranyi_norm4(n, z.coords().data());
  require(r4 > 0.0, ErrorKind::singularity, "fundamental solution is singular at the identity");
  return cn_constant(n) * std::pow(r4, -n / 2.0);
}

AlgebraicField fundamental_kernel_field(int n) {
  AlgebraicField k = koranyi_power(n, -2.0 * n);
  k *= cn_constant(n);
  return k;
}

AlgebraicField kernel_derivative_field(int n, const MultiIndex& I) { return koranyi_power(n, -2.0 * n).apply(I); }

double polar_integral(int n, const std::function<double(const HPoint&)>& f, double R, int n_radial, int n_phi,
                      int n_angle) {
  const SphereRule sr = SphereRule::make(n, n_phi, n_angle);
  const GaussLegendre g = GaussLegendre::on(n_radial, 0.0, R);
  const int Q = homogeneous_dimension(n);
  double s = 0.0;
  for (int i = 0; i < n_radial; ++i) {
    double shell = 0.0;
    for (std::size_t k = 0; k < sr.nodes.size(); ++k) shell += sr.weights[k] * f(dilate(g.x[i], sr.nodes[k]));
    s += g.w[i] * std::pow(g.x[i], Q - 1) * shell;
  }
  return s;
}

double fundamental_pairing(const AlgebraicField& u, double R, int n_radial, int n_phi, int n_angle) {
  const AlgebraicField lu = sublaplacian(u);
  return polar_integral(
      u.n(), [&](const HPoint& z) { return lu.evaluate(z) * fundamental_kernel(z); }, R, n_radial, n_phi, n_angle);
}

void SolverConfig::validate(int n) const {
  check_n(n);
  require(q > 1.0 && q < (n + 1.0) / n, ErrorKind::parameter, "q must satisfy 1 < q < (n+1)/n");
  require(beta >= 1.0, ErrorKind::configuration, "beta must be at least 1");
  require(refine >= 2 && refine % 2 == 0, ErrorKind::configuration, "singular-cell refinement must be even");
  require(near_cells >= 0, ErrorKind::configuration, "near-cell band must be non-negative");
  require(n_radial >= 1 && n_phi >= 1 && n_angle >= 1 && restarts >= 1, ErrorKind::configuration,
          "quadrature orders and restarts must be positive");
  for (double r : radii) require(r > 0.0, ErrorKind::configuration, "radii must be positive");
  for (double e : eps) require(e > 0.0, ErrorKind::configuration, "eps-grid must be positive");
}

nlohmann::json SolverConfig::to_json() const {
  return {{"q", q},           {"beta", beta},         {"refine", refine},   {"near_cells", near_cells},
          {"radii", radii},   {"eps", eps},           {"n_radial", n_radial}, {"n_phi", n_phi},
          {"n_angle", n_angle}, {"restarts", restarts}, {"opt_tol", opt_tol}, {"seed", seed}};
}

std::vector<double> default_radii(const GridSpec& grid) { return dyadic_radii(grid, MaximalConfig{}); }

namespace {

// r4^{-n/2} = rho^{-2n}.
inline double kernel_power(int n, double r4) {
  switch (n) {
    case 1: return 1.0 / std::sqrt(r4);
    case 2: return 1.0 / r4;
    default: return std::pow(r4, -n / 2.0);
  }
}

struct Sources {
  int d = 0;
  std::vector<double> xyz;
  std::vector<double> val;
};

Sources nonzero_cells(const GridFunction& a) {
  const GridSpec& g = a.spec();
  Sources s;
  s.d = g.dim();
  const std::vector<double> c = g.centers();
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != 0.0) {
      s.xyz.insert(s.xyz.end(), c.begin() + i * s.d, c.begin() + (i + 1) * s.d);
      s.val.push_back(a[i]);
    }
  return s;
}

}  // namespace

GridFunction potential(const GridFunction& a, const GridSpec& out, const SolverConfig& cfg) {
  const GridSpec& g = a.spec();
  require(g.n == out.n, ErrorKind::configuration, "source and output grids differ in n");
  cfg.validate(g.n);
  const int n = g.n, d = g.dim();
  const double cn = cn_constant(n), vol = g.cell_volume();
  const Sources src = nonzero_cells(a);
  GridFunction b(out);
  if (src.val.empty()) return b;

  double h[kMaxDim], band[kMaxDim];
  for (int k = 0; k < d; ++k) {
    h[k] = g.spacing(k);
    band[k] = (cfg.near_cells + 0.5) * h[k];
  }
  // Sub-cell offsets for the singular band.
  const int R = cfg.refine;
  std::vector<double> offs;
  {
    std::vector<int> idx(d, 0);
    for (;;) {
      for (int k = 0; k < d; ++k) offs.push_back(((idx[k] + 0.5) / R - 0.5) * h[k]);
      int k = d - 1;
      while (k >= 0 && ++idx[k] == R) idx[k] = 0, --k;
      if (k < 0) break;
    }
  }
  const std::size_t nsub = offs.size() / d;
  const double subvol = vol / double(nsub);

  const std::vector<double> tgt = out.centers();
  const std::size_t ns = src.val.size();
  double w[kMaxDim];
  for (std::size_t ti = 0; ti < out.size(); ++ti) {
    const double* z = &tgt[ti * d];
    double sum = 0.0;
    for (std::size_t si = 0; si < ns; ++si) {
      const double* p = &src.xyz[si * d];
      bool near = true;
      for (int k = 0; k < d && near; ++k) near = std::abs(p[k] - z[k]) <= band[k];
      if (!near) {
        sum += src.val[si] * vol * kernel_power(n, relative_norm4(n, p, z));
        continue;
      }
      double acc = 0.0;
      for (std::size_t s = 0; s < nsub; ++s) {
        for (int k = 0; k < d; ++k) w[k] = p[k] + offs[s * d + k];
        acc += kernel_power(n, relative_norm4(n, w, z));
      }
      sum += src.val[si] * subvol * acc;
    }
    b[ti] = cn * sum;
  }
  return b;
}

GridFunction potential(const GridFunction& a, const SolverConfig& cfg) { return potential(a, a.spec(), cfg); }

GridFunction potential(const Atom& a, const GridSpec& out, const SolverConfig& cfg) {
  const double r = a.ball.radius;
  for (const GridSpec* g : {&a.samples.spec(), &out})
    for (int k = 0; k < g->dim(); ++k) {
      const double extent = k < 2 * g->n ? 2.0 * r : 2.0 * r * r;
      require(extent >= 4.0 * g->spacing(k), ErrorKind::resolution, "grid too coarse for the atom ball");
    }
  return potential(a.samples, out, cfg);
}

std::vector<double> potential_at(const GridFunction& a, const std::vector<HPoint>& points) {
  const int n = a.spec().n;
  const double cn = cn_constant(n), vol = a.spec().cell_volume();
  const Sources src = nonzero_cells(a);
  std::vector<double> out;
  for (const HPoint& z : points) {
    double s = 0.0;
    for (std::size_t i = 0; i < src.val.size(); ++i) {
      const double r4 = relative_norm4(n, &src.xyz[i * src.d], z.coords().data());
      require(r4 > 0.0, ErrorKind::singularity, "evaluation point coincides with a source cell centre");
      s += src.val[i] * kernel_power(n, r4);
    }
    out.push_back(cn * vol * s);
  }
  return out;
}

std::vector<double> potential_derivative_at(const GridFunction& a, const MultiIndex& I,
                                            const std::vector<HPoint>& points) {
  const int n = a.spec().n;
  const AlgebraicField k = kernel_derivative_field(n, I);
  const double cn = cn_constant(n), vol = a.spec().cell_volume();
  const Sources src = nonzero_cells(a);
  std::vector<double> out;
  for (const HPoint& z : points) {
    double s = 0.0;
    for (std::size_t i = 0; i < src.val.size(); ++i) {
      const HPoint w = HPoint::from_coords(n, std::span<const double>(&src.xyz[i * src.d], src.d));
      s += src.val[i] * k.evaluate(multiply(inverse(w), z));
    }
    out.push_back(cn * vol * s);
  }
  return out;
}

double loglog_slope(const std::vector<double>& s, const std::vector<double>& v) {
  require(s.size() == v.size() && s.size() >= 2, ErrorKind::configuration, "slope fit needs two or more points");
  double mx = 0.0, my = 0.0;
  const std::size_t m = s.size();
  std::vector<double> lx(m), ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    require(s[i] > 0.0 && v[i] != 0.0, ErrorKind::domain, "log-log fit needs positive abscissae and nonzero values");
    lx[i] = std::log(s[i]);
    ly[i] = std::log(std::abs(v[i]));
    mx += lx[i];
    my += ly[i];
  }
  mx /= m;
  my /= m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

std::vector<MultiIndex> second_order_indices(int n) {
  std::vector<MultiIndex> out;
  for (const MultiIndex& I : monomial_basis(n, 2))
    if (I.homogeneous_degree() == 2) out.push_back(I);
  return out;
}

double truncated_singular_sup(const MultiIndex& I, const GridFunction& a, const HPoint& z,
                              const std::vector<double>& eps) {
  const int n = a.spec().n;
  const AlgebraicField k = kernel_derivative_field(n, I);
  const double vol = a.spec().cell_volume();
  const Sources src = nonzero_cells(a);
  std::vector<std::pair<double, double>> dv;  // (rho, contribution)
  dv.reserve(src.val.size());
  for (std::size_t i = 0; i < src.val.size(); ++i) {
    const HPoint w = HPoint::from_coords(n, std::span<const double>(&src.xyz[i * src.d], src.d));
    const HPoint p = multiply(inverse(w), z);
    const double r = koranyi_norm(p);
    if (r == 0.0) continue;
    dv.emplace_back(r, src.val[i] * vol * k.evaluate(p));
  }
  std::sort(dv.begin(), dv.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  std::vector<double> e = eps;
  std::sort(e.begin(), e.end(), std::greater<>());
  double best = 0.0, acc = 0.0;
  std::size_t j = 0;
  for (double eps_v : e) {
    while (j < dv.size() && dv[j].first > eps_v) acc += dv[j++].second;
    best = std::max(best, std::abs(acc));
  }
  return best;
}

PolyClass PolyClass::from_grid(const GridFunction& g, int k) {
  PolyClass c;
  c.n = g.spec().n;
  c.k = k;
  auto shared = std::make_shared<GridFunction>(g);
  c.eval = [shared](const HPoint& z) { return shared->interpolate(z); };
  // Interpolation is only linear-exact between the outermost cell centres.
  GridSpec hull = g.spec();
  for (int j = 0; j < hull.dim(); ++j) {
    hull.lo[j] += 0.5 * g.spec().spacing(j);
    hull.hi[j] -= 0.5 * g.spec().spacing(j);
  }
  c.box = hull;
  return c;
}

PolyClass PolyClass::from_function(int n, std::function<double(const HPoint&)> f, int k) {
  PolyClass c;
  c.n = n;
  c.k = k;
  c.eval = std::move(f);
  return c;
}

PolyClass PolyClass::operator+(const PolyClass& o) const {
  require(n == o.n && k == o.k, ErrorKind::configuration, "classes differ in n or k");
  PolyClass c = *this;
  auto a = eval, b = o.eval;
  c.eval = [a, b](const HPoint& z) { return a(z) + b(z); };
  if (!c.box) c.box = o.box;
  return c;
}

bool same_class(const GridFunction& a, const GridFunction& b, int k, double tol) {
  require(a.spec() == b.spec(), ErrorKind::configuration, "classes live on different grids");
  GridFunction diff = a;
  diff -= b;
  const GridSpec& g = a.spec();
  HPoint mid(g.n);
  for (int j = 0; j < g.dim(); ++j) mid.coord(j) = 0.5 * (g.lo[j] + g.hi[j]);
  const KoranyiBall frame{mid, std::max(1e-12, 0.5 * g.diameter())};
  const GridFunction ones(g, 1.0);
  const LocalPolynomial p = moment_projection(diff, ones, frame, k);
  const std::vector<double> c = g.centers();
  for (std::size_t i = 0; i < g.size(); ++i) diff[i] -= p(&c[i * g.dim()]);
  const double scale = std::max({a.lp_norm(2.0), b.lp_norm(2.0), 1e-300});
  return diff.lp_norm(2.0) <= tol * scale;
}

namespace {

// Values of g and the P_1 basis at the ball-rule nodes of B(z, r) for each radius.
struct LocalData {
  int n = 1;
  int nb = 0;  // 1 + 2n
  struct Shell {
    double r;
    std::vector<double> w;  // normalised weights
    std::vector<double> g;
    std::vector<double> dx;  // 2n per node
  };
  std::vector<Shell> shells;
  double gamma = 2.0, q = 1.2;

  double eval(const double* p) const {
    double best = 0.0;
    for (const Shell& s : shells) {
      double acc = 0.0;
      const int m2 = 2 * n;
      for (std::size_t k = 0; k < s.w.size(); ++k) {
        double e = s.g[k] - p[0];
        for (int j = 0; j < m2; ++j) e -= p[1 + j] * s.dx[k * m2 + j];
        acc += s.w[k] * std::pow(std::abs(e), q);
      }
      best = std::max(best, std::pow(s.r, -gamma) * std::pow(acc, 1.0 / q));
    }
    return best;
  }
};

LocalData local_data(const PolyClass& G, double q, double gamma, const HPoint& z, const std::vector<double>& radii,
                     const SolverConfig& cfg, bool with_basis) {
  require(G.n == z.n(), ErrorKind::configuration, "class and point dimension differ");
  require(q >= 1.0, ErrorKind::parameter, "local L^q averages need q >= 1");
  require(!radii.empty(), ErrorKind::configuration, "empty radius grid");
  static std::mutex mu;
  static std::map<std::array<int, 4>, BallRule> rules;
  const BallRule* rule;
  {
    std::lock_guard<std::mutex> lk(mu);
    const std::array<int, 4> key{G.n, cfg.n_radial, cfg.n_phi, cfg.n_angle};
    auto it = rules.find(key);
    if (it == rules.end()) it = rules.emplace(key, BallRule::make(G.n, cfg.n_radial, cfg.n_phi, cfg.n_angle)).first;
    rule = &it->second;
  }
  LocalData L;
  L.n = G.n;
  L.nb = 1 + 2 * G.n;
  L.gamma = gamma;
  L.q = q;
  for (double r : radii) {
    LocalData::Shell s;
    s.r = r;
    double tot = 0.0;
    for (std::size_t k = 0; k < rule->nodes.size(); ++k) {
      const HPoint p = multiply(z, dilate(r, rule->nodes[k]));
      if (G.box && !G.box->contains(p)) continue;
      s.w.push_back(rule->weights[k]);
      tot += rule->weights[k];
      s.g.push_back(G.eval(p));
      if (with_basis)
        for (int j = 0; j < 2 * G.n; ++j) s.dx.push_back(p.x(j) - z.x(j));
    }
    if (tot <= 0.0) continue;
    for (double& w : s.w) w /= tot;
    L.shells.push_back(std::move(s));
  }
  return L;
}

// Nelder-Mead with restarts from the incumbent.
std::pair<std::vector<double>, double> nelder_mead(const std::function<double(const double*)>& f,
                                                   std::vector<double> x0, std::vector<double> step, double tol,
                                                   double abs_tol, int max_iter = 4000) {
  const std::size_t m = x0.size();
  double fbest = f(x0.data());
  for (int restart = 0; restart < 6; ++restart) {
    std::vector<std::vector<double>> S(m + 1, x0);
    std::vector<double> F(m + 1);
    for (std::size_t i = 0; i < m; ++i) S[i + 1][i] += step[i];
    for (std::size_t i = 0; i <= m; ++i) F[i] = f(S[i].data());
    for (int it = 0; it < max_iter; ++it) {
      std::vector<std::size_t> ord(m + 1);
      std::iota(ord.begin(), ord.end(), 0);
      std::sort(ord.begin(), ord.end(), [&](auto a, auto b) { return F[a] < F[b]; });
      const std::size_t lo = ord[0], hi = ord[m], nh = ord[m - 1];
      if (F[lo] <= abs_tol) break;
      if (std::abs(F[hi] - F[lo]) <= tol * (std::abs(F[lo]) + 1e-300)) {
        double size = 0.0;
        for (std::size_t i = 0; i <= m; ++i)
          for (std::size_t j = 0; j < m; ++j) size = std::max(size, std::abs(S[i][j] - S[lo][j]));
        if (size <= 1e-9 * (1.0 + std::abs(S[lo][0]))) break;
      }
      std::vector<double> c(m, 0.0);
      for (std::size_t i = 0; i <= m; ++i)
        if (i != hi)
          for (std::size_t j = 0; j < m; ++j) c[j] += S[i][j] / m;
      auto pt = [&](double t) {
        std::vector<double> p(m);
        for (std::size_t j = 0; j < m; ++j) p[j] = c[j] + t * (S[hi][j] - c[j]);
        return p;
      };
      const auto xr = pt(-1.0);
      const double fr = f(xr.data());
      if (fr < F[lo]) {
        const auto xe = pt(-2.0);
        const double fe = f(xe.data());
        if (fe < fr) S[hi] = xe, F[hi] = fe;
        else S[hi] = xr, F[hi] = fr;
      } else if (fr < F[nh]) {
        S[hi] = xr, F[hi] = fr;
      } else {
        const auto xc = fr < F[hi] ? pt(-0.5) : pt(0.5);
        const double fc = f(xc.data());
        if (fc < std::min(fr, F[hi])) {
          S[hi] = xc, F[hi] = fc;
        } else {
          for (std::size_t i = 0; i <= m; ++i) {
            if (i == lo) continue;
            for (std::size_t j = 0; j < m; ++j) S[i][j] = S[lo][j] + 0.5 * (S[i][j] - S[lo][j]);
            F[i] = f(S[i].data());
          }
        }
      }
    }
    const std::size_t lo = std::min_element(F.begin(), F.end()) - F.begin();
    const double improvement = fbest - F[lo];
    if (F[lo] <= fbest) {
      x0 = S[lo];
      fbest = F[lo];
    }
    if (fbest <= abs_tol || (restart > 0 && improvement <= tol * (std::abs(fbest) + 1e-300))) break;
    for (double& s : step) s *= 0.1;
  }
  return {x0, fbest};
}

}  // namespace

double eta_maximal(const PolyClass& g, double q, double gamma, const HPoint& z, const std::vector<double>& radii,
                   const SolverConfig& cfg) {
  const LocalData L = local_data(g, q, gamma, z, radii, cfg, true);
  std::vector<double> zero(L.nb, 0.0);
  return L.eval(zero.data());
}

CalderonResult calderon_maximal(const PolyClass& G, double q, double gamma, const HPoint& z,
                                const std::vector<double>& radii, const SolverConfig& cfg, std::uint64_t seed) {
  require(G.k == 1, ErrorKind::unsupported, "only the quotient by P_1 (gamma = 2) is implemented");
  const LocalData L = local_data(G, q, gamma, z, radii, cfg, true);
  const int nb = L.nb;
  CalderonResult res;
  res.coeffs.assign(nb, 0.0);
  if (L.shells.empty()) return res;
  auto f = [&](const double* p) { return L.eval(p); };

  // Starts: zero, and the weighted least-squares P_1 fit on the smallest ball.
  std::vector<std::vector<double>> starts{std::vector<double>(nb, 0.0)};
  {
    const auto& s = L.shells.front();
    Eigen::MatrixXd A(s.w.size(), nb);
    Eigen::VectorXd y(s.w.size());
    for (std::size_t k = 0; k < s.w.size(); ++k) {
      const double sw = std::sqrt(s.w[k]);
      A(k, 0) = sw;
      for (int j = 1; j < nb; ++j) A(k, j) = sw * s.dx[k * (nb - 1) + j - 1];
      y[k] = sw * s.g[k];
    }
    const Eigen::VectorXd c = A.completeOrthogonalDecomposition().solve(y);
    starts.emplace_back(c.data(), c.data() + nb);
  }
  double gscale = 0.0, rmax = 0.0;
  for (const auto& s : L.shells) {
    rmax = std::max(rmax, s.r);
    for (double v : s.g) gscale = std::max(gscale, std::abs(v));
  }
  if (gscale == 0.0) {
    res.converged = true;
    return res;
  }
  std::mt19937_64 rng(cfg.seed ^ (seed * 0x9e3779b97f4a7c15ULL));
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int r = 2; r < cfg.restarts; ++r) {
    std::vector<double> s = starts[1];
    s[0] += 0.1 * gscale * nd(rng);
    for (int j = 1; j < nb; ++j) s[j] += 0.1 * gscale / rmax * nd(rng);
    starts.push_back(s);
  }
  std::vector<double> step(nb, 0.1 * gscale);
  for (int j = 1; j < nb; ++j) step[j] = 0.1 * gscale / rmax;

  std::vector<std::pair<std::vector<double>, double>> runs;
  // Values below this are indistinguishable from a polynomial representative.
  const double abs_tol = 1e-13 * f(starts[0].data());
  for (const auto& s : starts) runs.push_back(nelder_mead(f, s, step, cfg.opt_tol, abs_tol));
  std::sort(runs.begin(), runs.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  res.value = runs[0].second;
  res.coeffs = runs[0].first;
  res.converged = std::abs(runs[1].second - runs[0].second) <= 1e-6 * res.value + abs_tol;
  return res;
}

CalderonNorm calderon_hardy_norm(const PolyClass& G, const OrliczSpec& phi, double q, double gamma,
                                 const GridSpec& out, const SolverConfig& cfg) {
  const std::vector<double> radii = cfg.radii.empty() ? default_radii(out) : cfg.radii;
  CalderonNorm r;
  r.field = GridFunction(out);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const CalderonResult c = calderon_maximal(G, q, gamma, out.center(i), radii, cfg, i);
    r.field[i] = c.value;
    r.converged = r.converged && c.converged;
  }
  r.norm = luxemburg_norm(r.field, phi);
  return r;
}

nlohmann::json PointwiseReport::to_json() const {
  return {{"max_ratio", max_ratio}, {"samples", samples}, {"far_samples", far_samples}};
}

PointwiseReport pointwise_estimate_check(const Atom& a, const GridFunction& b, const std::vector<HPoint>& points,
                                         const SolverConfig& cfg) {
  cfg.validate(b.spec().n);
  const GridSpec& ga = a.samples.spec();
  const int n = ga.n, Q = homogeneous_dimension(n);
  const double q = cfg.q;
  const std::vector<double> radii = cfg.radii.empty() ? default_radii(b.spec()) : cfg.radii;
  const std::vector<double> eps = cfg.eps.empty() ? default_radii(ga) : cfg.eps;
  const PolyClass B = PolyClass::from_grid(b);
  const GridFunction chi = GridFunction::indicator(ga, a.ball);
  const BallIntegrator bchi(chi), ba(a.samples);
  const auto mradii = dyadic_radii(ga, MaximalConfig{});
  const double inv_chi = 1.0 / indicator_norm(ball_volume(a.ball.radius, n), a.phi);
  const KoranyiBall near{a.ball.center, 4.0 * cfg.beta * cfg.beta * a.ball.radius};
  const auto Is = second_order_indices(n);
  PointwiseReport rep;
  std::uint64_t k = 0;
  for (const HPoint& z : points) {
    const double N = calderon_maximal(B, q, 2.0, z, radii, cfg, k++).value;
    double rhs = inv_chi * std::pow(hl_maximal(bchi, ga, z, mradii, true), (2.0 + Q / q) / Q);
    if (near.contains(z)) {
      double t = hl_maximal(ba, ga, z, mradii, true);
      for (const auto& I : Is) t += truncated_singular_sup(I, a.samples, z, eps);
      rhs += t;
    } else {
      ++rep.far_samples;
    }
    ++rep.samples;
    if (N > 0.0) rep.max_ratio = std::max(rep.max_ratio, rhs > 0.0 ? N / rhs : kInfinity);
  }
  return rep;
}

double truncated_modular(const PolyClass& G, const OrliczSpec& phi, double q, double R, const SolverConfig& cfg,
                         int n_radial, int n_phi, int n_angle) {
  const std::vector<double> radii = cfg.radii.empty() ? std::vector<double>{0.25, 0.5, 1.0, 2.0} : cfg.radii;
  std::uint64_t k = 0;
  return polar_integral(
      G.n, [&](const HPoint& z) { return phi(calderon_maximal(G, q, 2.0, z, radii, cfg, k++).value); }, R, n_radial,
      n_phi, n_angle);
}

}  // namespace hh
