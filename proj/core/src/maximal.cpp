#include "hhardy/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <tuple>

#include "hhardy/quadrature.hpp"

namespace hh {

nlohmann::json MaximalConfig::to_json() const {
  return {{"r_min", r_min}, {"r_max", r_max}, {"offset_scan", offset_scan}, {"j_lo", j_lo},
          {"j_hi", j_hi},   {"N", N},         {"L", L},                     {"dictionary_seed", dictionary_seed}};
}

std::vector<double> dyadic_radii(const GridSpec& grid, const MaximalConfig& cfg) {
  double hmin = grid.spacing(0);
  for (int k = 1; k < 2 * grid.n; ++k) hmin = std::min(hmin, grid.spacing(k));
  const double r_min = cfg.r_min > 0.0 ? cfg.r_min : 2.0 * hmin;
  const double r_max = cfg.r_max > 0.0 ? cfg.r_max : grid.diameter();
  require(r_min > 0.0 && r_max >= r_min, ErrorKind::configuration, "radius range must satisfy 0 < r_min <= r_max");
  std::vector<double> radii;
  for (int k = int(std::ceil(std::log2(r_min) - 1e-12)); std::ldexp(1.0, k) <= r_max * (1 + 1e-12); ++k)
    radii.push_back(std::ldexp(1.0, k));
  return radii;
}

bool scale_resolved(const GridSpec& grid, double t) {
  const double cells = unit_ball_constant(grid.n).value * std::pow(t, homogeneous_dimension(grid.n)) / grid.cell_volume();
  return cells >= std::pow(3.0, grid.dim());
}

std::vector<int> resolved_scales(const GridSpec& grid, const MaximalConfig& cfg) {
  require(cfg.j_lo <= cfg.j_hi, ErrorKind::configuration, "scale window must be ordered");
  std::vector<int> js;
  const double diam = grid.diameter();
  for (int j = cfg.j_lo; j <= cfg.j_hi; ++j) {
    const double t = std::ldexp(1.0, -j);
    if (t <= 2.0 * diam && scale_resolved(grid, t)) js.push_back(j);
  }
  return js;
}

BallIntegrator::BallIntegrator(const GridFunction& f, bool absolute) : spec_(f.spec()) {
  const int d = spec_.dim();
  const int rt = spec_.res[d - 1];
  const std::size_t cols = spec_.size() / std::size_t(rt);
  const double ht = spec_.spacing(d - 1);
  values_.resize(f.size());
  prefix_.assign(cols * (rt + 1), 0.0);
  for (std::size_t c = 0; c < cols; ++c) {
    double acc = 0.0;
    for (int i = 0; i < rt; ++i) {
      const double v = absolute ? std::abs(f[c * rt + i]) : f[c * rt + i];
      values_[c * rt + i] = v;
      prefix_[c * (rt + 1) + i] = acc;
      acc += v * ht;
    }
    prefix_[c * (rt + 1) + rt] = acc;
  }
}

double BallIntegrator::prefix_at(std::size_t column, double u) const {
  const int rt = spec_.res[spec_.dim() - 1];
  if (u <= 0.0) return 0.0;
  if (u >= rt) return prefix_[column * (rt + 1) + rt];
  const int i = int(u);
  return prefix_[column * (rt + 1) + i] + (u - i) * values_[column * rt + i] * spec_.spacing(spec_.dim() - 1);
}

BallIntegrator::Result BallIntegrator::integrate(const HPoint& z, double r) const {
  const int n = spec_.n;
  const int d = spec_.dim();
  const int nx = 2 * n;
  // Each x-cell is split into `sub` sub-columns per axis so the ball's x-footprint is resolved finer than the grid.
  const int sub = n == 1 ? 3 : 1;
  int lo[kMaxDim], hi[kMaxDim], ids[kMaxDim];
  double hs[kMaxDim];
  double area = 1.0;
  for (int k = 0; k < nx; ++k) {
    hs[k] = spec_.spacing(k) / sub;
    lo[k] = std::max(0, int(std::ceil((z.x(k) - r - spec_.lo[k]) / hs[k] - 0.5)));
    hi[k] = std::min(spec_.res[k] * sub - 1, int(std::floor((z.x(k) + r - spec_.lo[k]) / hs[k] - 0.5)));
    if (lo[k] > hi[k]) return {0.0, 0.0};
    ids[k] = lo[k];
    area *= hs[k];
  }
  const double r4 = r * r * r * r;
  const double tlo = spec_.lo[d - 1], thi = spec_.hi[d - 1], ht = spec_.spacing(d - 1);
  double xc[kMaxDim];
  Result out{0.0, 0.0};
  for (;;) {
    double r2 = 0.0;
    std::size_t col = 0;
    for (int k = 0; k < nx; ++k) {
      xc[k] = spec_.lo[k] + (ids[k] + 0.5) * hs[k];
      const double dx = xc[k] - z.x(k);
      r2 += dx * dx;
      col = col * std::size_t(spec_.res[k]) + std::size_t(ids[k] / sub);
    }
    const double d4 = r2 * r2;
    if (d4 < r4) {
      const double tau = std::sqrt(r4 - d4);
      const double tc = z.t() + symplectic(n, z.coords().data(), xc);
      const double a = std::max(tc - tau, tlo), b = std::min(tc + tau, thi);
      if (a < b) {
        out.measure += (b - a) * area;
        out.integral += (prefix_at(col, (b - tlo) / ht) - prefix_at(col, (a - tlo) / ht)) * area;
      }
    }
    int k = nx - 1;
    while (k >= 0 && ++ids[k] > hi[k]) ids[k] = lo[k], --k;
    if (k < 0) break;
  }
  return out;
}

double BallIntegrator::average(const HPoint& center, double r) const {
  const Result res = integrate(center, r);
  return res.measure > 0.0 ? res.integral / res.measure : 0.0;
}

double hl_maximal(const BallIntegrator& bi, const GridSpec& grid, const HPoint& z, const std::vector<double>& radii,
                  bool offset_scan) {
  require(grid.contains(z), ErrorKind::domain, "hl_maximal point outside the grid box");
  const int n = grid.n;
  double best = 0.0;
  for (double r : radii) {
    best = std::max(best, bi.average(z, r));
    if (!offset_scan) continue;
    // Balls of radius r whose centre sits at quasi-distance r/2 from z.
    for (int k = 0; k < 2 * n + 1; ++k)
      for (double sgn : {-1.0, 1.0}) {
        HPoint e(n);
        e.coord(k) = k < 2 * n ? sgn * r / 2 : sgn * r * r / 4;
        best = std::max(best, bi.average(multiply(z, e), r));
      }
  }
  return best;
}

double hl_maximal(const GridFunction& f, const HPoint& z, const MaximalConfig& cfg) {
  const BallIntegrator bi(f);
  return hl_maximal(bi, f.spec(), z, dyadic_radii(f.spec(), cfg), cfg.offset_scan);
}

GridFunction hl_maximal_field(const GridFunction& f, const MaximalConfig& cfg) {
  const BallIntegrator bi(f);
  const auto radii = dyadic_radii(f.spec(), cfg);
  GridFunction out(f.spec());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = hl_maximal(bi, f.spec(), f.spec().center(i), radii, cfg.offset_scan);
  return out;
}

RadialKernel RadialKernel::bump(int n, int k, const std::vector<double>& q, double scale) {
  require(k >= 1, ErrorKind::configuration, "bump exponent must be positive");
  RadialKernel r;
  r.n = n;
  // (1 - s)^k expanded, then times q.
  std::vector<double> a(k + 1);
  for (int m = 0; m <= k; ++m) a[m] = std::pow(-1.0, m) * std::tgamma(k + 1.0) / (std::tgamma(m + 1.0) * std::tgamma(k - m + 1.0));
  r.coeffs.assign(k + q.size(), 0.0);
  for (int m = 0; m <= k; ++m)
    for (std::size_t j = 0; j < q.size(); ++j) r.coeffs[m + j] += scale * a[m] * q[j];
  r.field = radial_bump(identity(n), 1.0, k, q);
  r.field *= scale;
  return r;
}

double RadialKernel::profile(double s) const {
  if (s >= 1.0) return 0.0;
  double v = 0.0;
  for (std::size_t m = coeffs.size(); m-- > 0;) v = v * s + coeffs[m];
  return v;
}

double RadialKernel::operator()(const HPoint& z) const {
  return profile(koranyi_norm4(z.n(), z.coords().data()));
}

double RadialKernel::integral() const {
  const int Q = homogeneous_dimension(n);
  double s = 0.0;
  for (std::size_t m = 0; m < coeffs.size(); ++m) s += coeffs[m] / (Q + 4.0 * m);
  return koranyi_sphere_measure(n) * s;
}

RadialKernel RadialKernel::scaled(double s) const {
  RadialKernel r = *this;
  for (double& c : r.coeffs) c *= s;
  r.field *= s;
  return r;
}

const std::vector<RadialKernel>& default_dictionary(int n, int N, std::uint64_t seed) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, std::uint64_t>, std::vector<RadialKernel>> cache;
  std::lock_guard<std::mutex> lk(mu);
  auto key = std::make_tuple(n, N, seed);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const int k = N + 1;  // C^N across the support boundary
  std::vector<RadialKernel> dict;
  const Box box{std::vector<double>(2 * n + 1, -1.0), std::vector<double>(2 * n + 1, 1.0)};
  for (int m = 0; m < 8; ++m) {
    std::vector<double> q{1.0};
    if (m == 1) q = {1.0, -2.0};
    if (m >= 2) q = {1.0, u(rng), u(rng)};
    RadialKernel ker = RadialKernel::bump(n, k, q);
    const double sn = schwartz_seminorm(ker.smooth(), N, box, 10);
    dict.push_back(ker.scaled(1.0 / sn));
  }
  return cache.emplace(key, std::move(dict)).first->second;
}

std::vector<std::vector<GridFunction>> radial_convolutions(const GridFunction& f,
                                                           const std::vector<RadialKernel>& kernels,
                                                           const std::vector<int>& js) {
  const GridSpec& g = f.spec();
  const int n = g.n, d = g.dim();
  const int Q = homogeneous_dimension(n);
  std::vector<std::vector<GridFunction>> out(kernels.size(), std::vector<GridFunction>(js.size(), GridFunction(g)));
  if (js.empty() || kernels.empty()) return out;
  std::size_t M = 0;
  for (const auto& k : kernels) M = std::max(M, k.coeffs.size());

  // Scales in increasing t; shells between consecutive t^4.
  std::vector<int> order(js.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return js[a] > js[b]; });
  const std::size_t S = js.size();
  std::vector<double> t4(S);
  for (std::size_t s = 0; s < S; ++s) t4[s] = std::pow(std::ldexp(1.0, -js[order[s]]), 4);

  std::vector<double> src_xyz, src_val;
  {
    const std::vector<double> c = g.centers();
    for (std::size_t i = 0; i < f.size(); ++i)
      if (f[i] != 0.0) {
        src_xyz.insert(src_xyz.end(), c.begin() + i * d, c.begin() + (i + 1) * d);
        src_val.push_back(f[i]);
      }
  }
  const std::size_t ns = src_val.size();
  if (ns == 0) return out;
  const std::vector<double> tgt = g.centers();
  const double vol = g.cell_volume();
  std::vector<double> shell(S * M), acc(M);
  for (std::size_t ti = 0; ti < g.size(); ++ti) {
    const double* z = &tgt[ti * d];
    std::fill(shell.begin(), shell.end(), 0.0);
    for (std::size_t si = 0; si < ns; ++si) {
      const double d4 = relative_norm4(n, &src_xyz[si * d], z);
      if (d4 >= t4[S - 1]) continue;
      std::size_t sh = 0;
      while (d4 >= t4[sh]) ++sh;
      double* row = &shell[sh * M];
      double p = src_val[si];
      for (std::size_t m = 0; m < M; ++m) {
        row[m] += p;
        p *= d4;
      }
    }
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t m = 0; m < M; ++m) acc[m] += shell[s * M + m];
      const double t = std::ldexp(1.0, -js[order[s]]);
      const double inv4 = 1.0 / t4[s];
      for (std::size_t k = 0; k < kernels.size(); ++k) {
        const auto& c = kernels[k].coeffs;
        double v = 0.0, sc = 1.0;
        for (std::size_t m = 0; m < c.size(); ++m) {
          v += c[m] * acc[m] * sc;
          sc *= inv4;
        }
        out[k][order[s]][ti] = v * vol * std::pow(t, -Q);
      }
    }
  }
  return out;
}

GridFunction heat_style_convolution(const GridFunction& f, const RadialKernel& phi, int j) {
  const double t = std::ldexp(1.0, -j);
  require(scale_resolved(f.spec(), t), ErrorKind::resolution,
          "kernel scale 2^-" + std::to_string(j) + " spans fewer than 3 cells");
  return radial_convolutions(f, {phi}, {j})[0][0];
}

GridFunction heat_style_convolution(const GridFunction& f, const SmoothField& phi, int j) {
  const GridSpec& g = f.spec();
  const double t = std::ldexp(1.0, -j);
  require(scale_resolved(g, t), ErrorKind::resolution,
          "kernel scale 2^-" + std::to_string(j) + " spans fewer than 3 cells");
  const int Q = homogeneous_dimension(g.n);
  const double w = g.cell_volume() * std::pow(t, -Q);
  GridFunction out(g);
  std::vector<std::size_t> src;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f[i] != 0.0) src.push_back(i);
  for (std::size_t ti = 0; ti < g.size(); ++ti) {
    const HPoint z = g.center(ti);
    double s = 0.0;
    for (std::size_t si : src) s += f[si] * phi(dilate(1.0 / t, multiply(inverse(g.center(si)), z)));
    out[ti] = s * w;
  }
  return out;
}

GridFunction discrete_maximal(const GridFunction& f, const RadialKernel& phi, const MaximalConfig& cfg) {
  const auto js = resolved_scales(f.spec(), cfg);
  const auto conv = radial_convolutions(f, {phi}, js);
  GridFunction out(f.spec());
  for (const auto& c : conv[0])
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], std::abs(c[i]));
  return out;
}

GridFunction peak_maximal(const GridFunction& f, const RadialKernel& phi, double L, const MaximalConfig& cfg) {
  require(L > 0.0, ErrorKind::configuration, "peak exponent must be positive");
  const GridSpec& g = f.spec();
  const int n = g.n, d = g.dim();
  const auto js = resolved_scales(g, cfg);
  const auto conv = radial_convolutions(f, {phi}, js);
  const std::vector<double> c = g.centers();
  GridFunction out(g);
  for (std::size_t s = 0; s < js.size(); ++s) {
    const GridFunction& cj = conv[0][s];
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < cj.size(); ++i)
      if (cj[i] != 0.0) idx.push_back(i);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(cj[a]) > std::abs(cj[b]) || (std::abs(cj[a]) == std::abs(cj[b]) && a < b);
    });
    const double four_j = std::pow(4.0, js[s]);
    for (std::size_t ti = 0; ti < g.size(); ++ti) {
      double best = out[ti];
      for (std::size_t w : idx) {
        const double a = std::abs(cj[w]);
        if (a <= best) break;
        const double rho2 = std::sqrt(relative_norm4(n, &c[ti * d], &c[w * d]));
        best = std::max(best, a / std::pow(1.0 + four_j * rho2, L));
      }
      out[ti] = best;
    }
  }
  return out;
}

GridFunction grand_maximal(const GridFunction& f, const std::vector<RadialKernel>& dictionary,
                           const MaximalConfig& cfg) {
  require(!dictionary.empty(), ErrorKind::configuration, "grand maximal needs a non-empty dictionary");
  const auto js = resolved_scales(f.spec(), cfg);
  const auto conv = radial_convolutions(f, dictionary, js);
  GridFunction out(f.spec());
  for (const auto& per_kernel : conv)
    for (const auto& c : per_kernel)
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], std::abs(c[i]));
  return out;
}

GridFunction grand_maximal(const GridFunction& f, const MaximalConfig& cfg) {
  const int n = f.spec().n;
  return grand_maximal(f, default_dictionary(n, cfg.seminorm_order(n), cfg.dictionary_seed), cfg);
}

nlohmann::json InequalityReport::to_json() const {
  return {{"lhs", lhs}, {"rhs", rhs}, {"ratio", ratio}, {"config", config}};
}

InequalityReport fefferman_stein_check(const std::vector<GridFunction>& family, double r, const OrliczSpec& phi,
                                       const MaximalConfig& cfg) {
  require(r > 1.0, ErrorKind::parameter, "vector-valued inequality needs r > 1");
  require(phi.lower_index() && *phi.lower_index() > 1.0 && phi.upper_index() && std::isfinite(*phi.upper_index()),
          ErrorKind::parameter, "vector-valued inequality needs 1 < i(Phi) <= I(Phi) < inf");
  require(!family.empty(), ErrorKind::configuration, "empty family");
  const GridSpec& g = family.front().spec();
  std::vector<double> lhs(g.size(), 0.0), rhs(g.size(), 0.0);
  for (const auto& f : family) {
    const GridFunction mf = hl_maximal_field(f, cfg);
    for (std::size_t i = 0; i < g.size(); ++i) {
      lhs[i] += std::pow(mf[i], r);
      rhs[i] += std::pow(std::abs(f[i]), r);
    }
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    lhs[i] = std::pow(lhs[i], 1.0 / r);
    rhs[i] = std::pow(rhs[i], 1.0 / r);
  }
  InequalityReport rep;
  rep.lhs = luxemburg_norm(lhs, g.cell_volume(), phi);
  rep.rhs = luxemburg_norm(rhs, g.cell_volume(), phi);
  rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : 0.0;
  rep.config = {{"phi", phi.name()}, {"r", r}, {"members", family.size()}, {"maximal", cfg.to_json()}};
  return rep;
}

}  // namespace hh
