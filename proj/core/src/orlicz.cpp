#include "hhardy/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <unordered_map>

namespace hh {

const char* to_string(OrliczFamily f) {
  switch (f) {
    case OrliczFamily::power: return "power";
    case OrliczFamily::sum: return "sum";
    case OrliczFamily::min: return "min";
    case OrliczFamily::tlog: return "tlog";
    case OrliczFamily::composed: return "composed";
    case OrliczFamily::complementary: return "complementary";
    case OrliczFamily::custom: return "custom";
  }
  return "unknown";
}

namespace {

double ipow(double t, double p) {
  if (p == 1.0) return t;
  if (p == 2.0) return t * t;
  return std::pow(t, p);
}

void check_exponent(double p) {
  require(std::isfinite(p) && p > 0.0, ErrorKind::domain, "Orlicz exponents must lie in (0, inf)");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

OrliczSpec OrliczSpec::power(double p) {
  check_exponent(p);
  OrliczSpec s;
  s.phi_ = std::make_shared<const std::function<double(double)>>([p](double t) { return ipow(t, p); });
  s.family_ = OrliczFamily::power;
  s.name_ = "power(" + fmt(p) + ")";
  s.params_ = {p};
  s.convex_ = p >= 1.0;
  s.lower_ = p;
  s.upper_ = p;
  return s;
}

OrliczSpec OrliczSpec::sum(double p1, double p2) {
  check_exponent(p1);
  check_exponent(p2);
  require(p1 <= p2, ErrorKind::domain, "sum family needs p1 <= p2");
  OrliczSpec s;
  s.phi_ = std::make_shared<const std::function<double(double)>>(
      [p1, p2](double t) { return ipow(t, p1) + ipow(t, p2); });
  s.family_ = OrliczFamily::sum;
  s.name_ = "sum(" + fmt(p1) + "," + fmt(p2) + ")";
  s.params_ = {p1, p2};
  s.convex_ = p1 >= 1.0;
  s.lower_ = p1;
  s.upper_ = p2;
  return s;
}

OrliczSpec OrliczSpec::min(double p1, double p2) {
  check_exponent(p1);
  check_exponent(p2);
  require(p1 <= p2, ErrorKind::domain, "min family needs p1 <= p2");
  OrliczSpec s;
  s.phi_ = std::make_shared<const std::function<double(double)>>(
      [p1, p2](double t) { return std::min(ipow(t, p1), ipow(t, p2)); });
  s.family_ = OrliczFamily::min;
  s.name_ = "min(" + fmt(p1) + "," + fmt(p2) + ")";
  s.params_ = {p1, p2};
  // The slope drops at t = 1 unless the exponents coincide.
  s.convex_ = p1 == p2 && p1 >= 1.0;
  s.lower_ = p1;
  s.upper_ = p2;
  return s;
}

OrliczSpec OrliczSpec::tlog() {
  OrliczSpec s;
  s.phi_ = std::make_shared<const std::function<double(double)>>(
      [](double t) { return t * std::log(std::exp(1.0) + t); });
  s.family_ = OrliczFamily::tlog;
  s.name_ = "tlog";
  s.convex_ = true;
  s.lower_ = 1.0;
  s.upper_ = 1.0;
  s.upper_open_ = true;
  return s;
}

OrliczSpec OrliczSpec::from_family(const std::string& family, const std::vector<double>& params) {
  auto want = [&](std::size_t k) {
    require(params.size() == k, ErrorKind::configuration,
            "family " + family + " expects " + std::to_string(k) + " parameter(s)");
  };
  if (family == "power") {
    want(1);
    return power(params[0]);
  }
  if (family == "sum") {
    want(2);
    return sum(params[0], params[1]);
  }
  if (family == "min") {
    want(2);
    return min(params[0], params[1]);
  }
  if (family == "tlog") {
    want(0);
    return tlog();
  }
  fail(ErrorKind::configuration, "unknown Orlicz family '" + family + "'");
}

OrliczSpec OrliczSpec::custom(std::string name, std::function<double(double)> phi, bool convex) {
  OrliczSpec s;
  s.phi_ = std::make_shared<const std::function<double(double)>>(std::move(phi));
  s.name_ = std::move(name);
  s.convex_ = convex;
  return s;
}

OrliczSpec phi_power(const OrliczSpec& phi, double s) {
  require(std::isfinite(s) && s > 0.0, ErrorKind::domain, "composition exponent must be positive");
  if (s == 1.0) return phi;
  OrliczSpec r = phi;
  auto base = phi.phi_;
  r.phi_ = std::make_shared<const std::function<double(double)>>(
      [base, s](double t) { return (*base)(std::pow(t, s)); });
  r.family_ = OrliczFamily::composed;
  r.name_ = phi.name_ + "^" + fmt(s);
  r.params_ = phi.params_;
  r.params_.push_back(s);
  if (phi.lower_) r.lower_ = *phi.lower_ * s;
  if (phi.upper_) r.upper_ = *phi.upper_ * s;
  // Convexity of Phi(t^s) is not inherited in general.
  r.convex_ = phi.family_ == OrliczFamily::power && phi.params_[0] * s >= 1.0;
  return r;
}

namespace {

struct Conjugate {
  std::shared_ptr<const std::function<double(double)>> phi;
  mutable std::mutex mu;
  mutable std::unordered_map<double, double> cache;

  double g(double t, double s) const { return t * s - (*phi)(t); }

  double compute(double s) const {
    if (s <= 0.0) return 0.0;
    // Log-grid scan for the bracket, then golden-section refinement.
    constexpr int per_decade = 16;
    constexpr int lo_exp = -20, hi_exp = 20;
    double best = 0.0, best_t = 0.0;
    int best_k = -1;
    const int count = (hi_exp - lo_exp) * per_decade + 1;
    std::vector<double> ts(count);
    for (int k = 0; k < count; ++k) {
      ts[k] = std::pow(10.0, lo_exp + double(k) / per_decade);
      const double v = g(ts[k], s);
      if (v > best) {
        best = v;
        best_t = ts[k];
        best_k = k;
      }
    }
    if (best_k == count - 1) return std::numeric_limits<double>::infinity();
    if (best_k < 0) return 0.0;
    double a = best_k > 0 ? ts[best_k - 1] : 0.0;
    double b = ts[best_k + 1];
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - ratio * (b - a), d = a + ratio * (b - a);
    double gc = g(c, s), gd = g(d, s);
    for (int it = 0; it < 200 && (b - a) > 1e-15 * b; ++it) {
      if (gc > gd) {
        b = d;
        d = c;
        gd = gc;
        c = b - ratio * (b - a);
        gc = g(c, s);
      } else {
        a = c;
        c = d;
        gc = gd;
        d = a + ratio * (b - a);
        gd = g(d, s);
      }
    }
    return std::max({best, gc, gd, g(best_t, s)});
  }

  double operator()(double s) const {
    {
      std::lock_guard<std::mutex> lk(mu);
      auto it = cache.find(s);
      if (it != cache.end()) return it->second;
    }
    const double v = compute(s);
    std::lock_guard<std::mutex> lk(mu);
    cache.emplace(s, v);
    return v;
  }
};

}  // namespace

OrliczSpec complementary(const OrliczSpec& phi) {
  require(phi.convex(), ErrorKind::unsupported, "complementary function needs a convex Phi, got " + phi.name());
  auto conj = std::make_shared<Conjugate>();
  conj->phi = phi.phi_;
  OrliczSpec r;
  r.phi_ = std::make_shared<const std::function<double(double)>>([conj](double s) { return (*conj)(s); });
  r.family_ = OrliczFamily::complementary;
  r.name_ = phi.name() + "*";
  r.params_ = phi.params();
  r.convex_ = true;
  r.strictly_increasing_ = false;
  r.bijective_ = false;
  auto conjugate_exp = [](double p) { return p > 1.0 ? p / (p - 1.0) : std::numeric_limits<double>::infinity(); };
  if (phi.upper_ && !phi.upper_open_) r.lower_ = conjugate_exp(*phi.upper_);
  if (phi.lower_) r.upper_ = conjugate_exp(*phi.lower_);
  return r;
}

double phi_inverse(const OrliczSpec& phi, double s) {
  require(s >= 0.0 && !std::isnan(s), ErrorKind::domain, "phi_inverse needs s >= 0");
  if (std::isinf(s)) return s;
  // Phi > 0 on (0, inf), so the infimum at level 0 is the origin.
  if (s == 0.0) return 0.0;
  double hi = 1.0;
  int guard = 0;
  while (!(phi(hi) > s)) {
    hi *= 2.0;
    if (++guard > 2000) return std::numeric_limits<double>::infinity();
  }
  double lo = hi / 2.0;
  guard = 0;
  while (phi(lo) > s) {
    lo /= 2.0;
    if (++guard > 2000 || lo == 0.0) return 0.0;
  }
  for (int it = 0; it < 300 && hi - lo > 4e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (phi(mid) > s)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

double modular(std::span<const double> values, double cell_volume, const OrliczSpec& phi) {
  double s = 0.0;
  for (double v : values)
    if (v != 0.0) s += phi(std::abs(v));
  return s * cell_volume;
}

double modular(const GridFunction& f, const OrliczSpec& phi) {
  return modular(f.values(), f.spec().cell_volume(), phi);
}

double luxemburg_norm(std::span<const double> values, double cell_volume, const OrliczSpec& phi,
                      const LuxemburgOptions& opt) {
  std::vector<double> a;
  double sup = 0.0;
  for (double v : values)
    if (v != 0.0) {
      require(std::isfinite(v), ErrorKind::domain, "non-finite sample in Luxemburg norm");
      a.push_back(std::abs(v));
      sup = std::max(sup, a.back());
    }
  if (a.empty()) return 0.0;
  const double vol = double(values.size()) * cell_volume;
  auto kappa = [&](double lambda) {
    double s = 0.0;
    for (double v : a) s += phi(v / lambda);
    return s * cell_volume;
  };
  // Initial bracket from the sup-norm bound on the box.
  double guess = sup / phi_inverse(phi, 1.0 / vol);
  if (!(guess > 0.0) || !std::isfinite(guess)) guess = sup;
  double lo = guess / 10.0, hi = guess * 10.0;
  int e = 0;
  while (kappa(hi) > 1.0) {
    lo = hi;
    hi *= 10.0;
    require(++e < opt.max_expansions, ErrorKind::convergence, "Luxemburg bracket expansion failed");
  }
  e = 0;
  while (!(kappa(lo) > 1.0)) {
    hi = lo;
    lo /= 10.0;
    require(++e < opt.max_expansions, ErrorKind::convergence, "Luxemburg bracket expansion failed");
  }
  for (int it = 0; it < opt.max_iterations && hi / lo - 1.0 > opt.rel_tol; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (kappa(mid) > 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

double luxemburg_norm(const GridFunction& f, const OrliczSpec& phi, const LuxemburgOptions& opt) {
  return luxemburg_norm(f.values(), f.spec().cell_volume(), phi, opt);
}

double indicator_norm(double measure, const OrliczSpec& phi) {
  require(measure >= 0.0, ErrorKind::domain, "measure must be non-negative");
  if (measure == 0.0) return 0.0;
  return 1.0 / phi_inverse(phi, 1.0 / measure);
}

double type_constant(const OrliczSpec& phi, double p, TypeSide side, double r_extent, double t_lo, double t_hi,
                     int samples) {
  require(r_extent > 1.0 && t_lo > 0.0 && t_hi > t_lo && samples >= 2, ErrorKind::configuration,
          "bad type-scan ranges");
  double c = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double u = double(i) / (samples - 1);
    const double r = side == TypeSide::lower ? std::pow(r_extent, -u) : std::pow(r_extent, u);
    for (int j = 0; j < samples; ++j) {
      const double t = t_lo * std::pow(t_hi / t_lo, double(j) / (samples - 1));
      const double ratio = phi(r * t) / (std::pow(r, p) * phi(t));
      c = std::max(c, ratio);
    }
  }
  return c;
}

double empirical_quasi_triangle(const OrliczSpec& phi, const GridSpec& grid, int pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double k = 0.0;
  for (int p = 0; p < pairs; ++p) {
    GridFunction f(grid), g(grid);
    const double df = u(rng), dg = u(rng);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (u(rng) < df) f[i] = std::exp(4.0 * u(rng) - 2.0);
      if (u(rng) < dg) g[i] = std::exp(4.0 * u(rng) - 2.0);
    }
    const double nf = luxemburg_norm(f, phi), ng = luxemburg_norm(g, phi);
    if (nf + ng == 0.0) continue;
    GridFunction s = f;
    s += g;
    k = std::max(k, luxemburg_norm(s, phi) / (nf + ng));
  }
  return k;
}

}  // namespace hh
