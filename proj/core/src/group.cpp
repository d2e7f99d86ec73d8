#include "hhardy/group.hpp"

#include <mutex>
#include <random>
#include <string>

namespace hh {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::domain: return "domain";
    case ErrorKind::singularity: return "singularity";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::accuracy: return "accuracy";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

void check_n(int n) {
  require(n >= 1 && n <= kMaxN, ErrorKind::configuration,
          "n must lie in [1, " + std::to_string(kMaxN) + "], got " + std::to_string(n));
}

HPoint::HPoint(int n) : n_(n) { check_n(n); }

HPoint::HPoint(std::span<const double> x, double t) : n_(int(x.size() / 2)) {
  require(x.size() % 2 == 0 && !x.empty(), ErrorKind::configuration, "x must have even length 2n");
  check_n(n_);
  for (std::size_t i = 0; i < x.size(); ++i) c_[i] = x[i];
  c_[2 * n_] = t;
  for (int k = 0; k < dim(); ++k)
    require(std::isfinite(c_[k]), ErrorKind::domain, "non-finite coordinate");
}

HPoint HPoint::from_coords(int n, std::span<const double> coords) {
  require(int(coords.size()) == 2 * n + 1, ErrorKind::configuration, "expected 2n+1 coordinates");
  return HPoint(coords.first(2 * n), coords[2 * n]);
}

HPoint identity(int n) { return HPoint(n); }

HPoint multiply(const HPoint& p, const HPoint& q) {
  require(p.n() == q.n(), ErrorKind::configuration, "group law needs points of the same n");
  const int n = p.n();
  HPoint r(n);
  for (int i = 0; i < 2 * n; ++i) r.x(i) = p.x(i) + q.x(i);
  r.t() = p.t() + q.t() + symplectic(n, p.coords().data(), q.coords().data());
  return r;
}

HPoint inverse(const HPoint& p) {
  HPoint r(p.n());
  for (int k = 0; k < p.dim(); ++k) r.coord(k) = -p.coord(k);
  return r;
}

HPoint dilate(double lambda, const HPoint& p) {
  require(lambda > 0.0 && std::isfinite(lambda), ErrorKind::domain, "dilation factor must be positive");
  HPoint r(p.n());
  for (int i = 0; i < 2 * p.n(); ++i) r.x(i) = lambda * p.x(i);
  r.t() = lambda * lambda * p.t();
  return r;
}

KoranyiBall::KoranyiBall(HPoint c, double r) : center(c), radius(r) {
  require(r > 0.0 && std::isfinite(r), ErrorKind::domain, "ball radius must be positive");
}

MonteCarloEstimate estimate_unit_ball(int n, std::int64_t samples, std::uint64_t seed) {
  check_n(n);
  require(samples > 1, ErrorKind::configuration, "need at least two samples");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int d = 2 * n + 1;
  std::array<double, kMaxDim> c{};
  std::int64_t hits = 0;
  for (std::int64_t s = 0; s < samples; ++s) {
    for (int k = 0; k < d; ++k) c[k] = u(rng);
    if (koranyi_norm4(n, c.data()) < 1.0) ++hits;
  }
  const double box = std::ldexp(1.0, d);
  const double p = double(hits) / double(samples);
  return {box * p, box * std::sqrt(p * (1.0 - p) / double(samples)), samples, seed};
}

const MonteCarloEstimate& unit_ball_constant(int n) {
  check_n(n);
  static std::array<std::once_flag, kMaxN + 1> once;
  static std::array<MonteCarloEstimate, kMaxN + 1> cache;
  std::call_once(once[n], [n] { cache[n] = estimate_unit_ball(n, 4'000'000, 0x5eed0001ULL + n); });
  return cache[n];
}

double ball_volume(double radius, int n) {
  require(radius >= 0.0, ErrorKind::domain, "radius must be non-negative");
  return unit_ball_constant(n).value * std::pow(radius, homogeneous_dimension(n));
}

}  // namespace hh
