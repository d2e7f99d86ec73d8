#include "hhardy/grid.hpp"

#include <algorithm>
#include <cmath>

namespace hh {

GridSpec::GridSpec(int n_, std::vector<double> lo_, std::vector<double> hi_, std::vector<int> res_)
    : n(n_), lo(std::move(lo_)), hi(std::move(hi_)), res(std::move(res_)) {
  check_n(n);
  const int d = dim();
  require(int(lo.size()) == d && int(hi.size()) == d && int(res.size()) == d, ErrorKind::configuration,
          "grid bounds and resolution need 2n+1 entries");
  for (int k = 0; k < d; ++k) {
    require(std::isfinite(lo[k]) && std::isfinite(hi[k]) && lo[k] < hi[k], ErrorKind::configuration,
            "grid bounds must be finite with lo < hi");
    require(res[k] >= 1, ErrorKind::configuration, "grid resolution must be positive");
  }
}

GridSpec GridSpec::symmetric(int n, double a, double b, int rx, int rt) {
  std::vector<double> lo(2 * n + 1, -a), hi(2 * n + 1, a);
  std::vector<int> res(2 * n + 1, rx);
  lo.back() = -b;
  hi.back() = b;
  res.back() = rt;
  return GridSpec(n, lo, hi, res);
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int k = 0; k < dim(); ++k) v *= spacing(k);
  return v;
}

std::size_t GridSpec::size() const {
  std::size_t s = 1;
  for (int r : res) s *= std::size_t(r);
  return s;
}

std::size_t GridSpec::stride(int k) const {
  std::size_t s = 1;
  for (int j = dim() - 1; j > k; --j) s *= std::size_t(res[j]);
  return s;
}

void GridSpec::unravel(std::size_t idx, int* ids) const {
  for (int k = dim() - 1; k >= 0; --k) {
    ids[k] = int(idx % std::size_t(res[k]));
    idx /= std::size_t(res[k]);
  }
}

std::size_t GridSpec::ravel(const int* ids) const {
  std::size_t idx = 0;
  for (int k = 0; k < dim(); ++k) idx = idx * std::size_t(res[k]) + std::size_t(ids[k]);
  return idx;
}

HPoint GridSpec::center(std::size_t idx) const {
  int ids[kMaxDim];
  unravel(idx, ids);
  HPoint z(n);
  for (int k = 0; k < dim(); ++k) z.coord(k) = center_coord(k, ids[k]);
  return z;
}

std::vector<double> GridSpec::centers() const {
  const int d = dim();
  std::vector<double> out(size() * d);
  int ids[kMaxDim];
  for (std::size_t i = 0; i < size(); ++i) {
    unravel(i, ids);
    for (int k = 0; k < d; ++k) out[i * d + k] = center_coord(k, ids[k]);
  }
  return out;
}

bool GridSpec::contains(const HPoint& z) const {
  for (int k = 0; k < dim(); ++k)
    if (z.coord(k) < lo[k] || z.coord(k) > hi[k]) return false;
  return true;
}

std::optional<std::size_t> GridSpec::locate(const HPoint& z) const {
  require(z.n() == n, ErrorKind::configuration, "point and grid have different n");
  if (!contains(z)) return std::nullopt;
  int ids[kMaxDim];
  for (int k = 0; k < dim(); ++k) ids[k] = std::clamp(int((z.coord(k) - lo[k]) / spacing(k)), 0, res[k] - 1);
  return ravel(ids);
}

double GridSpec::diameter() const {
  HPoint a(n), b(n);
  for (int k = 0; k < dim(); ++k) {
    a.coord(k) = lo[k];
    b.coord(k) = hi[k];
  }
  double d = quasi_distance(a, b);
  // The opposite diagonal in the symplectic pairing can be longer.
  for (int i = 0; i < n; ++i) std::swap(a.x(i + n), b.x(i + n));
  return std::max(d, quasi_distance(a, b));
}

GridFunction::GridFunction(GridSpec spec, double fill) : spec_(std::move(spec)), v_(spec_.size(), fill) {}

GridFunction::GridFunction(GridSpec spec, std::vector<double> values) : spec_(std::move(spec)), v_(std::move(values)) {
  require(v_.size() == spec_.size(), ErrorKind::configuration, "value count does not match grid size");
}

GridFunction GridFunction::sample(const GridSpec& spec, const std::function<double(const HPoint&)>& f) {
  GridFunction g(spec);
  for (std::size_t i = 0; i < g.size(); ++i) g.v_[i] = f(spec.center(i));
  return g;
}

GridFunction GridFunction::indicator(const GridSpec& spec, const KoranyiBall& ball) {
  return sample(spec, [&](const HPoint& z) { return ball.contains(z) ? 1.0 : 0.0; });
}

double GridFunction::integral() const {
  double s = 0.0;
  for (double v : v_) s += v;
  return s * spec_.cell_volume();
}

double GridFunction::sup_norm() const {
  double s = 0.0;
  for (double v : v_) s = std::max(s, std::abs(v));
  return s;
}

double GridFunction::lp_norm(double p) const {
  require(p > 0.0, ErrorKind::configuration, "L^p exponent must be positive");
  if (std::isinf(p)) return sup_norm();
  double s = 0.0;
  for (double v : v_) s += std::pow(std::abs(v), p);
  return std::pow(s * spec_.cell_volume(), 1.0 / p);
}

double GridFunction::support_measure() const {
  std::size_t c = 0;
  for (double v : v_) c += v != 0.0;
  return double(c) * spec_.cell_volume();
}

double GridFunction::interpolate(const HPoint& z) const {
  if (!spec_.contains(z)) return 0.0;
  const int d = spec_.dim();
  int base[kMaxDim];
  double frac[kMaxDim];
  for (int k = 0; k < d; ++k) {
    double u = (z.coord(k) - spec_.lo[k]) / spec_.spacing(k) - 0.5;
    u = std::clamp(u, 0.0, double(spec_.res[k] - 1));
    int i = std::min(int(u), std::max(spec_.res[k] - 2, 0));
    base[k] = i;
    frac[k] = spec_.res[k] > 1 ? u - i : 0.0;
  }
  double s = 0.0;
  int ids[kMaxDim];
  for (int corner = 0; corner < (1 << d); ++corner) {
    double w = 1.0;
    for (int k = 0; k < d; ++k) {
      const int bit = (corner >> k) & 1;
      ids[k] = std::min(base[k] + bit, spec_.res[k] - 1);
      w *= bit ? frac[k] : 1.0 - frac[k];
    }
    if (w != 0.0) s += w * v_[spec_.ravel(ids)];
  }
  return s;
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  require(o.spec_ == spec_, ErrorKind::configuration, "grid mismatch");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
  require(o.spec_ == spec_, ErrorKind::configuration, "grid mismatch");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(double s) {
  for (double& v : v_) v *= s;
  return *this;
}

}  // namespace hh
