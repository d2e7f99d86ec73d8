#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "hhardy/error.hpp"

namespace hh {

// Largest supported n. Points live on the stack.
inline constexpr int kMaxN = 4;
inline constexpr int kMaxDim = 2 * kMaxN + 1;

inline int homogeneous_dimension(int n) { return 2 * n + 2; }
inline int topological_dimension(int n) { return 2 * n + 1; }
void check_n(int n);

// Point (x, t) of H^n stored as coords [x_1..x_2n, t].
class HPoint {
 public:
  HPoint() : HPoint(1) {}
  explicit HPoint(int n);
  HPoint(std::span<const double> x, double t);
  static HPoint from_coords(int n, std::span<const double> coords);

  int n() const { return n_; }
  int dim() const { return 2 * n_ + 1; }
  double x(int i) const { return c_[i]; }
  double& x(int i) { return c_[i]; }
  double t() const { return c_[2 * n_]; }
  double& t() { return c_[2 * n_]; }
  double coord(int k) const { return c_[k]; }
  double& coord(int k) { return c_[k]; }
  std::span<const double> coords() const { return {c_.data(), std::size_t(dim())}; }
  std::span<const double> xs() const { return {c_.data(), std::size_t(2 * n_)}; }
  std::vector<double> to_vector() const { return {c_.begin(), c_.begin() + dim()}; }

 private:
  int n_;
  std::array<double, kMaxDim> c_{};
};

// x^T J y with J = 2 [[0, -I], [I, 0]].
inline double symplectic(int n, const double* x, const double* y) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += x[i + n] * y[i] - x[i] * y[i + n];
  return 2.0 * s;
}

HPoint multiply(const HPoint& p, const HPoint& q);
HPoint inverse(const HPoint& p);
HPoint dilate(double lambda, const HPoint& p);
HPoint identity(int n);

inline double koranyi_norm4(int n, const double* c) {
  double r2 = 0.0;
  for (int i = 0; i < 2 * n; ++i) r2 += c[i] * c[i];
  const double t = c[2 * n];
  return r2 * r2 + t * t;
}
inline double koranyi_norm(const HPoint& z) { return std::sqrt(std::sqrt(koranyi_norm4(z.n(), z.coords().data()))); }

// rho(p^{-1} q)^4 from raw coordinates.
inline double relative_norm4(int n, const double* p, const double* q) {
  double r2 = 0.0;
  for (int i = 0; i < 2 * n; ++i) {
    const double d = q[i] - p[i];
    r2 += d * d;
  }
  const double t = q[2 * n] - p[2 * n] - symplectic(n, p, q);
  return r2 * r2 + t * t;
}
inline double quasi_distance(const HPoint& p, const HPoint& q) {
  return std::sqrt(std::sqrt(relative_norm4(p.n(), p.coords().data(), q.coords().data())));
}

// Quasi-triangle constant of the Koranyi norm.
inline constexpr double kQuasiTriangle = 1.0;

struct KoranyiBall {
  HPoint center;
  double radius;
  KoranyiBall(HPoint c, double r);
  bool contains(const HPoint& w) const { return quasi_distance(center, w) < radius; }
  KoranyiBall dilated(double factor) const { return {center, factor * radius}; }
};

struct MonteCarloEstimate {
  double value;
  double std_error;
  std::int64_t samples;
  std::uint64_t seed;
};

// |B(e,1)| by seeded Monte Carlo; computed once per n and cached.
const MonteCarloEstimate& unit_ball_constant(int n);
MonteCarloEstimate estimate_unit_ball(int n, std::int64_t samples, std::uint64_t seed);
double ball_volume(double radius, int n);

}  // namespace hh
