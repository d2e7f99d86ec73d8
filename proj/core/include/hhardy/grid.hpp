#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "hhardy/calculus.hpp"
#include "hhardy/group.hpp"

namespace hh {

// Uniform cell-centred grid on an axis-aligned box in (x, t) coordinates.
struct GridSpec {
  int n = 1;
  std::vector<double> lo, hi;
  std::vector<int> res;

  GridSpec() = default;
  GridSpec(int n, std::vector<double> lo, std::vector<double> hi, std::vector<int> res);
  // Symmetric box [-a, a]^{2n} x [-b, b].
  static GridSpec symmetric(int n, double a, double b, int rx, int rt);

  int dim() const { return 2 * n + 1; }
  double spacing(int k) const { return (hi[k] - lo[k]) / res[k]; }
  double cell_volume() const;
  std::size_t size() const;
  std::size_t stride(int k) const;
  double center_coord(int k, int i) const { return lo[k] + (i + 0.5) * spacing(k); }
  void unravel(std::size_t idx, int* ids) const;
  std::size_t ravel(const int* ids) const;
  HPoint center(std::size_t idx) const;
  // Flat (size x dim) array of centres.
  std::vector<double> centers() const;
  bool contains(const HPoint& z) const;
  std::optional<std::size_t> locate(const HPoint& z) const;
  // Largest quasi-distance between two box corners.
  double diameter() const;
  Box box() const { return {lo, hi}; }
  bool operator==(const GridSpec& o) const { return n == o.n && lo == o.lo && hi == o.hi && res == o.res; }
};

class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(GridSpec spec, double fill = 0.0);
  GridFunction(GridSpec spec, std::vector<double> values);
  static GridFunction sample(const GridSpec& spec, const std::function<double(const HPoint&)>& f);
  static GridFunction indicator(const GridSpec& spec, const KoranyiBall& ball);

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }
  double& operator[](std::size_t i) { return v_[i]; }
  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }

  double integral() const;
  double sup_norm() const;
  double lp_norm(double p) const;
  double support_measure() const;
  // Multilinear interpolation between cell centres, clamped at the box faces; zero outside the box.
  double interpolate(const HPoint& z) const;

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(double s);

 private:
  GridSpec spec_;
  std::vector<double> v_;
};

}  // namespace hh
