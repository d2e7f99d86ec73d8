#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "hhardy/calculus.hpp"
#include "hhardy/grid.hpp"
#include "hhardy/orlicz.hpp"

namespace hh {

struct MaximalConfig {
  // Dyadic ball radii 2^k in [r_min, r_max]; zero means derive from the grid.
  double r_min = 0.0;
  double r_max = 0.0;
  bool offset_scan = true;
  // Convolution scales 2^{-j}, j in [j_lo, j_hi], kept only where resolved.
  int j_lo = -6;
  int j_hi = 6;
  int N = 0;  // zero means smallest integer > Q + 2
  double L = 0.0;  // zero means 2Q
  std::uint64_t dictionary_seed = 20240611;

  int seminorm_order(int n) const { return N > 0 ? N : 2 * n + 5; }
  double peak_exponent(int n) const { return L > 0.0 ? L : 2.0 * (2 * n + 2); }
  nlohmann::json to_json() const;
};

std::vector<double> dyadic_radii(const GridSpec& grid, const MaximalConfig& cfg);
// Kernel of scale t spans at least three cells in the volume-equivalent sense.
bool scale_resolved(const GridSpec& grid, double t);
std::vector<int> resolved_scales(const GridSpec& grid, const MaximalConfig& cfg);

// Integrals of a piecewise-constant grid function over Koranyi balls clipped to the box.
class BallIntegrator {
 public:
  explicit BallIntegrator(const GridFunction& f, bool absolute = true);
  struct Result {
    double integral;
    double measure;
  };
  Result integrate(const HPoint& center, double r) const;
  double average(const HPoint& center, double r) const;

 private:
  double prefix_at(std::size_t column, double u) const;
  GridSpec spec_;
  std::vector<double> prefix_;  // per x-column, res_t + 1 entries
  std::vector<double> values_;
};

double hl_maximal(const GridFunction& f, const HPoint& z, const MaximalConfig& cfg = {});
GridFunction hl_maximal_field(const GridFunction& f, const MaximalConfig& cfg = {});
double hl_maximal(const BallIntegrator& bi, const GridSpec& grid, const HPoint& z, const std::vector<double>& radii,
                  bool offset_scan);

// phi(z) = psi(rho(z)^4) with psi a polynomial on [0, 1) and zero beyond.
struct RadialKernel {
  int n = 1;
  std::vector<double> coeffs;  // psi(s) = sum c_m s^m
  AlgebraicField field;        // the same function in exact form

  // (1 - s)^k q(s) scaled by `scale`.
  static RadialKernel bump(int n, int k, const std::vector<double>& q, double scale = 1.0);
  double profile(double s) const;
  double operator()(const HPoint& z) const;
  SmoothField smooth() const { return SmoothField::from(field); }
  double integral() const;  // exact integral over H^n
  RadialKernel scaled(double s) const;
};

// Seeded family of radial bumps normalised to unit seminorm of order N.
const std::vector<RadialKernel>& default_dictionary(int n, int N, std::uint64_t seed);

// (f * phi_t)(z) = int f(w) phi_t(w^{-1} z) dw for every grid cell, for each kernel and scale 2^{-j}.
// Result indexed [kernel][scale].
std::vector<std::vector<GridFunction>> radial_convolutions(const GridFunction& f,
                                                           const std::vector<RadialKernel>& kernels,
                                                           const std::vector<int>& js);

GridFunction heat_style_convolution(const GridFunction& f, const SmoothField& phi, int j);
GridFunction heat_style_convolution(const GridFunction& f, const RadialKernel& phi, int j);

GridFunction discrete_maximal(const GridFunction& f, const RadialKernel& phi, const MaximalConfig& cfg = {});
GridFunction peak_maximal(const GridFunction& f, const RadialKernel& phi, double L, const MaximalConfig& cfg = {});
GridFunction grand_maximal(const GridFunction& f, const std::vector<RadialKernel>& dictionary,
                           const MaximalConfig& cfg = {});
GridFunction grand_maximal(const GridFunction& f, const MaximalConfig& cfg = {});

struct InequalityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  nlohmann::json config;
  nlohmann::json to_json() const;
};

InequalityReport fefferman_stein_check(const std::vector<GridFunction>& family, double r, const OrliczSpec& phi,
                                       const MaximalConfig& cfg = {});

}  // namespace hh
