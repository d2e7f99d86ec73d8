#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <nlohmann/json.hpp>

#include "hhardy/atoms.hpp"
#include "hhardy/calculus.hpp"
#include "hhardy/grid.hpp"
#include "hhardy/maximal.hpp"
#include "hhardy/orlicz.hpp"
#include "hhardy/quadrature.hpp"

namespace hh {

// I_n = int |x|^2 (rho^4 + 1)^{-(n+4)/2} dz; c_n = 1 / (4 n (n+2) I_n) for L = -sum X_i^2.
double cn_integral_polar(int n, int radial_order = 48);
// Midpoint rule on [-L, L]^{2n} x [-L^2, L^2].
double cn_integral_tensor(int n, double half_width, int res_x, int res_t);
MonteCarloEstimate cn_integral_monte_carlo(int n, std::size_t samples, std::uint64_t seed);
// Cached; checked against a second radial order.
double cn_constant(int n);

double fundamental_kernel(const HPoint& z);
// c_n rho^{-2n} in exact form, and its X^I derivative.
AlgebraicField fundamental_kernel_field(int n);
AlgebraicField kernel_derivative_field(int n, const MultiIndex& I);

// int_{B(e,R)} f dz by a polar product rule.
double polar_integral(int n, const std::function<double(const HPoint&)>& f, double R, int n_radial = 32,
                      int n_phi = 24, int n_angle = 12);
// <L u, c_n rho^{-2n}> for u supported in B(e, R), with L u in exact form.
double fundamental_pairing(const AlgebraicField& u, double R, int n_radial = 32, int n_phi = 24, int n_angle = 12);

struct SolverConfig {
  double q = 1.2;
  double beta = 1.0;
  int refine = 8;       // subcells per axis near the kernel singularity
  int near_cells = 2;   // cells around the target treated as near
  std::vector<double> radii;  // r-grid for eta; empty means dyadic over [2h, diameter]
  std::vector<double> eps;    // eps-grid for T*; empty means dyadic over [2h, diameter]
  int n_radial = 4, n_phi = 6, n_angle = 4;  // ball rule for local L^q averages
  int restarts = 4;
  double opt_tol = 1e-10;
  std::uint64_t seed = 7;

  // 1 < q < (n+1)/n.
  void validate(int n) const;
  nlohmann::json to_json() const;
};

std::vector<double> default_radii(const GridSpec& grid);

// b(z) = int c_n rho(w^{-1} z)^{-2n} a(w) dw on the cell centres of `out`.
GridFunction potential(const GridFunction& a, const GridSpec& out, const SolverConfig& cfg = {});
GridFunction potential(const GridFunction& a, const SolverConfig& cfg = {});
GridFunction potential(const Atom& a, const GridSpec& out, const SolverConfig& cfg = {});
// Far-field evaluation at arbitrary points (no singular-cell treatment): plain cell-centre quadrature
// of the kernel, or of X^I applied to it.
std::vector<double> potential_at(const GridFunction& a, const std::vector<HPoint>& points);
std::vector<double> potential_derivative_at(const GridFunction& a, const MultiIndex& I,
                                            const std::vector<HPoint>& points);

// Least-squares slope of log|v| against log s.
double loglog_slope(const std::vector<double>& s, const std::vector<double>& v);

std::vector<MultiIndex> second_order_indices(int n);
// sup over the eps-grid of |int_{rho(w^{-1} z) > eps} (X^I rho^{-2n})(w^{-1} z) a(w) dw|.
double truncated_singular_sup(const MultiIndex& I, const GridFunction& a, const HPoint& z,
                              const std::vector<double>& eps);

// A function modulo P_k. Either grid samples (balls clipped to the box) or a closed form.
struct PolyClass {
  int n = 1;
  int k = 1;
  std::function<double(const HPoint&)> eval;
  std::optional<GridSpec> box;  // when set, averages use the part of each ball inside the box

  static PolyClass from_grid(const GridFunction& g, int k = 1);
  static PolyClass from_function(int n, std::function<double(const HPoint&)> f, int k = 1);
  PolyClass operator+(const PolyClass& o) const;
};

// Equality of classes: the least-squares P_k fit of the difference on the box leaves a residual below tol.
bool same_class(const GridFunction& a, const GridFunction& b, int k, double tol);

double eta_maximal(const PolyClass& g, double q, double gamma, const HPoint& z, const std::vector<double>& radii,
                   const SolverConfig& cfg = {});

struct CalderonResult {
  double value = 0.0;
  std::vector<double> coeffs;  // optimal P_1 offset in the basis 1, x_1 - x_1(z), ..., x_2n - x_2n(z)
  bool converged = false;
};
CalderonResult calderon_maximal(const PolyClass& G, double q, double gamma, const HPoint& z,
                                const std::vector<double>& radii, const SolverConfig& cfg = {},
                                std::uint64_t seed = 0);

struct CalderonNorm {
  double norm = 0.0;
  GridFunction field;
  bool converged = true;
};
CalderonNorm calderon_hardy_norm(const PolyClass& G, const OrliczSpec& phi, double q, double gamma,
                                 const GridSpec& out, const SolverConfig& cfg = {});

struct PointwiseReport {
  double max_ratio = 0.0;  // empirical C
  std::size_t samples = 0;
  std::size_t far_samples = 0;  // points outside 4 beta^2 B, where only the first term is present
  nlohmann::json to_json() const;
};
PointwiseReport pointwise_estimate_check(const Atom& a, const GridFunction& b, const std::vector<HPoint>& points,
                                         const SolverConfig& cfg = {});

// Truncated modular int_{rho(z) < R} Phi(N(G; z)) dz by polar quadrature of the N-field.
double truncated_modular(const PolyClass& G, const OrliczSpec& phi, double q, double R, const SolverConfig& cfg = {},
                         int n_radial = 4, int n_phi = 4, int n_angle = 2);

}  // namespace hh
