#pragma once

#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hhardy/calculus.hpp"
#include "hhardy/grid.hpp"
#include "hhardy/orlicz.hpp"

namespace hh {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// m_Phi = Q (floor(1/i(Phi) - 1) + 1), clamped at 0 for i(Phi) > 1.
int critical_moment_order(const OrliczSpec& phi, int n);

// Polynomial of homogeneous degree <= m written in the local variable u = delta_{1/r}(c^{-1} z).
// The span of these is exactly P_m, and on B(c, r) every basis monomial is bounded by 1.
struct LocalPolynomial {
  HPoint center;
  double radius = 1.0;
  std::vector<MultiIndex> basis;
  std::vector<double> coeffs;

  double operator()(const HPoint& z) const;
  double operator()(const double* z) const;
};

// Local monomial values u^I at z for every I in `basis`.
void local_monomials(const std::vector<MultiIndex>& basis, const HPoint& center, double radius, const double* z,
                     double* out);

// Best fit of f against P_m in L^2(weight dz): the moments of (f - P) weight against P_m vanish.
LocalPolynomial moment_projection(const GridFunction& f, const GridFunction& weight, const KoranyiBall& ball, int m);

// Gram matrix of the local monomials over the grid cells inside `ball` (row-major).
std::vector<double> moment_gram(const GridSpec& grid, const KoranyiBall& ball, int m);
double smallest_eigenvalue(const std::vector<double>& symmetric, int size);

struct Atom {
  GridFunction samples;
  KoranyiBall ball{HPoint(1), 1.0};
  OrliczSpec phi = OrliczSpec::power(1.0);
  double p0 = kInfinity;
  int m = 0;

  // |B|^{1/p0} / ||chi_B||_Phi, or 1 / ||chi_B||_Phi for p0 = inf.
  double size_bound() const;
  nlohmann::json to_json(const std::string& grid_ref = "") const;
};

struct AtomTolerances {
  double moment_rel = 1e-10;  // times ||a||_inf |B|
  double size_rel = 1e-9;
  int min_cells_across = 16;
};

struct AtomValidation {
  bool support = false, size = false, moments = false;
  double outside_sup = 0.0;  // sup |a| outside B
  double norm = 0.0, bound = 0.0;
  double moment_max = 0.0, moment_tol = 0.0;
  bool ok() const { return support && size && moments; }
  nlohmann::json to_json() const;
};

// Checks support, size and moment conditions on the grid; moments are taken against the local monomials.
AtomValidation validate_atom(const Atom& a, const AtomTolerances& tol = {});
// Same checks for an arbitrary exponent p0, e.g. an L^inf atom viewed as an L^p0 atom.
AtomValidation validate_atom(const Atom& a, double p0, const AtomTolerances& tol = {});
// Sparse form: the atom is `values` on `cells` and zero elsewhere.
AtomValidation validate_atom(const GridSpec& grid, const std::vector<std::size_t>& cells,
                             const std::vector<double>& values, const KoranyiBall& ball, const OrliczSpec& phi,
                             double p0, int m, const AtomTolerances& tol = {});

Atom make_atom(const GridSpec& grid, const SmoothField& bump, const KoranyiBall& ball, const OrliczSpec& phi,
               double p0, int m);
Atom make_atom(const GridFunction& bump, const KoranyiBall& ball, const OrliczSpec& phi, double p0, int m);

}  // namespace hh
