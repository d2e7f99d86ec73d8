#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hhardy/czd.hpp"
#include "hhardy/io.hpp"

namespace hh::checks {

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;  // measured quantity, compared against `tolerance`
  double tolerance = 0.0;
  nlohmann::json detail = nlohmann::json::object();
  nlohmann::json to_json() const;
};

struct SuiteReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;
  bool pass() const;
  nlohmann::json to_json() const;
};

HPoint point(double x1, double x2, double t);

// Group law, dilations, norm and metric identities on seeded random points; value is the largest error.
CheckResult group_identities(std::uint64_t seed, int samples, double tol);
// |B(c, r)| = r^Q |B(e, 1)| against clipped grid counts.
CheckResult ball_volume_scaling(double tol);

// |<L u, c_1 rho^-2> - u(0)| / |u(0)| for three bumps. Wall time per bump goes to `seconds` when given.
CheckResult fundamental_pairing(double rel_tol, std::vector<double>* seconds = nullptr);
// |polar - Monte Carlo| in Monte Carlo standard errors.
CheckResult cn_cross_validation(std::uint64_t seed, std::size_t samples, double sigmas);

// Luxemburg norm of power(p) against direct L^p norms, and indicator norms against 1 / Phi^{-1}(1/|E|).
CheckResult luxemburg_lp(std::uint64_t seed, int functions, double rel_tol);
// ||f||_Phi^s = || |f|^s ||_{Phi_{1/s}} for s in {1/2, 2} and the four built-in families.
CheckResult power_identity(std::uint64_t seed, double rel_tol);
// ts <= Phi(t) + Phi*(s) and s <= Phi^{-1}(s) Phi*^{-1}(s) <= 2s; value is the violation count.
CheckResult young_and_inverse_product(std::uint64_t seed, int samples, double slack);

// make_atom for Phi = power(2/3), m = 0..m_Phi; value is the largest relative moment.
CheckResult atom_validity(double moment_rel);

// Log-log slopes of atom potentials along three rays; value is the largest deviation from -Q.
CheckResult potential_decay(double tol_slope, double tol_derivative);
// Weak residual of the potential of one atom against two test bumps.
CheckResult atom_potential_pairing(double rel_tol);

// (w1)-(w4) on seeded random open sets; value is the number of failing covers.
CheckResult whitney_random(std::uint64_t seed, int sets);
// Decomposition of one scaled atom; value is the relative L^2 reconstruction residual.
CheckResult single_atom_decomposition(double rel_tol);

// Truncated modular of the class of g(z) = t across domain doublings; value is the number of non-increases.
CheckResult triviality(double p, double q, int doublings);

// Largest pairwise ratio of ||M_N f||, ||M*_phi f||, ||M^dis_phi f|| over five inputs and two Phi.
CheckResult maximal_comparability(double factor);
// M f >= |f| at every cell and M is sublinear on two inputs.
CheckResult hl_maximal_properties(double slack);

// End-to-end Poisson solve for a source manifest.
struct SolveRun {
  PoissonSolution solution;
  InequalityReport atomic;
  double seconds = 0.0;
};
SourceManifest three_atom_source(const GridSpec& grid);
SolveRun run_solve(const SourceManifest& src, double q, int m, const PoissonConfig& cfg = {});

}  // namespace hh::checks
