#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hhardy/atoms.hpp"
#include "hhardy/grid.hpp"
#include "hhardy/maximal.hpp"
#include "hhardy/orlicz.hpp"
#include "hhardy/potential.hpp"

namespace hh {

// A set of grid cells, O in the open-set sense, with membership tested at cell centres.
struct GridSet {
  GridSpec spec;
  std::vector<std::uint8_t> in;

  GridSet() = default;
  explicit GridSet(GridSpec s) : spec(std::move(s)), in(spec.size(), 0) {}
  static GridSet threshold(const GridFunction& f, double level);  // {f > level}
  static GridSet from_balls(const GridSpec& spec, const std::vector<KoranyiBall>& balls);

  std::size_t count() const;
  bool empty() const { return count() == 0; }
  bool full() const { return count() == in.size(); }
  bool contains(std::size_t i) const { return in[i] != 0; }
  bool subset_of(const GridSet& o) const;
};

// Cells whose centre lies in the open ball.
std::vector<std::size_t> cells_in_ball(const GridSpec& grid, const KoranyiBall& ball);

// rho-distance from each cell of O to the nearest cell of the complement (0 outside O).
std::vector<double> distance_to_complement(const GridSet& O);

// Levels j with O_j and its complement both non-empty, for O_j = {mf > 2^j}. Empty when lo > hi.
struct LevelWindow {
  int lo = 0;
  int hi = -1;
  bool empty() const { return lo > hi; }
};
LevelWindow level_window(const GridFunction& mf);
std::vector<GridSet> level_sets(const GridFunction& mf, int j_lo, int j_hi);

struct LevelSets {
  GridFunction maximal;  // M_N f
  LevelWindow window;
  std::vector<GridSet> sets;  // sets[i] is O_{window.lo + i}
};
LevelSets level_sets(const GridFunction& f, const MaximalConfig& cfg = {});

struct WhitneyConstants {
  double gamma = 1.0;
  double beta = 1.0;
  int N = 0;
  double T1 = 9.0, T2 = 18.0, T3 = 54.0;

  static WhitneyConstants make(double gamma, double beta, int N);
  nlohmann::json to_json() const;
};

struct WhitneyCheck {
  bool w1 = false, w2 = false, w3 = false, w4 = false;
  int overlap = 0;  // L: largest number of T2-dilates containing one cell
  std::size_t uncovered = 0, intersecting_pairs = 0, t2_violations = 0, t3_violations = 0;
  bool ok() const { return w1 && w2 && w3 && w4; }
  nlohmann::json to_json() const;
};

struct WhitneyCover {
  WhitneyConstants constants;
  std::vector<KoranyiBall> balls;
  std::vector<std::size_t> centers;  // grid cell of each ball centre
  std::vector<double> distances;      // rho-distance of each centre to the complement
  WhitneyCheck check;
  nlohmann::json to_json() const;
};

// Greedy cover by balls of radius dist(z, O^c) / (2 T2), largest first, keeping quarter-balls disjoint.
// Raises a domain error when O is the whole box. `max_overlap` bounds (w4) when positive.
WhitneyCover whitney_cover(const GridSet& O, const WhitneyConstants& c, int max_overlap = 0);
// Independent grid-set verification of (w1)-(w4).
WhitneyCheck verify_whitney(const GridSet& O, const WhitneyCover& cover, int max_overlap = 0);

struct DecompositionConfig {
  MaximalConfig maximal;
  double beta = 1.0;
  std::optional<int> j_min, j_max;  // clip the level window
  bool close_window = true;         // add a closing level whose single ball contains the box
  int max_levels = 40;
  std::size_t max_atoms = 200000;
  double drop_rel = 1e-12;  // h with sup below drop_rel * sup|f| are discarded
  AtomTolerances tolerances{1e-10, 1e-9, 0};

  nlohmann::json to_json() const;
};

struct DecompositionTerm {
  int j = 0;
  int k = 0;
  double lambda = 0.0;
  KoranyiBall ball{HPoint(1), 1.0};  // T2 B_{j,k}
  std::vector<std::size_t> cells;
  std::vector<double> values;  // atom values on `cells`
  AtomValidation validation;

  Atom to_atom(const GridSpec& grid, const OrliczSpec& phi, int m) const;
};

struct LevelSummary {
  int j = 0;
  std::size_t cells = 0;
  std::size_t balls = 0;
  bool closing = false;
  WhitneyCheck check;
  nlohmann::json to_json() const;
};

struct AtomicDecomposition {
  GridSpec grid;
  OrliczSpec phi = OrliczSpec::power(1.0);
  int m = 0;
  WhitneyConstants constants;
  double C = 0.0;  // max_{j,k} sup|h_{j,k}| / 2^j
  LevelWindow window;
  GridFunction maximal;
  std::vector<LevelSummary> levels;
  std::vector<DecompositionTerm> terms;  // ordered by (j, k)
  std::size_t dropped = 0;
  bool truncated = false;
  double f_l2 = 0.0;
  double residual_l2 = 0.0;  // ||f - sum lambda a||_2

  GridFunction reconstruct() const;
  bool atoms_valid() const;
  // Array of {j, k, lambda, ball, atom-ref}.
  nlohmann::json manifest(const std::string& atom_prefix = "atom") const;
  nlohmann::json summary() const;
};

AtomicDecomposition atomic_decompose(const GridFunction& f, const OrliczSpec& phi, int m,
                                     const DecompositionConfig& cfg = {});
// Same, reusing a precomputed M_N f.
AtomicDecomposition atomic_decompose(const GridFunction& f, const GridFunction& maximal, const OrliczSpec& phi,
                                     int m, const DecompositionConfig& cfg = {});

// min{1, i(Phi)} / 2.
double default_theta(const OrliczSpec& phi);
// || { sum (lambda chi_B / ||chi_B||_Phi)^theta }^{1/theta} ||_Phi over the atom balls, on the grid.
double atomic_norm_functional(const AtomicDecomposition& d, double theta);
// lhs = atomic functional, rhs = ||M_N f||_Phi.
InequalityReport atomic_norm_check(const AtomicDecomposition& d, double theta);

// || sum k_j chi_{r B_j} M a_j ||_Phi against || { sum (k_j chi_{B_j} / ||chi_{B_j}||_Phi)^theta }^{1/theta} ||_Phi.
InequalityReport max_on_atoms_check(const std::vector<Atom>& atoms, const std::vector<double>& k, double r,
                                    double theta, const MaximalConfig& cfg = {});

// Raises a parameter error naming the failing inequality.
void check_poisson_parameters(int n, const OrliczSpec& phi, double q);

struct PoissonConfig {
  SolverConfig solver;
  DecompositionConfig decomposition;
  double gamma = 2.0;   // N_{q, gamma}
  int battery = 5;      // test functions for the weak residual
  int norm_res = 6;     // per-axis resolution of the grid where N_{q, gamma} F is sampled
  std::uint64_t seed = 11;

  nlohmann::json to_json() const;
};

struct PoissonDiagnostics {
  double weak_residual = 0.0;  // l2 over the battery, relative
  std::vector<double> pairings_F, pairings_f;
  double norm_lhs = 0.0;  // ||M_N (L F)||_Phi, with L F the atomic sum
  double norm_rhs = 0.0;  // ||N_{q, gamma} F||_Phi
  double ratio = 0.0;
  double reconstruction = 0.0;  // relative L^2 residual of the decomposition
  std::size_t atoms = 0;
  bool converged = true;
  nlohmann::json to_json() const;
};

struct PoissonSolution {
  GridFunction F;
  AtomicDecomposition decomposition;
  PoissonDiagnostics diagnostics;
};

PoissonSolution solve_poisson(const GridFunction& f, const OrliczSpec& phi, double q, int m,
                              const PoissonConfig& cfg = {});

// Test functions supported inside the box, centres drawn from `seed`.
std::vector<AlgebraicField> test_battery(const GridSpec& grid, int count, std::uint64_t seed);
// Per-function pairings <F, L phi> and <f, phi>, and the relative l2 residual.
double weak_residual(const GridFunction& F, const GridFunction& f, const std::vector<AlgebraicField>& battery,
                     std::vector<double>* pair_F = nullptr, std::vector<double>* pair_f = nullptr);

}  // namespace hh
