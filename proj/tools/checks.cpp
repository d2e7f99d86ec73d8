#include "checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace hh::checks {

namespace {

SmoothField wobbly_bump(const KoranyiBall& b) {
  return SmoothField::from(1, [b](const HPoint& z) {
    const double s = std::pow(quasi_distance(b.center, z) / b.radius, 4);
    return s < 1.0 ? std::pow(1.0 - s, 3) * (1.0 + 0.7 * z.x(0) - 0.4 * z.t() + 0.3 * z.x(1) * z.x(1)) : 0.0;
  });
}

GridFunction random_function(std::mt19937_64& rng, const GridSpec& g) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GridFunction f(g);
  const double density = 0.2 + 0.8 * u(rng);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (u(rng) < density) f[i] = (u(rng) - 0.5) * std::exp(6.0 * u(rng) - 3.0);
  return f;
}

std::vector<OrliczSpec> builtin_families() {
  return {OrliczSpec::power(1.5), OrliczSpec::sum(0.7, 2.0), OrliczSpec::min(0.5, 1.8), OrliczSpec::tlog()};
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

CheckResult make(std::string name, double value, double tol, bool pass) {
  CheckResult r;
  r.name = std::move(name);
  r.value = value;
  r.tolerance = tol;
  r.pass = pass;
  return r;
}

HPoint random_point(std::mt19937_64& rng, double a) {
  std::uniform_real_distribution<double> u(-a, a);
  const double x1 = u(rng), x2 = u(rng), t = u(rng);
  return point(x1, x2, t);
}

double max_coord_diff(const HPoint& p, const HPoint& q) {
  double d = 0.0;
  for (int k = 0; k < p.dim(); ++k) d = std::max(d, std::abs(p.coord(k) - q.coord(k)));
  return d;
}

}  // namespace

nlohmann::json CheckResult::to_json() const {
  return {{"name", name}, {"pass", pass}, {"value", value}, {"tolerance", tolerance}, {"detail", detail}};
}

bool SuiteReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

nlohmann::json SuiteReport::to_json() const {
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : checks) cs.push_back(c.to_json());
  return {{"suite", suite}, {"seed", seed}, {"pass", pass()}, {"checks", cs}};
}

HPoint point(double x1, double x2, double t) {
  HPoint z(1);
  z.x(0) = x1;
  z.x(1) = x2;
  z.t() = t;
  return z;
}

CheckResult group_identities(std::uint64_t seed, int samples, double tol) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ul(0.2, 5.0);
  double assoc = 0, inv = 0, ident = 0, dil = 0, homog = 0, sym = 0, triangle = 0, invariance = 0;
  for (int s = 0; s < samples; ++s) {
    const HPoint p = random_point(rng, 2.0), q = random_point(rng, 2.0), r = random_point(rng, 2.0);
    const double lam = ul(rng);
    assoc = std::max(assoc, max_coord_diff(multiply(multiply(p, q), r), multiply(p, multiply(q, r))));
    inv = std::max(inv, max_coord_diff(multiply(p, inverse(p)), identity(1)));
    ident = std::max(ident, max_coord_diff(multiply(identity(1), p), p));
    dil = std::max(dil, max_coord_diff(dilate(lam, multiply(p, q)), multiply(dilate(lam, p), dilate(lam, q))));
    homog = std::max(homog, rel_err(koranyi_norm(dilate(lam, p)), lam * koranyi_norm(p)));
    sym = std::max(sym, rel_err(quasi_distance(p, q), quasi_distance(q, p)));
    triangle = std::max(triangle, quasi_distance(p, r) - quasi_distance(p, q) - quasi_distance(q, r));
    invariance = std::max(invariance, rel_err(quasi_distance(multiply(r, p), multiply(r, q)), quasi_distance(p, q)));
  }
  const double worst = std::max({assoc, inv, ident, dil, homog, sym, triangle, invariance});
  CheckResult out = make("group identities", worst, tol, worst <= tol);
  out.detail = {{"samples", samples},     {"associativity", assoc}, {"inverse", inv},
                {"identity", ident},      {"dilation", dil},        {"homogeneity", homog},
                {"symmetry", sym},        {"triangle_excess", triangle},
                {"left_invariance", invariance}};
  return out;
}

CheckResult ball_volume_scaling(double tol) {
  const GridSpec g = GridSpec::symmetric(1, 1.2, 1.5, 48, 60);
  double worst = 0.0;
  nlohmann::json rows = nlohmann::json::array();
  for (double r : {0.6, 0.9}) {
    const KoranyiBall b{point(0.1, -0.1, 0.05), r};
    const double counted = double(cells_in_ball(g, b).size()) * g.cell_volume();
    const double exact = ball_volume(r, 1);
    const double scaled = std::pow(r, 4) * ball_volume(1.0, 1);
    const double e = std::max(rel_err(counted, exact), rel_err(scaled, exact));
    worst = std::max(worst, e);
    rows.push_back({{"radius", r}, {"grid", counted}, {"volume", exact}});
  }
  CheckResult out = make("ball volume scaling", worst, tol, worst <= tol);
  out.detail = {{"balls", rows}};
  return out;
}

CheckResult fundamental_pairing(double rel_tol, std::vector<double>* seconds) {
  struct Case {
    HPoint c;
    double R;
    int k;
    std::vector<double> q;
  };
  const std::vector<Case> cases{{identity(1), 1.0, 5, {1.0}},
                                {point(0.3, -0.2, 0.25), 1.2, 6, {1.0, -1.5, 0.8}},
                                {point(-0.4, 0.1, -0.3), 0.9, 5, {2.0, 0.5}}};
  double worst = 0.0;
  nlohmann::json rows = nlohmann::json::array();
  for (const Case& c : cases) {
    const auto t0 = std::chrono::steady_clock::now();
    const AlgebraicField u = radial_bump(c.c, c.R, c.k, c.q);
    const double u0 = u.evaluate(identity(1));
    const double pair = hh::fundamental_pairing(u, koranyi_norm(c.c) + c.R);
    if (seconds) seconds->push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    const double e = rel_err(pair, u0);
    worst = std::max(worst, e);
    rows.push_back({{"u0", u0}, {"pairing", pair}, {"rel_error", e}});
  }
  CheckResult out = make("fundamental solution pairing", worst, rel_tol, worst <= rel_tol);
  out.detail = {{"cases", rows}, {"c_n", cn_constant(1)}};
  return out;
}

CheckResult cn_cross_validation(std::uint64_t seed, std::size_t samples, double sigmas) {
  const double polar = cn_integral_polar(1);
  const MonteCarloEstimate mc = cn_integral_monte_carlo(1, samples, seed);
  const double z = std::abs(mc.value - polar) / mc.std_error;
  CheckResult out = make("c_n quadrature vs Monte Carlo", z, sigmas, z <= sigmas);
  out.detail = {{"quadrature", polar},         {"monte_carlo", mc.value}, {"std_error", mc.std_error},
                {"samples", mc.samples},       {"seed", mc.seed},        {"c_n", cn_constant(1)}};
  return out;
}

CheckResult luxemburg_lp(std::uint64_t seed, int functions, double rel_tol) {
  const GridSpec g = GridSpec::symmetric(1, 1.0, 1.0, 10, 10);
  std::mt19937_64 rng(seed);
  double worst_lp = 0.0, worst_ind = 0.0;
  for (double p : {0.8, 1.0, 2.0}) {
    const OrliczSpec phi = OrliczSpec::power(p);
    for (int k = 0; k < functions; ++k) {
      const GridFunction f = random_function(rng, g);
      worst_lp = std::max(worst_lp, rel_err(luxemburg_norm(f, phi), f.lp_norm(p)));
    }
  }
  std::uniform_real_distribution<double> ur(0.3, 0.9);
  for (const OrliczSpec& phi : {OrliczSpec::power(0.8), OrliczSpec::power(1.0), OrliczSpec::power(2.0),
                                OrliczSpec::tlog()}) {
    const GridFunction chi = GridFunction::indicator(g, KoranyiBall{random_point(rng, 0.2), ur(rng)});
    const double E = chi.support_measure();
    worst_ind = std::max(worst_ind, rel_err(luxemburg_norm(chi, phi), 1.0 / phi_inverse(phi, 1.0 / E)));
  }
  const double worst = std::max(worst_lp, worst_ind);
  CheckResult out = make("Luxemburg norm of powers and indicators", worst, rel_tol, worst <= rel_tol);
  out.detail = {{"functions_per_p", functions}, {"lp", worst_lp}, {"indicator", worst_ind}};
  return out;
}

CheckResult power_identity(std::uint64_t seed, double rel_tol) {
  const GridSpec g = GridSpec::symmetric(1, 1.0, 1.0, 10, 10);
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& phi : builtin_families())
    for (double s : {0.5, 2.0}) {
      const GridFunction f = random_function(rng, g);
      GridFunction fs = f;
      for (double& v : fs.values()) v = std::pow(std::abs(v), s);
      const double lhs = std::pow(luxemburg_norm(f, phi), s);
      const double rhs = luxemburg_norm(fs, phi_power(phi, 1.0 / s));
      const double e = rel_err(lhs, rhs);
      worst = std::max(worst, e);
      rows.push_back({{"family", phi.name()}, {"s", s}, {"rel_error", e}});
    }
  CheckResult out = make("norm of powers of f", worst, rel_tol, worst <= rel_tol);
  out.detail = {{"cases", rows}};
  return out;
}

CheckResult young_and_inverse_product(std::uint64_t seed, int samples, double slack) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ue(-3.0, 3.0);
  const std::vector<OrliczSpec> convex{OrliczSpec::power(1.5), OrliczSpec::power(2.0), OrliczSpec::sum(1.2, 2.5),
                                       OrliczSpec::tlog()};
  std::size_t young_violations = 0, product_violations = 0;
  double young_excess = 0.0, product_excess = 0.0;
  const int per = std::max(1, samples / int(convex.size()));
  for (const auto& phi : convex) {
    const OrliczSpec conj = complementary(phi);
    for (int k = 0; k < per; ++k) {
      const double t = std::pow(10.0, ue(rng)), s = std::pow(10.0, ue(rng));
      const double e = (t * s - phi(t) - conj(s)) / std::max(1.0, t * s);
      young_excess = std::max(young_excess, e);
      if (e > slack) ++young_violations;
      const double u = std::pow(10.0, ue(rng));
      const double prod = phi_inverse(phi, u) * phi_inverse(conj, u);
      const double ex = std::max(1.0 - prod / u, prod / (2.0 * u) - 1.0);
      product_excess = std::max(product_excess, ex);
      if (ex > slack) ++product_violations;
    }
  }
  const double v = double(young_violations + product_violations);
  CheckResult out = make("Young inequality and inverse product bounds", v, 0.0, v == 0.0);
  out.detail = {{"samples", per * int(convex.size())},     {"slack", slack},
                {"young_violations", young_violations},    {"young_max_excess", young_excess},
                {"product_violations", product_violations}, {"product_max_excess", product_excess}};
  return out;
}

CheckResult atom_validity(double moment_rel) {
  const GridSpec g = GridSpec::symmetric(1, 2.0, 3.0, 32, 48);
  const KoranyiBall b{point(0.3, -0.2, 0.1), 1.0};
  const OrliczSpec sub = OrliczSpec::power(2.0 / 3.0);
  const int m_phi = critical_moment_order(sub, 1);
  // Orders below m_Phi(power(2/3)) are exercised with power(2), whose m_Phi is 0.
  std::vector<std::pair<OrliczSpec, int>> cases;
  for (int m = 0; m < m_phi; ++m) cases.emplace_back(OrliczSpec::power(2.0), m);
  cases.emplace_back(sub, m_phi);
  double worst = 0.0;
  bool ok = m_phi == 4;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [phi, m] : cases)
    for (double p0 : {3.0, kInfinity}) {
      const Atom a = make_atom(g, wobbly_bump(b), b, phi, p0, m);
      const AtomValidation v = validate_atom(a, AtomTolerances{moment_rel, 1e-9, 16});
      const double rel = v.moment_max / (a.samples.sup_norm() * ball_volume(b.radius, 1));
      worst = std::max(worst, rel);
      ok = ok && v.ok() && rel <= moment_rel;
      rows.push_back({{"phi", hh::to_json(phi)}, {"m", m},
                      {"p0", std::isinf(p0) ? nlohmann::json("inf") : nlohmann::json(p0)},
                      {"valid", v.ok()}, {"moment_rel", rel}});
    }
  CheckResult out = make("atoms pass support, size and moment conditions", worst, moment_rel, ok);
  out.detail = {{"m_phi", m_phi}, {"atoms", rows}};
  return out;
}

CheckResult potential_decay(double tol_slope, double tol_derivative) {
  const GridSpec g = GridSpec::symmetric(1, 1.5, 2.25, 24, 36);
  const KoranyiBall ball{point(0.1, -0.1, 0.05), 1.0};
  const Atom a = make_atom(g, wobbly_bump(ball), ball, OrliczSpec::power(2.0), kInfinity, 1);
  const std::vector<double> s{8.0, 11.0, 16.0, 22.0, 32.0};
  const std::vector<HPoint> dirs{point(0.8, 0.3, 0.2), point(-0.3, 0.6, -0.5), point(0.1, -0.4, 0.9)};
  const MultiIndex I({2, 0, 0});
  double worst0 = 0.0, worst2 = 0.0;
  nlohmann::json rows = nlohmann::json::array();
  for (const HPoint& d : dirs) {
    const HPoint w = dilate(1.0 / koranyi_norm(d), d);
    std::vector<HPoint> pts;
    for (double r : s) pts.push_back(multiply(ball.center, dilate(r, w)));
    const double s0 = loglog_slope(s, potential_at(a.samples, pts));
    const double s2 = loglog_slope(s, potential_derivative_at(a.samples, I, pts));
    worst0 = std::max(worst0, std::abs(s0 + 4.0));
    worst2 = std::max(worst2, std::abs(s2 + 6.0));
    rows.push_back({{"direction", d.to_vector()}, {"slope", s0}, {"derivative_slope", s2}});
  }
  CheckResult out = make("potential decay slopes", worst0, tol_slope, worst0 <= tol_slope && worst2 <= tol_derivative);
  out.detail = {{"rays", rows},
                {"expected", -4.0},
                {"expected_derivative", -6.0},
                {"derivative_deviation", worst2},
                {"derivative_tolerance", tol_derivative}};
  return out;
}

CheckResult atom_potential_pairing(double rel_tol) {
  const GridSpec g = GridSpec::symmetric(1, 1.5, 2.25, 24, 36);
  const KoranyiBall ball{identity(1), 1.0};
  const Atom a = make_atom(g, wobbly_bump(ball), ball, OrliczSpec::power(2.0), kInfinity, 1);
  const GridFunction b = potential(a, g);
  std::vector<double> pf, pF;
  for (const HPoint& c : {point(0.3, 0.0, 0.1), point(-0.2, 0.35, -0.2)}) {
    const AlgebraicField phi = radial_bump(c, 0.9, 5);
    const AlgebraicField lphi = sublaplacian(phi);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const HPoint z = g.center(i);
      lhs += b[i] * lphi.evaluate(z);
      rhs += a.samples[i] * phi.evaluate(z);
    }
    pF.push_back(lhs);
    pf.push_back(rhs);
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < pf.size(); ++k) worst = std::max(worst, rel_err(pF[k], pf[k]));
  CheckResult out = make("weak form of the atom potential", worst, rel_tol, worst <= rel_tol);
  out.detail = {{"pairings_F", pF}, {"pairings_f", pf}};
  return out;
}

CheckResult whitney_random(std::uint64_t seed, int sets) {
  const GridSpec g = GridSpec::symmetric(1, 1.5, 2.25, 16, 24);
  const WhitneyConstants c = WhitneyConstants::make(1.0, 1.0, 7);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-0.6, 0.6), ur(0.3, 0.8);
  std::uniform_int_distribution<int> uk(1, 4);
  int failures = 0, made = 0, attempts = 0;
  nlohmann::json rows = nlohmann::json::array();
  while (made < sets && attempts < 100 * sets) {
    ++attempts;
    std::vector<KoranyiBall> balls;
    const int k = uk(rng);
    for (int i = 0; i < k; ++i) {
      const double x1 = ux(rng) * g.hi[0], x2 = ux(rng) * g.hi[1], t = ux(rng) * g.hi[2];
      balls.push_back({point(x1, x2, t), ur(rng)});
    }
    const GridSet O = GridSet::from_balls(g, balls);
    if (O.empty() || O.full()) continue;
    ++made;
    const WhitneyCover cover = whitney_cover(O, c);
    if (!cover.check.ok()) ++failures;
    rows.push_back({{"cells", O.count()}, {"balls", cover.balls.size()}, {"check", cover.check.to_json()}});
  }
  const bool ok = failures == 0 && made == sets;
  CheckResult out = make("Whitney covers of random open sets", double(failures), 0.0, ok);
  out.detail = {{"sets", rows}, {"constants", c.to_json()}};
  return out;
}

CheckResult single_atom_decomposition(double rel_tol) {
  const GridSpec g = GridSpec::symmetric(1, 1.5, 2.25, 16, 24);
  const KoranyiBall b{point(0.2, -0.1, 0.1), 0.8};
  const OrliczSpec phi = OrliczSpec::power(2.0);
  const Atom a = make_atom(g, profile_bump(b), b, phi, kInfinity, 1);
  GridFunction f = a.samples;
  f *= 0.05;
  const AtomicDecomposition d = atomic_decompose(f, phi, 1);
  const double rel = d.residual_l2 / d.f_l2;
  bool whitney = true;
  for (const auto& lv : d.levels)
    if (!lv.closing) whitney = whitney && lv.check.ok();
  CheckResult out = make("decomposition of one atom", rel, rel_tol, rel <= rel_tol && whitney && d.atoms_valid());
  out.detail = {{"terms", d.terms.size()}, {"C", d.C}, {"atoms_valid", d.atoms_valid()}, {"whitney_ok", whitney}};
  return out;
}

CheckResult triviality(double p, double q, int doublings) {
  const PolyClass t = PolyClass::from_function(1, [](const HPoint& z) { return z.t(); });
  const OrliczSpec phi = OrliczSpec::power(p);
  std::vector<double> radii, mods;
  int bad = 0;
  double R = 1.0;
  for (int k = 0; k <= doublings; ++k, R *= 2.0) {
    radii.push_back(R);
    mods.push_back(truncated_modular(t, phi, q, R));
    if (k > 0 && !(mods[k] > mods[k - 1])) ++bad;
  }
  const double Q = 4.0;
  CheckResult out = make("modular of N grows across domain doublings", double(bad), 0.0, bad == 0);
  out.detail = {{"p", p},         {"q", q},         {"critical", Q / (2.0 + Q / q)},
                {"radii", radii}, {"modular", mods}};
  return out;
}

CheckResult maximal_comparability(double factor) {
  const GridSpec g = GridSpec::symmetric(1, 2.0, 4.0, 10, 12);
  MaximalConfig cfg;
  const auto& dict = default_dictionary(1, cfg.seminorm_order(1), cfg.dictionary_seed);
  const RadialKernel& k = dict.front();
  const std::vector<std::pair<std::string, GridFunction>> inputs{
      {"gaussian", GridFunction::sample(g, [](const HPoint& z) { return std::exp(-koranyi_norm4(1, z.coords().data()) / 0.5); })},
      {"shifted gaussian", GridFunction::sample(g, [](const HPoint& z) {
         return std::exp(-std::pow(quasi_distance(point(0.6, -0.4, 0.5), z), 4) / 0.3);
       })},
      {"indicator", GridFunction::indicator(g, KoranyiBall{point(-0.3, 0.2, 0.0), 0.9})},
      {"bump", GridFunction::sample(g, profile_bump(KoranyiBall{point(0.2, 0.1, -0.3), 1.1}).eval)},
      {"signed", GridFunction::sample(g, [](const HPoint& z) {
         return std::sin(2.0 * z.x(0)) * std::exp(-koranyi_norm4(1, z.coords().data()));
       })}};
  double worst = 0.0;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [name, f] : inputs) {
    const GridFunction mn = grand_maximal(f, dict, cfg);
    const GridFunction ms = peak_maximal(f, k, cfg.peak_exponent(1), cfg);
    const GridFunction md = discrete_maximal(f, k, cfg);
    for (const OrliczSpec& phi : {OrliczSpec::power(1.0), OrliczSpec::tlog()}) {
      const double a = luxemburg_norm(mn, phi), b = luxemburg_norm(ms, phi), c = luxemburg_norm(md, phi);
      const double r = std::max({a, b, c}) / std::min({a, b, c});
      worst = std::max(worst, r);
      rows.push_back({{"input", name}, {"phi", phi.name()}, {"grand", a}, {"peak", b}, {"discrete", c}, {"ratio", r}});
    }
  }
  CheckResult out = make("maximal function norms are comparable", worst, factor, worst <= factor);
  out.detail = {{"cases", rows}};
  return out;
}

CheckResult hl_maximal_properties(double slack) {
  const GridSpec g = GridSpec::symmetric(1, 2.0, 4.0, 12, 16);
  const GridFunction c(g, 3.0);
  const GridFunction f = GridFunction::sample(g, [](const HPoint& z) { return std::exp(-koranyi_norm4(1, z.coords().data())); });
  const GridFunction h = GridFunction::indicator(g, KoranyiBall{point(0.5, 0.0, 0.3), 0.8});
  GridFunction sum = f;
  sum += h;
  GridFunction scaled = f;
  scaled *= -2.5;
  const GridFunction mc = hl_maximal_field(c), mf = hl_maximal_field(f), mh = hl_maximal_field(h),
                     ms = hl_maximal_field(sum), mk = hl_maximal_field(scaled);
  double constant = 0.0, sub = 0.0, homog = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    constant = std::max(constant, std::abs(mc[i] - 3.0) / 3.0);
    sub = std::max(sub, ms[i] - mf[i] - mh[i]);
    homog = std::max(homog, std::abs(mk[i] - 2.5 * mf[i]) / std::max(mf[i], 1e-300));
  }
  const double worst = std::max({constant, sub, homog});
  CheckResult out = make("Hardy-Littlewood maximal properties", worst, slack, worst <= slack);
  out.detail = {{"constant", constant}, {"subadditivity_excess", sub}, {"homogeneity", homog}};
  return out;
}

SourceManifest three_atom_source(const GridSpec& grid) {
  SourceManifest s;
  s.grid = grid;
  s.phi = OrliczSpec::power(2.0);
  s.atoms = {{KoranyiBall{point(0.3, -0.2, 0.1), 0.8}, 1.0, 1},
             {KoranyiBall{point(-0.5, 0.4, -0.3), 0.7}, -0.6, 1},
             {KoranyiBall{point(0.2, 0.6, 0.5), 0.6}, 0.8, 1}};
  return s;
}

SolveRun run_solve(const SourceManifest& src, double q, int m, const PoissonConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const GridFunction f = assemble_source(src);
  SolveRun r{solve_poisson(f, src.phi, q, m, cfg), {}, 0.0};
  r.atomic = atomic_norm_check(r.solution.decomposition, default_theta(src.phi));
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace hh::checks
