#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hhardy/potential.hpp"

using namespace hh;

namespace {

HPoint point(double x1, double x2, double t) {
  HPoint z(1);
  z.x(0) = x1;
  z.x(1) = x2;
  z.t() = t;
  return z;
}

GridSpec atom_grid() { return GridSpec::symmetric(1, 1.5, 2.25, 24, 36); }

SmoothField wobbly_bump(const KoranyiBall& b) {
  return SmoothField::from(1, [b](const HPoint& z) {
    const double s = std::pow(quasi_distance(b.center, z) / b.radius, 4);
    return s < 1.0 ? std::pow(1.0 - s, 3) * (1.0 + 0.7 * z.x(0) - 0.4 * z.t() + 0.3 * z.x(1) * z.x(1)) : 0.0;
  });
}

}  // namespace

TEST_CASE("c_n quadrature oracles") {
  const double I = cn_integral_polar(1);
  CHECK(I == doctest::Approx(2.0 * std::numbers::pi / 3.0).epsilon(1e-12));
  CHECK(cn_constant(1) == doctest::Approx(1.0 / (8.0 * std::numbers::pi)).epsilon(1e-12));
  const double tensor = cn_integral_tensor(1, 6.0, 96, 720);
  CHECK(std::abs(tensor - I) <= 0.005 * I);
  const auto mc = cn_integral_monte_carlo(1, 10'000'000, 2024);
  CHECK(std::abs(mc.value - I) <= 3.0 * mc.std_error);
  CHECK(cn_constant(2) > 0.0);
  CHECK(cn_integral_polar(2, 48) == doctest::Approx(cn_integral_polar(2, 64)).epsilon(1e-10));
}

TEST_CASE("fundamental kernel") {
  const HPoint z = point(0.3, -0.7, 0.4);
  for (double lam : {0.5, 2.0, 3.7})
    CHECK(fundamental_kernel(dilate(lam, z)) == doctest::Approx(fundamental_kernel(z) / (lam * lam)).epsilon(1e-12));
  CHECK_THROWS_AS(fundamental_kernel(identity(1)), Error);
  const AlgebraicField lk = sublaplacian(fundamental_kernel_field(1));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int tested = 0;
  while (tested < 200) {
    const HPoint p = point(u(rng), u(rng), u(rng));
    if (koranyi_norm(p) < 0.5) continue;
    ++tested;
    CHECK(std::abs(lk.evaluate(p)) <= 1e-3);
    CHECK(fundamental_kernel_field(1).evaluate(p) == doctest::Approx(fundamental_kernel(p)).epsilon(1e-12));
  }
}

TEST_CASE("fundamental solution pairing for three test functions") {
  struct Case {
    HPoint c;
    double R;
    int k;
    std::vector<double> q;
  };
  const std::vector<Case> cases{{identity(1), 1.0, 5, {1.0}},
                                {point(0.3, -0.2, 0.25), 1.2, 6, {1.0, -1.5, 0.8}},
                                {point(-0.4, 0.1, -0.3), 0.9, 5, {2.0, 0.5}}};
  for (const Case& c : cases) {
    const AlgebraicField u = radial_bump(c.c, c.R, c.k, c.q);
    const double u0 = u.evaluate(identity(1));
    REQUIRE(std::abs(u0) > 1e-3);
    const double pair = fundamental_pairing(u, koranyi_norm(c.c) + c.R);
    CHECK(std::abs(pair - u0) <= 0.01 * std::abs(u0));
  }
}

TEST_CASE("potential linearity and agreement with far-field evaluation") {
  const GridSpec g = GridSpec::symmetric(1, 1.0, 1.0, 10, 12);
  const GridFunction a1 = GridFunction::sample(g, [](const HPoint& z) { return std::cos(z.x(0)) * (koranyi_norm(z) < 0.8); });
  const GridFunction a2 = GridFunction::sample(g, [](const HPoint& z) { return z.t() * (koranyi_norm(z) < 0.6); });
  GridFunction mix = a1;
  mix *= 2.5;
  mix += a2;
  const GridFunction b1 = potential(a1), b2 = potential(a2), bm = potential(mix);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(bm[i] == doctest::Approx(2.5 * b1[i] + b2[i]).epsilon(1e-10).scale(1.0));
  // Targets on a distant output grid see no near cells.
  GridSpec far = g;
  far.lo = {5.0, 5.0, 5.0};
  far.hi = {6.0, 6.0, 6.0};
  const GridFunction bf = potential(a1, far);
  std::vector<HPoint> pts;
  for (std::size_t i = 0; i < far.size(); i += 97) pts.push_back(far.center(i));
  const auto direct = potential_at(a1, pts);
  for (std::size_t k = 0; k < pts.size(); ++k) CHECK(bf[k * 97] == doctest::Approx(direct[k]).epsilon(1e-12));
  CHECK(potential(GridFunction(g)).sup_norm() == 0.0);
}

TEST_CASE("singular-cell refinement converges") {
  const GridSpec g = GridSpec::symmetric(1, 1.0, 1.0, 8, 8);
  const GridFunction one = GridFunction(g, 1.0);
  SolverConfig c4, c8;
  c4.refine = 4;
  c8.refine = 8;
  const GridFunction b4 = potential(one, c4), b8 = potential(one, c8);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(b8[i] == doctest::Approx(b4[i]).epsilon(0.02));
}

TEST_CASE("weak residual of the potential of an atom") {
  const GridSpec g = atom_grid();
  const KoranyiBall ball{identity(1), 1.0};
  const Atom a = make_atom(g, wobbly_bump(ball), ball, OrliczSpec::power(2.0), kInfinity, 1);
  const GridFunction b = potential(a, g);
  for (const HPoint& c : {point(0.3, 0.0, 0.1), point(-0.2, 0.35, -0.2)}) {
    const AlgebraicField phi = radial_bump(c, 0.9, 5);
    const AlgebraicField lphi = sublaplacian(phi);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const HPoint z = g.center(i);
      lhs += b[i] * lphi.evaluate(z);
      rhs += a.samples[i] * phi.evaluate(z);
    }
    CHECK(std::abs(lhs - rhs) <= 0.05 * std::abs(rhs));
  }
}

TEST_CASE("far-field decay of atom potentials") {
  const GridSpec g = atom_grid();
  const KoranyiBall ball{point(0.1, -0.1, 0.05), 1.0};
  const Atom a = make_atom(g, wobbly_bump(ball), ball, OrliczSpec::power(2.0), kInfinity, 1);
  const std::vector<double> s{8.0, 11.0, 16.0, 22.0, 32.0};
  const std::vector<HPoint> dirs{point(0.8, 0.3, 0.2), point(-0.3, 0.6, -0.5), point(0.1, -0.4, 0.9)};
  for (const HPoint& d : dirs) {
    const HPoint w = dilate(1.0 / koranyi_norm(d), d);
    std::vector<HPoint> pts;
    for (double r : s) pts.push_back(multiply(ball.center, dilate(r, w)));
    const double slope = loglog_slope(s, potential_at(a.samples, pts));
    CHECK(slope == doctest::Approx(-4.0).epsilon(0.05));
    const MultiIndex I({2, 0, 0});
    const double slope2 = loglog_slope(s, potential_derivative_at(a.samples, I, pts));
    CHECK(std::abs(slope2 + 6.0) <= 0.4);
  }
  // Mean-zero atoms without first moments decay one order slower.
  const Atom a0 = make_atom(g, wobbly_bump(ball), ball, OrliczSpec::power(2.0), kInfinity, 0);
  std::vector<HPoint> pts;
  const HPoint w = dilate(1.0 / koranyi_norm(dirs[0]), dirs[0]);
  for (double r : s) pts.push_back(multiply(ball.center, dilate(r, w)));
  CHECK(loglog_slope(s, potential_at(a0.samples, pts)) == doctest::Approx(-3.0).epsilon(0.07));
}

TEST_CASE("truncated singular suprema") {
  const GridSpec g = GridSpec::symmetric(1, 1.0, 1.0, 12, 12);
  const GridFunction a = GridFunction::sample(g, [](const HPoint& z) { return (koranyi_norm(z) < 0.7) * (1.0 + z.x(0)); });
  const HPoint z = point(0.1, 0.2, 0.05);
  const auto Is = second_order_indices(1);
  CHECK(Is.size() == 4);
  for (const auto& I : Is) {
    CHECK(truncated_singular_sup(I, a, z, {10.0, 20.0}) == 0.0);
    const std::vector<double> coarse{0.25, 1.0, 4.0};
    const std::vector<double> fine{0.125, 0.25, 0.5, 1.0, 2.0, 4.0};
    CHECK(truncated_singular_sup(I, a, z, fine) >= truncated_singular_sup(I, a, z, coarse));
  }
}

TEST_CASE("eta maximal") {
  const std::vector<double> radii{0.25, 0.5, 1.0};
  const PolyClass c = PolyClass::from_function(1, [](const HPoint&) { return 3.0; });
  CHECK(eta_maximal(c, 1.2, 2.0, point(0.2, 0.1, 0.3), radii) == doctest::Approx(3.0 / 0.0625).epsilon(1e-12));
  const PolyClass t = PolyClass::from_function(1, [](const HPoint& z) { return z.t(); });
  const double e1 = eta_maximal(t, 1.3, 2.0, identity(1), {0.5});
  const double e2 = eta_maximal(t, 1.3, 2.0, identity(1), {2.0});
  CHECK(e1 == doctest::Approx(e2).epsilon(0.01));
  // Independent value from a fine grid average.
  const GridSpec g = GridSpec::symmetric(1, 1.0, 1.0, 64, 64);
  const GridFunction tq = GridFunction::sample(g, [](const HPoint& z) { return std::pow(std::abs(z.t()), 1.3); });
  const auto res = BallIntegrator(tq).integrate(identity(1), 1.0);
  const double grid_eta = std::pow(res.integral / res.measure, 1.0 / 1.3);
  SolverConfig fine;
  fine.n_radial = 12;
  fine.n_phi = 24;
  fine.n_angle = 6;
  CHECK(eta_maximal(t, 1.3, 2.0, identity(1), {1.0}, fine) == doctest::Approx(grid_eta).epsilon(0.02));
  // Monotone in |g|.
  const PolyClass small = PolyClass::from_function(1, [](const HPoint& z) { return 0.5 * std::sin(z.x(0) + z.t()); });
  const PolyClass big = PolyClass::from_function(1, [](const HPoint& z) { return std::sin(z.x(0) + z.t()); });
  CHECK(eta_maximal(small, 1.2, 2.0, point(0.1, 0.2, 0.3), radii) <=
        eta_maximal(big, 1.2, 2.0, point(0.1, 0.2, 0.3), radii));
}

TEST_CASE("calderon maximal") {
  const std::vector<double> radii{0.25, 0.5, 1.0, 2.0};
  const HPoint z = point(0.2, -0.1, 0.3);
  const PolyClass p1 = PolyClass::from_function(1, [](const HPoint& w) { return 2.0 - w.x(0) + 3.0 * w.x(1); });
  CHECK(calderon_maximal(p1, 1.3, 2.0, z, radii).value <= 1e-8);

  const PolyClass t = PolyClass::from_function(1, [](const HPoint& w) { return w.t(); });
  const auto r = calderon_maximal(t, 1.3, 2.0, identity(1), radii);
  CHECK(r.converged);
  for (double c : r.coeffs) CHECK(std::abs(c) <= 1e-5);
  CHECK(r.value == doctest::Approx(eta_maximal(t, 1.3, 2.0, identity(1), radii)).epsilon(1e-6));

  const PolyClass g = PolyClass::from_function(1, [](const HPoint& w) { return std::exp(w.x(0)) + w.t() * w.x(1); });
  const double eta = eta_maximal(g, 1.3, 2.0, z, radii);
  const auto a = calderon_maximal(g, 1.3, 2.0, z, radii, {}, 1);
  const auto b = calderon_maximal(g, 1.3, 2.0, z, radii, {}, 99);
  CHECK(a.value <= eta);
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-8));
  for (std::size_t k = 0; k < a.coeffs.size(); ++k) CHECK(std::abs(a.coeffs[k] - b.coeffs[k]) <= 1e-6);

  // Subadditivity on a sum of classes.
  const PolyClass h = PolyClass::from_function(1, [](const HPoint& w) { return w.x(0) * w.x(0) - w.t(); });
  const double lhs = calderon_maximal(g + h, 1.3, 2.0, z, radii).value;
  CHECK(lhs <= calderon_maximal(g, 1.3, 2.0, z, radii).value + calderon_maximal(h, 1.3, 2.0, z, radii).value + 1e-9);
}

TEST_CASE("calderon-hardy norm and classes") {
  const GridSpec g = GridSpec::symmetric(1, 1.0, 1.0, 6, 6);
  const GridFunction lin = GridFunction::sample(g, [](const HPoint& z) { return 1.0 + z.x(0) - 2.0 * z.x(1); });
  SolverConfig cfg;
  cfg.radii = {0.5, 1.0};
  const auto nz = calderon_hardy_norm(PolyClass::from_grid(lin), OrliczSpec::power(1.0), 1.3, 2.0, g, cfg);
  CHECK(nz.norm <= 1e-8);
  const GridFunction other = GridFunction::sample(g, [](const HPoint& z) { return z.x(0) * z.x(1); });
  GridFunction shifted = other;
  shifted += lin;
  CHECK(same_class(other, shifted, 1, 1e-10));
  CHECK_FALSE(same_class(other, lin, 1, 1e-3));
  SolverConfig bad;
  bad.q = 2.5;
  CHECK_THROWS_AS(bad.validate(1), Error);
}

TEST_CASE("pointwise estimate report") {
  const GridSpec g = atom_grid();
  const KoranyiBall ball{identity(1), 1.0};
  const Atom a = make_atom(g, wobbly_bump(ball), ball, OrliczSpec::power(1.0), kInfinity, 4);
  const GridSpec out = GridSpec::symmetric(1, 1.5, 2.25, 12, 18);
  const GridFunction b = potential(a, out);
  SolverConfig cfg;
  cfg.q = 1.3;
  cfg.radii = {0.25, 0.5, 1.0};
  cfg.beta = 1.0;
  std::vector<HPoint> pts{point(0.1, 0.1, 0.1), point(0.5, -0.4, 0.3), point(1.2, 1.2, 1.8)};
  const auto rep = pointwise_estimate_check(a, b, pts, cfg);
  CHECK(rep.samples == 3);
  CHECK(std::isfinite(rep.max_ratio));
  CHECK(rep.max_ratio > 0.0);
  Atom zero = a;
  zero.samples = GridFunction(g);
  const auto rz = pointwise_estimate_check(zero, GridFunction(out), pts, cfg);
  CHECK(rz.max_ratio == 0.0);
}

TEST_CASE("triviality witness: modular grows with the domain") {
  const PolyClass t = PolyClass::from_function(1, [](const HPoint& z) { return z.t(); });
  const OrliczSpec phi = OrliczSpec::power(0.4);
  double prev = 0.0;
  for (double R : {1.0, 2.0, 4.0, 8.0}) {
    const double m = truncated_modular(t, phi, 1.3, R);
    CHECK(m > prev);
    prev = m;
  }
}
