#include <doctest.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "hhardy/maximal.hpp"
#include "hhardy/quadrature.hpp"

using namespace hh;

namespace {

GridSpec small_grid(double a = 2.0, int rx = 12, int rt = 16) { return GridSpec::symmetric(1, a, a * a, rx, rt); }

GridFunction gaussian(const GridSpec& g, double scale) {
  return GridFunction::sample(g, [&](const HPoint& z) { return std::exp(-koranyi_norm4(1, z.coords().data()) / scale); });
}

}  // namespace

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  const auto g = GaussLegendre::on(6, -1.0, 2.0);
  for (int p = 0; p <= 11; ++p) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * std::pow(g.x[i], p);
    const double exact = (std::pow(2.0, p + 1) - std::pow(-1.0, p + 1)) / (p + 1);
    CHECK(s == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("ball rule volume matches closed form and monte carlo") {
  const BallRule b1 = BallRule::make(1, 8, 12, 8);
  CHECK(b1.total() == doctest::Approx(std::numbers::pi * std::numbers::pi / 2).epsilon(1e-10));
  const BallRule b2 = BallRule::make(2, 8, 12, 6);
  const auto mc = estimate_unit_ball(2, 2'000'000, 77);
  CHECK(std::abs(b2.total() - mc.value) < 4.0 * mc.std_error);
  // Integral of rho^4 over the unit ball is Q/(Q+4) |B|.
  double s = 0.0;
  for (std::size_t k = 0; k < b1.nodes.size(); ++k) s += b1.weights[k] * koranyi_norm4(1, b1.nodes[k].coords().data());
  CHECK(s == doctest::Approx(b1.total() * 4.0 / 8.0).epsilon(1e-10));
}

TEST_CASE("ball integrator measures") {
  const GridSpec g = GridSpec::symmetric(1, 2.0, 4.0, 48, 96);
  const GridFunction one = GridFunction::sample(g, [](const HPoint&) { return 1.0; });
  const BallIntegrator bi(one);
  HPoint z(1);
  z.x(0) = 0.2;
  z.t() = -0.3;
  for (double r : {0.5, 1.0}) {
    const auto res = bi.integrate(z, r);
    CHECK(res.integral == doctest::Approx(res.measure).epsilon(1e-12));
    CHECK(res.measure == doctest::Approx(std::numbers::pi * std::numbers::pi / 2 * std::pow(r, 4)).epsilon(0.03));
  }
  // clipped: half the ball lies outside x_1 > 2
  HPoint edge(1);
  edge.x(0) = 2.0 - 1e-9;
  const auto cl = bi.integrate(edge, 1.0);
  CHECK(cl.measure == doctest::Approx(std::numbers::pi * std::numbers::pi / 4).epsilon(0.05));
}

TEST_CASE("hardy-littlewood maximal properties") {
  const GridSpec g = small_grid(2.0, 16, 24);
  const GridFunction c = GridFunction::sample(g, [](const HPoint&) { return 3.0; });
  const GridFunction mc = hl_maximal_field(c);
  for (std::size_t i = 0; i < mc.size(); ++i) CHECK(mc[i] == doctest::Approx(3.0).epsilon(1e-12));

  const KoranyiBall ball{identity(1), 1.0};
  const GridFunction chi = GridFunction::indicator(g, ball);
  const GridFunction mchi = hl_maximal_field(chi);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(mchi[i] <= 1.0 + 1e-12);
    if (ball.dilated(0.5).contains(g.center(i))) CHECK(mchi[i] == doctest::Approx(1.0).epsilon(1e-9));
  }

  // Dominates the average over the smallest ball.
  const GridFunction f = gaussian(g, 0.5);
  const GridFunction mf = hl_maximal_field(f);
  const BallIntegrator bi(f);
  const double r0 = dyadic_radii(g, {}).front();
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(mf[i] >= bi.average(g.center(i), r0) - 1e-14);

  // Weak type (1,1) with a generous constant.
  const double l1 = f.lp_norm(1.0);
  for (double lam : {0.05, 0.2, 0.5}) {
    double meas = 0.0;
    for (std::size_t i = 0; i < mf.size(); ++i)
      if (mf[i] > lam) meas += g.cell_volume();
    CHECK(meas <= 200.0 * l1 / lam);
  }
}

TEST_CASE("offset scan only increases the maximal function") {
  const GridSpec g = small_grid(2.0, 12, 16);
  const GridFunction f = GridFunction::indicator(g, KoranyiBall{identity(1), 0.7});
  MaximalConfig cen;
  cen.offset_scan = false;
  const GridFunction a = hl_maximal_field(f, cen), b = hl_maximal_field(f);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] >= a[i] - 1e-14);
}

TEST_CASE("radial kernel matches its exact field and quadrature integral") {
  const RadialKernel k = RadialKernel::bump(1, 8, {1.0, 0.5, -0.3}, 2.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int i = 0; i < 200; ++i) {
    HPoint z(1);
    z.x(0) = u(rng);
    z.x(1) = u(rng);
    z.t() = u(rng);
    CHECK(k(z) == doctest::Approx(k.field.evaluate(z)).epsilon(1e-9).scale(1.0));
  }
  const BallRule b = BallRule::make(1, 24, 8, 4);
  double s = 0.0;
  for (std::size_t i = 0; i < b.nodes.size(); ++i) s += b.weights[i] * k(b.nodes[i]);
  CHECK(k.integral() == doctest::Approx(s).epsilon(1e-10));
}

TEST_CASE("scale resolution rule") {
  const GridSpec g = small_grid(2.0, 12, 16);
  CHECK(scale_resolved(g, 1.0));
  CHECK_FALSE(scale_resolved(g, 0.05));
  const auto js = resolved_scales(g, {});
  REQUIRE_FALSE(js.empty());
  for (int j : js) CHECK(scale_resolved(g, std::ldexp(1.0, -j)));
  const RadialKernel k = RadialKernel::bump(1, 8, {1.0});
  CHECK_THROWS_AS(heat_style_convolution(GridFunction(g), k, 6), Error);
}

TEST_CASE("moment convolution agrees with direct summation") {
  const GridSpec g = small_grid(2.0, 10, 12);
  const GridFunction f = GridFunction::sample(g, [](const HPoint& z) { return std::sin(z.x(0) + 0.3 * z.t()) + 0.2 * z.x(1); });
  const RadialKernel k = RadialKernel::bump(1, 8, {1.0, -1.0, 0.4});
  const auto conv = radial_convolutions(f, {k}, {-1, 0});
  for (int s = 0; s < 2; ++s) {
    const GridFunction direct = heat_style_convolution(f, k.smooth(), s - 1);
    double err = 0.0, mx = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      err = std::max(err, std::abs(direct[i] - conv[0][s][i]));
      mx = std::max(mx, std::abs(direct[i]));
    }
    CHECK(err <= 1e-10 * std::max(mx, 1.0));
  }
}

TEST_CASE("convolution with a constant reproduces the kernel mass") {
  const GridSpec g = GridSpec::symmetric(1, 3.0, 9.0, 24, 48);
  const GridFunction one = GridFunction::sample(g, [](const HPoint&) { return 1.0; });
  const RadialKernel k = RadialKernel::bump(1, 8, {1.0});
  const GridFunction c = heat_style_convolution(one, k, 0);
  CHECK(c.interpolate(identity(1)) == doctest::Approx(k.integral()).epsilon(0.02));
}

TEST_CASE("maximal function ordering") {
  const GridSpec g = small_grid(2.0, 10, 12);
  const GridFunction f = gaussian(g, 0.3);
  const RadialKernel k = RadialKernel::bump(1, 8, {1.0});
  const GridFunction md = discrete_maximal(f, k), mp = peak_maximal(f, k, 8.0);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(mp[i] >= md[i] - 1e-14);
  // Peak function with L large converges to the discrete one.
  MaximalConfig fine;
  fine.j_lo = 0;
  const GridFunction md0 = discrete_maximal(f, k, fine), mp_big = peak_maximal(f, k, 400.0, fine);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(mp_big[i] == doctest::Approx(md0[i]).epsilon(1e-9));
  // Brute force oracle for the peak maximal at a few points.
  const auto js = resolved_scales(g, {});
  const auto conv = radial_convolutions(f, {k}, js);
  for (std::size_t ti : {std::size_t(0), g.size() / 2, g.size() - 7}) {
    double best = 0.0;
    for (std::size_t s = 0; s < js.size(); ++s)
      for (std::size_t w = 0; w < f.size(); ++w) {
        const double rho = quasi_distance(g.center(ti), g.center(w));
        best = std::max(best, std::abs(conv[0][s][w]) / std::pow(1.0 + std::pow(4.0, js[s]) * rho * rho, 8.0));
      }
    CHECK(mp[ti] == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("dictionary normalisation and grand maximal") {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& dict = default_dictionary(1, 7, 20240611);
  MESSAGE("dictionary build ms: ", std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  REQUIRE(dict.size() == 8);
  const Box box{{-1, -1, -1}, {1, 1, 1}};
  for (const auto& k : dict) CHECK(schwartz_seminorm(k.smooth(), 7, box, 10) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(&default_dictionary(1, 7, 20240611) == &dict);

  const GridSpec g = small_grid(2.0, 10, 12);
  const GridFunction f = gaussian(g, 0.3);
  const GridFunction mg = grand_maximal(f, dict);
  const auto js = resolved_scales(g, {});
  const auto conv = radial_convolutions(f, {dict[3]}, js);
  for (const auto& c : conv[0])
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(mg[i] >= std::abs(c[i]) - 1e-14);
  CHECK_THROWS_AS(grand_maximal(f, std::vector<RadialKernel>{}), Error);
}

TEST_CASE("vector-valued maximal inequality report") {
  const GridSpec g = small_grid(2.0, 10, 12);
  std::vector<GridFunction> fam;
  for (int j = 0; j < 3; ++j) {
    HPoint c(1);
    c.x(0) = -1.0 + j;
    fam.push_back(GridFunction::sample(g, [&](const HPoint& z) { return std::exp(-2.0 * std::pow(quasi_distance(c, z), 4)); }));
  }
  const auto rep = fefferman_stein_check(fam, 2.0, OrliczSpec::power(2.0));
  CHECK(rep.lhs >= rep.rhs * 0.9);
  CHECK(rep.ratio < 10.0);
  CHECK(rep.to_json().contains("config"));
  CHECK_THROWS_AS(fefferman_stein_check(fam, 1.0, OrliczSpec::power(2.0)), Error);
  CHECK_THROWS_AS(fefferman_stein_check(fam, 2.0, OrliczSpec::power(1.0)), Error);
}

TEST_CASE("hardy-littlewood maximal is stable under grid refinement") {
  MaximalConfig cfg;
  cfg.r_min = 0.5;
  auto f = [](const HPoint& z) { return std::exp(-koranyi_norm4(1, z.coords().data())) * (1.0 + 0.3 * z.x(0)); };
  const GridFunction coarse = GridFunction::sample(GridSpec::symmetric(1, 2.0, 4.0, 16, 24), f);
  const GridFunction fine = GridFunction::sample(GridSpec::symmetric(1, 2.0, 4.0, 32, 48), f);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 10; ++i) {
    HPoint z(1);
    z.x(0) = u(rng);
    z.x(1) = u(rng);
    z.t() = 2.0 * u(rng);
    const double a = hl_maximal(coarse, z, cfg), b = hl_maximal(fine, z, cfg);
    CHECK(std::abs(a - b) <= 0.05 * b);
  }
}
