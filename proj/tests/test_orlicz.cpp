#include <doctest.h>

#include <cmath>
#include <random>

#include "hhardy/orlicz.hpp"

using namespace hh;

namespace {

GridSpec small_grid() { return GridSpec::symmetric(1, 1.0, 1.0, 10, 10); }

GridFunction random_function(std::mt19937_64& rng, const GridSpec& g) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GridFunction f(g);
  const double density = 0.2 + 0.8 * u(rng);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (u(rng) < density) f[i] = (u(rng) - 0.5) * std::exp(6.0 * u(rng) - 3.0);
  return f;
}

std::vector<OrliczSpec> families() {
  return {OrliczSpec::power(1.5), OrliczSpec::sum(0.7, 2.0), OrliczSpec::min(0.5, 1.8), OrliczSpec::tlog()};
}

}  // namespace

TEST_CASE("built-in evaluators and metadata") {
  CHECK(OrliczSpec::power(3.0)(1.0) == 1.0);
  CHECK(OrliczSpec::sum(1, 2)(2.0) == 6.0);
  CHECK(OrliczSpec::min(1, 2)(0.5) == 0.25);
  CHECK(OrliczSpec::min(1, 2)(3.0) == 3.0);
  CHECK(OrliczSpec::tlog()(1.0) == doctest::Approx(std::log(std::exp(1.0) + 1.0)));
  CHECK(OrliczSpec::tlog().upper_open());
  CHECK(*OrliczSpec::sum(0.5, 3).lower_index() == 0.5);
  CHECK(*OrliczSpec::sum(0.5, 3).upper_index() == 3.0);
  CHECK_THROWS_AS(OrliczSpec::power(0.0), Error);
  CHECK_THROWS_AS(OrliczSpec::power(-1.0), Error);
  CHECK_THROWS_AS(OrliczSpec::sum(2.0, 1.0), Error);
  CHECK_THROWS_AS(OrliczSpec::from_family("exp", {}), Error);
  CHECK(OrliczSpec::from_family("min", {0.5, 2})(0.5) == doctest::Approx(0.25));
}

TEST_CASE("Orlicz function invariants on a log grid") {
  for (const auto& phi : families()) {
    CHECK(phi(0.0) == 0.0);
    double prev = 0.0;
    for (int k = -40; k <= 40; ++k) {
      const double v = phi(std::pow(10.0, k / 4.0));
      CHECK(v > 0.0);
      CHECK(v >= prev);
      prev = v;
    }
    CHECK(prev >= 1e5);
  }
}

TEST_CASE("type inequalities by scan") {
  // sum(p1, p2): lower type p1, upper type p2 with constant 1.
  const OrliczSpec s = OrliczSpec::sum(0.7, 2.5);
  CHECK(type_constant(s, 0.7, TypeSide::lower, 1e4, 1e-4, 1e4) <= 1.0 + 1e-12);
  CHECK(type_constant(s, 2.5, TypeSide::upper, 1e4, 1e-4, 1e4) <= 1.0 + 1e-12);
  // A larger lower exponent is not a lower type: the constant grows with the scan range.
  CHECK(type_constant(s, 1.0, TypeSide::lower, 1e6, 1e-6, 1e-3) > 10.0);

  const OrliczSpec tl = OrliczSpec::tlog();
  CHECK(type_constant(tl, 1.0, TypeSide::lower, 1e6, 1e-6, 1e6) <= 1.0 + 1e-12);
  // Upper type p for every p > 1: the needed constant stabilises as the scan widens.
  for (double p : {1.05, 1.5, 2.0}) {
    const double c1 = type_constant(tl, p, TypeSide::upper, 1e8, 1e-8, 1e8, 121);
    const double c2 = type_constant(tl, p, TypeSide::upper, 1e16, 1e-16, 1e16, 241);
    CHECK(std::isfinite(c1));
    CHECK(c2 <= 1.05 * c1);
  }
  // p = 1 is not an upper type: the constant keeps growing.
  const double g1 = type_constant(tl, 1.0, TypeSide::upper, 1e8, 1e-8, 1e8, 121);
  const double g2 = type_constant(tl, 1.0, TypeSide::upper, 1e16, 1e-16, 1e16, 241);
  CHECK(g2 > 1.5 * g1);
}

TEST_CASE("lower estimates") {
  // Phi(t) >= c t^{p+} on (0,1] and Phi(t) >= c t^{p-} on [1, inf).
  for (const auto& phi : {OrliczSpec::power(1.5), OrliczSpec::sum(0.7, 2.0), OrliczSpec::min(0.5, 1.8)}) {
    const double pm = *phi.lower_index(), pp = *phi.upper_index();
    double c_small = 1e300, c_large = 1e300;
    for (int k = 0; k <= 200; ++k) {
      const double t = std::pow(10.0, -8.0 * k / 200.0);
      c_small = std::min(c_small, phi(t) / std::pow(t, pp));
      const double T = 1.0 / t;
      c_large = std::min(c_large, phi(T) / std::pow(T, pm));
    }
    CHECK(c_small >= phi(1.0) - 1e-12);
    CHECK(c_large >= phi(1.0) - 1e-12);
  }
}

TEST_CASE("modular") {
  const GridSpec g = small_grid();
  CHECK(modular(GridFunction(g), OrliczSpec::power(2)) == 0.0);
  const KoranyiBall B(identity(1), 0.8);
  const GridFunction chi = GridFunction::indicator(g, B);
  CHECK(modular(chi, OrliczSpec::power(3.7)) == doctest::Approx(chi.support_measure()));

  // Gaussian-type f against a Monte-Carlo oracle.
  auto f = [](double a, double b, double t) { return std::exp(-(a * a + b * b) - t * t); };
  const GridSpec fine = GridSpec::symmetric(1, 3.0, 3.0, 48, 48);
  const GridFunction fg = GridFunction::sample(fine, [&](const HPoint& z) { return f(z.x(0), z.x(1), z.t()); });
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const int samples = 2'000'000;
  double acc = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double v = f(u(rng), u(rng), u(rng));
    acc += v * v;
  }
  const double mc = 216.0 * acc / samples;
  CHECK(std::abs(modular(fg, OrliczSpec::power(2)) - mc) <= 0.01 * mc);
}

TEST_CASE("Luxemburg norm") {
  const GridSpec g = small_grid();
  std::mt19937_64 rng(5);
  CHECK(luxemburg_norm(GridFunction(g), OrliczSpec::power(2)) == 0.0);
  for (double p : {0.8, 1.0, 2.0, 3.0}) {
    for (int s = 0; s < 5; ++s) {
      const GridFunction f = random_function(rng, g);
      CHECK(std::abs(luxemburg_norm(f, OrliczSpec::power(p)) / f.lp_norm(p) - 1.0) <= 1e-6);
    }
  }
  for (const auto& phi : families()) {
    const GridFunction f = random_function(rng, g);
    const double nf = luxemburg_norm(f, phi);
    // kappa(f / ||f||) <= 1.
    GridFunction h = f;
    h *= 1.0 / nf;
    CHECK(modular(h, phi) <= 1.0 + 1e-12);
    for (double a : {-3.0, 0.25, 7.5}) {
      GridFunction af = f;
      af *= a;
      CHECK(std::abs(luxemburg_norm(af, phi) / (std::abs(a) * nf) - 1.0) <= 1e-9);
    }
    // Monotone under pointwise domination.
    GridFunction big = f;
    for (std::size_t i = 0; i < big.size(); ++i) big[i] = std::abs(big[i]) + 0.1 * std::abs(random_function(rng, g)[i]);
    CHECK(luxemburg_norm(big, phi) >= nf * (1 - 1e-12));
    // Indicator identity.
    const GridFunction chi = GridFunction::indicator(g, KoranyiBall(identity(1), 0.7));
    CHECK(std::abs(luxemburg_norm(chi, phi) * phi_inverse(phi, 1.0 / chi.support_measure()) - 1.0) <= 1e-9);
  }
}

TEST_CASE("modular convergence implies norm convergence") {
  const GridSpec g = small_grid();
  for (const auto& phi : families()) {
    double prev = 1e300;
    for (int j = 1; j <= 6; ++j) {
      GridFunction f(g);
      f[0] = std::pow(10.0, j);  // concentrated spike of shrinking modular
      f *= std::pow(10.0, -2.0 * j);
      const double nf = luxemburg_norm(f, phi);
      CHECK(nf < prev);
      prev = nf;
    }
    CHECK(prev < 1e-3);
  }
}

TEST_CASE("Lemma fits identity for powers of f") {
  const GridSpec g = small_grid();
  std::mt19937_64 rng(8);
  for (const auto& phi : families())
    for (double s : {0.5, 2.0}) {
      const GridFunction f = random_function(rng, g);
      GridFunction fs = f;
      for (double& v : fs.values()) v = std::pow(std::abs(v), s);
      const double lhs = std::pow(luxemburg_norm(f, phi), s);
      const double rhs = luxemburg_norm(fs, phi_power(phi, 1.0 / s));
      CHECK(std::abs(lhs / rhs - 1.0) <= 1e-6);
    }
  const OrliczSpec p3 = OrliczSpec::power(3.0);
  CHECK(phi_power(p3, 1.0)(2.0) == p3(2.0));
  for (double t : {0.1, 1.7, 20.0}) CHECK(phi_power(p3, 0.5)(t) == doctest::Approx(std::pow(t, 1.5)));
  CHECK(*phi_power(OrliczSpec::sum(1, 2), 0.5).lower_index() == 0.5);
}

TEST_CASE("complementary function") {
  const OrliczSpec sq = OrliczSpec::power(2.0);
  const OrliczSpec conj = complementary(sq);
  // Brute-force sup over a t grid as the oracle.
  for (double s : {0.01, 0.3, 1.0, 4.0, 100.0}) {
    double brute = 0.0;
    for (int k = 0; k <= 200000; ++k) {
      const double t = 1.2 * s * k / 200000.0;
      brute = std::max(brute, t * s - t * t);
    }
    CHECK(std::abs(conj(s) - s * s / 4) <= 1e-6 * s * s / 4);
    CHECK(std::abs(brute - s * s / 4) <= 1e-6 * s * s / 4);
  }
  CHECK_THROWS_AS(complementary(OrliczSpec::power(0.8)), Error);
  CHECK_THROWS_AS(complementary(OrliczSpec::min(0.5, 2)), Error);
  // t log(e+t) has slope >= 1, so its conjugate vanishes on [0, 1].
  CHECK(complementary(OrliczSpec::tlog())(0.9) == 0.0);
  CHECK(std::isinf(complementary(OrliczSpec::power(1.0))(2.0)));
}

TEST_CASE("inverse") {
  for (double p : {0.4, 1.0, 2.5})
    for (double s : {1e-6, 0.3, 1.0, 50.0})
      CHECK(std::abs(phi_inverse(OrliczSpec::power(p), s) / std::pow(s, 1 / p) - 1.0) <= 1e-12);
  for (const auto& phi : families())
    for (double s : {1e-5, 0.2, 3.0, 1e4}) CHECK(std::abs(phi(phi_inverse(phi, s)) / s - 1.0) <= 1e-9);
  // Newton oracle for tlog at s = 1.
  double t = 1.0;
  for (int it = 0; it < 50; ++it) {
    const double e = std::exp(1.0);
    const double f = t * std::log(e + t) - 1.0, df = std::log(e + t) + t / (e + t);
    t -= f / df;
  }
  CHECK(std::abs(phi_inverse(OrliczSpec::tlog(), 1.0) - t) <= 1e-9);
  CHECK(phi_inverse(OrliczSpec::power(2), 0.0) == 0.0);
}

TEST_CASE("empirical quasi-triangle constant") {
  const GridSpec g = GridSpec::symmetric(1, 1.0, 1.0, 6, 6);
  CHECK(empirical_quasi_triangle(OrliczSpec::power(2.0), g, 20, 1) <= 1.0 + 1e-9);
  CHECK(empirical_quasi_triangle(OrliczSpec::tlog(), g, 20, 2) <= 1.0 + 1e-9);
  const double k = empirical_quasi_triangle(OrliczSpec::power(0.5), g, 20, 3);
  CHECK(k >= 1.0);
  CHECK(k <= 2.0 + 1e-9);  // 2^{1/p - 1} for L^p, p = 1/2
}
