#include <doctest.h>

#include <cmath>
#include <random>

#include "hhardy/calculus.hpp"

using namespace hh;

namespace {

HPoint pt(double a, double b, double t) {
  const double x[2] = {a, b};
  return HPoint(std::span<const double>(x, 2), t);
}

MultiIndex mi(int a, int b, int c) { return MultiIndex({a, b, c}); }

Polynomial coord(int k) { return Polynomial::coordinate(1, k); }

SmoothField fd_only(const SmoothField& f) { return SmoothField::from(f.n, f.eval); }

}  // namespace

TEST_CASE("multi-index degrees") {
  CHECK(mi(0, 0, 1).homogeneous_degree() == 2);
  CHECK(mi(0, 0, 1).length() == 1);
  CHECK(mi(2, 1, 3).homogeneous_degree() == 9);
  CHECK_THROWS_AS(MultiIndex({1, -1, 0}), Error);
}

TEST_CASE("vector fields on coordinates") {
  const SmoothField x1 = SmoothField::from(AlgebraicField::polynomial(coord(0)));
  const SmoothField t = SmoothField::from(AlgebraicField::polynomial(coord(2)));
  const HPoint z = pt(3, 5, -1);
  CHECK(vector_field(1, x1, z) == doctest::Approx(1.0));
  // X_1 t = 2 x_2.
  CHECK(vector_field(1, t, z) == doctest::Approx(10.0));
  CHECK(vector_field(2, t, z) == doctest::Approx(-6.0));
  CHECK(vector_field(3, t, z) == doctest::Approx(1.0));
  CHECK(vector_field(1, fd_only(t), z) == doctest::Approx(10.0).epsilon(1e-9));
  CHECK_THROWS_AS(vector_field(4, t, z), Error);
  CHECK_THROWS_AS(vector_field(0, t, z), Error);
}

TEST_CASE("finite differences converge at second order") {
  // Cubic in the group coordinates: exact derivative by hand is messy, use the symbolic form.
  Polynomial p = coord(0) * coord(0) * coord(1) + 3.0 * coord(2) * coord(0) - coord(1) * coord(2);
  const SmoothField f = SmoothField::from(AlgebraicField::polynomial(p));
  const HPoint z = pt(0.7, -0.4, 0.3);
  for (int i = 1; i <= 3; ++i) {
    const double exact = vector_field(i, f, z);
    DerivativeOptions o1{1e-2, 4, false}, o2{5e-3, 4, false};
    const double e1 = std::abs(vector_field(i, f, z, o1) - exact);
    const double e2 = std::abs(vector_field(i, f, z, o2) - exact);
    if (e1 > 1e-11) CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
  }
  // Quadratic: exact up to rounding.
  Polynomial q = coord(0) * coord(1) + coord(2) + 2.0 * coord(1) * coord(1);
  const SmoothField g = SmoothField::from(AlgebraicField::polynomial(q));
  for (int i = 1; i <= 3; ++i)
    CHECK(std::abs(vector_field(i, fd_only(g), z) - vector_field(i, g, z)) < 1e-9);
}

TEST_CASE("sub-Laplacian") {
  const SmoothField c = SmoothField::from(AlgebraicField::polynomial(Polynomial::constant(1, 3.0)));
  CHECK(sublaplacian(c, pt(1, 2, 3)) == doctest::Approx(0.0));
  for (int n : {1, 2}) {
    Polynomial r2(n);
    for (int k = 0; k < 2 * n; ++k) r2 += Polynomial::coordinate(n, k) * Polynomial::coordinate(n, k);
    HPoint z(n);
    z.coord(0) = 0.3;
    z.t() = -0.8;
    CHECK(sublaplacian(SmoothField::from(AlgebraicField::polynomial(r2)), z) == doctest::Approx(-4.0 * n));
  }
  // rho^{-2} is L-harmonic away from the origin.
  const SmoothField k = SmoothField::from(koranyi_power(1, -2.0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 40; ++i) {
    HPoint z = pt(u(rng), u(rng), u(rng));
    if (koranyi_norm(z) < 0.5) continue;
    CHECK(std::abs(sublaplacian(k, z)) < 1e-10);
    CHECK(std::abs(sublaplacian(fd_only(k), z, {1e-3, 4, false})) < 1e-3);
  }
}

TEST_CASE("homogeneity of X^I under dilation") {
  // f(r . z) is the same bump recentred at r^{-1} . c with radius R / r.
  const HPoint c = pt(0.2, -0.1, 0.15);
  const double R = 1.3;
  const AlgebraicField f = radial_bump(c, R, 6, {1.0, 0.5});
  const std::vector<MultiIndex> idx = {mi(1, 0, 0), mi(0, 2, 0), mi(1, 1, 0), mi(0, 0, 1), mi(2, 0, 1)};
  for (double r : {0.5, 2.0}) {
    const AlgebraicField fr = radial_bump(dilate(1.0 / r, c), R / r, 6, {1.0, 0.5});
    const HPoint z = pt(0.1, 0.2, -0.05);
    CHECK(std::abs(fr.evaluate(z) - f.evaluate(dilate(r, z))) < 1e-12);
    for (const auto& I : idx) {
      const double lhs = fr.apply(I).evaluate(z);
      const double rhs = std::pow(r, I.homogeneous_degree()) * f.apply(I).evaluate(dilate(r, z));
      CHECK(std::abs(lhs - rhs) <= 1e-4 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("left invariance") {
  const AlgebraicField f = radial_bump(pt(0.1, 0.3, -0.2), 1.5, 5, {1.0, -0.7});
  const SmoothField sf = SmoothField::from(f);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (int s = 0; s < 20; ++s) {
    const HPoint w = pt(u(rng), u(rng), u(rng)), z = pt(u(rng), u(rng), u(rng));
    const SmoothField shifted = SmoothField::from(1, [&](const HPoint& y) { return f.evaluate(multiply(w, y)); });
    for (int i = 1; i <= 3; ++i) {
      const double lhs = vector_field(i, shifted, z);
      const double rhs = vector_field(i, sf, multiply(w, z));
      CHECK(std::abs(lhs - rhs) <= 1e-4 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("exact and finite-difference derivatives agree") {
  const SmoothField k = SmoothField::from(koranyi_power(1, -2.0));
  const HPoint z = pt(0.6, -0.5, 0.4);
  for (const auto& I : monomial_basis(1, 4)) {
    const double ex = apply_multiindex(I, k, z);
    const double fd = apply_multiindex(I, fd_only(k), z);
    CHECK(std::abs(ex - fd) <= 2e-3 * std::max(1.0, std::abs(ex)));
  }
  CHECK_THROWS_AS(apply_multiindex(mi(5, 0, 0), fd_only(k), z), Error);
  CHECK_NOTHROW(apply_multiindex(mi(5, 0, 0), k, z));
  CHECK(apply_multiindex(mi(0, 0, 0), k, z) == doctest::Approx(k(z)));
}

TEST_CASE("monomial basis") {
  const auto b1 = monomial_basis(1, 1);
  REQUIRE(b1.size() == 3);
  CHECK(b1[0] == mi(0, 0, 0));
  CHECK(b1[1] == mi(1, 0, 0));
  CHECK(b1[2] == mi(0, 1, 0));
  CHECK(monomial_basis(1, 0).size() == 1);
  CHECK(monomial_basis(1, 2).size() == 7);
  CHECK(monomial_basis(1, 4).size() == 22);
  const HPoint z = pt(0.3, -1.1, 0.7);
  for (const auto& I : monomial_basis(1, 5)) {
    const Polynomial m = Polynomial::monomial(I);
    for (double r : {0.5, 3.0})
      CHECK(m.evaluate(dilate(r, z)) == doctest::Approx(std::pow(r, I.homogeneous_degree()) * m.evaluate(z)));
    CHECK(m.homogeneous_degree() == I.homogeneous_degree());
  }
}

TEST_CASE("left translation of polynomials") {
  Polynomial p = coord(0) * coord(2) + coord(1) * coord(1) * coord(0) - 2.0 * coord(2);
  const HPoint z0 = pt(0.5, -0.2, 1.1), w = pt(-0.3, 0.8, 0.25);
  CHECK(p.left_translate(z0).evaluate(w) == doctest::Approx(p.evaluate(multiply(z0, w))));
}

TEST_CASE("Schwartz seminorm") {
  const SmoothField zero = SmoothField::from(1, [](const HPoint&) { return 0.0; });
  const Box box{{-1, -1, -1}, {1, 1, 1}};
  CHECK(schwartz_seminorm(zero, 2, box, 8) == 0.0);
  const SmoothField bump = SmoothField::from(radial_bump(identity(1), 1.0, 8));
  double prev = 0.0;
  for (int N = 0; N <= 4; ++N) {
    const double s = schwartz_seminorm(bump, N, box, 12);
    CHECK(s >= prev);
    prev = s;
  }
  // Gaussian-type bump, finite differences, grid-refinement oracle.
  const SmoothField g = SmoothField::from(1, [](const HPoint& z) {
    const double r2 = z.x(0) * z.x(0) + z.x(1) * z.x(1);
    return std::exp(-(r2 * r2 + z.t() * z.t()));
  });
  const Box wide{{-3, -3, -3}, {3, 3, 3}};
  const double coarse = schwartz_seminorm(g, 2, wide, 24);
  const double fine = schwartz_seminorm(g, 2, wide, 48);
  CHECK(std::abs(coarse - fine) <= 0.02 * fine);
}

TEST_CASE("first-order Taylor data determine P_1") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int s = 0; s < 20; ++s) {
    const auto A = first_order_taylor_system(pt(u(rng), u(rng), u(rng)));
    REQUIRE(A.size() == 3);
    const double det = A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1]) -
                       A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0]) +
                       A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]);
    CHECK(std::abs(det) > 0.5);
  }
}
