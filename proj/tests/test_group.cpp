#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hhardy/grid.hpp"
#include "hhardy/group.hpp"

using namespace hh;

namespace {

HPoint pt(double a, double b, double t) {
  const double x[2] = {a, b};
  return HPoint(std::span<const double>(x, 2), t);
}

HPoint random_point(std::mt19937_64& rng, int n, double scale = 2.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  HPoint z(n);
  for (int k = 0; k < z.dim(); ++k) z.coord(k) = u(rng);
  return z;
}

void check_close(const HPoint& a, const HPoint& b, double tol) {
  REQUIRE(a.n() == b.n());
  for (int k = 0; k < a.dim(); ++k) CHECK(std::abs(a.coord(k) - b.coord(k)) <= tol);
}

}  // namespace

TEST_CASE("group law examples") {
  const HPoint e = identity(1);
  const HPoint z = pt(0.3, -1.2, 2.5);
  check_close(multiply(e, z), z, 0);
  // x^T J y = 2(x2 y1 - x1 y2) = -2 for x = (1,0), y = (0,1).
  check_close(multiply(pt(1, 0, 0), pt(0, 1, 0)), pt(1, 1, -2), 0);
  check_close(multiply(z, inverse(z)), e, 1e-15);
  check_close(inverse(pt(1, 2, 3)), pt(-1, -2, -3), 0);
  check_close(inverse(inverse(z)), z, 0);
  check_close(dilate(1.0, z), z, 0);
  check_close(dilate(2.0, pt(1, 0, 1)), pt(2, 0, 4), 0);
}

TEST_CASE("group axioms on random triples") {
  std::mt19937_64 rng(11);
  for (int n : {1, 2, 3}) {
    for (int i = 0; i < 500; ++i) {
      const HPoint p = random_point(rng, n), q = random_point(rng, n), r = random_point(rng, n);
      check_close(multiply(multiply(p, q), r), multiply(p, multiply(q, r)), 1e-12);
      check_close(multiply(p, inverse(p)), identity(n), 1e-12);
      check_close(multiply(inverse(p), p), identity(n), 1e-12);
      const double lam = std::exp(std::uniform_real_distribution<double>(-2, 2)(rng));
      check_close(dilate(lam, multiply(p, q)), multiply(dilate(lam, p), dilate(lam, q)), 1e-11);
      CHECK(std::abs(koranyi_norm(dilate(lam, p)) - lam * koranyi_norm(p)) <= 1e-12 * (1 + lam * koranyi_norm(p)));
    }
  }
}

TEST_CASE("koranyi norm") {
  CHECK(koranyi_norm(identity(1)) == 0.0);
  CHECK(std::abs(koranyi_norm(pt(0, 0, 9.0)) - 3.0) < 1e-15);
  CHECK(std::abs(koranyi_norm(pt(0, 0, -4.0)) - 2.0) < 1e-15);
  CHECK(std::abs(koranyi_norm(pt(0.6, 0.8, 0)) - 1.0) < 1e-15);
  std::mt19937_64 rng(3);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const HPoint p = random_point(rng, 1, 3.0), q = random_point(rng, 1, 3.0);
    if (koranyi_norm(multiply(p, q)) > koranyi_norm(p) + koranyi_norm(q) + 1e-12) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("quasi distance matches the group law") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const HPoint p = random_point(rng, 2), q = random_point(rng, 2);
    CHECK(std::abs(quasi_distance(p, q) - koranyi_norm(multiply(inverse(p), q))) < 1e-12);
  }
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(dilate(0.0, identity(1)), Error);
  CHECK_THROWS_AS(dilate(-1.0, identity(1)), Error);
  CHECK_THROWS_AS(multiply(identity(1), identity(2)), Error);
  CHECK_THROWS_AS(ball_volume(-1.0, 1), Error);
  CHECK_THROWS_AS(KoranyiBall(identity(1), 0.0), Error);
  try {
    dilate(-2.0, identity(1));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::domain);
  }
}

TEST_CASE("ball volume") {
  CHECK(std::abs(ball_volume(2.0, 1) / ball_volume(1.0, 1) - 16.0) < 1e-12);
  CHECK(ball_volume(1e-3, 1) < ball_volume(1e-2, 1));
  CHECK(ball_volume(0.0, 1) == 0.0);

  // Independent oracle: a different generator and sampling of the bounding box.
  const auto& c = unit_ball_constant(1);
  std::minstd_rand rng(20240611);
  std::uniform_real_distribution<double> ux(-1.0, 1.0), ut(0.0, 1.0);
  const long samples = 10'000'000;
  long hits = 0;
  for (long s = 0; s < samples; ++s) {
    const double a = ux(rng), b = ux(rng), t = ut(rng);
    const double r2 = a * a + b * b;
    if (r2 * r2 + t * t < 1.0) ++hits;
  }
  const double p = double(hits) / samples;
  const double oracle = 8.0 * p, se = 8.0 * std::sqrt(p * (1 - p) / samples);
  const double combined = std::sqrt(se * se + c.std_error * c.std_error);
  CHECK(std::abs(c.value - oracle) <= 3.0 * combined);
  // Closed form for n = 1: pi^2 / 2.
  CHECK(std::abs(c.value - std::numbers::pi * std::numbers::pi / 2) <= 4.0 * c.std_error);
}

TEST_CASE("change of centre identity") {
  // int_B f = int_{z0^{-1} B} f(z0 u) du on two grids.
  const HPoint z0 = pt(0.4, -0.3, 0.5);
  const double delta = 0.8;
  auto f = [](const HPoint& z) { return std::exp(-z.x(0) * z.x(0) - 0.5 * z.t() * z.t()) * (1 + z.x(1)); };
  const KoranyiBall B(z0, delta);
  const GridSpec g1 = GridSpec::symmetric(1, 1.6, 3.0, 64, 128);
  double lhs = 0.0;
  for (std::size_t i = 0; i < g1.size(); ++i) {
    const HPoint z = g1.center(i);
    if (B.contains(z)) lhs += f(z);
  }
  lhs *= g1.cell_volume();
  const GridSpec g2 = GridSpec::symmetric(1, 1.0, 1.0, 64, 96);
  double rhs = 0.0;
  for (std::size_t i = 0; i < g2.size(); ++i) {
    const HPoint u = g2.center(i);
    if (koranyi_norm(u) < delta) rhs += f(multiply(z0, u));
  }
  rhs *= g2.cell_volume();
  CHECK(std::abs(lhs - rhs) <= 0.02 * std::abs(rhs));
}
