#include "hhardy/quadrature.hpp"

#include <cmath>
#include <functional>
#include <numbers>

namespace hh {

GaussLegendre GaussLegendre::on(int m, double a, double b) {
  require(m >= 1, ErrorKind::configuration, "Gauss-Legendre needs at least one node");
  GaussLegendre g;
  g.x.resize(m);
  g.w.resize(m);
  for (int i = 0; i < m; ++i) {
    // Newton on P_m from the Chebyshev guess.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (m == 1) p0 = 1.0, p1 = z;
      dp = m * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    g.x[i] = 0.5 * (a + b) - 0.5 * (b - a) * z;
    g.w[i] = (b - a) / ((1.0 - z * z) * dp * dp);
  }
  return g;
}

namespace {

// Rule on S^{d-1} in R^d.
void sphere_directions(int d, int n_angle, std::vector<std::vector<double>>& dirs, std::vector<double>& w) {
  if (d == 2) {
    const int m = 2 * n_angle;
    for (int k = 0; k < m; ++k) {
      const double th = 2.0 * std::numbers::pi * (k + 0.5) / m;
      dirs.push_back({std::cos(th), std::sin(th)});
      w.push_back(2.0 * std::numbers::pi / m);
    }
    return;
  }
  std::vector<std::vector<double>> sub;
  std::vector<double> sw;
  sphere_directions(d - 1, n_angle, sub, sw);
  const GaussLegendre g = GaussLegendre::on(n_angle, 0.0, std::numbers::pi);
  for (int i = 0; i < n_angle; ++i) {
    const double c = std::cos(g.x[i]), s = std::sin(g.x[i]);
    const double wt = g.w[i] * std::pow(s, d - 2);
    for (std::size_t j = 0; j < sub.size(); ++j) {
      std::vector<double> v{c};
      for (double y : sub[j]) v.push_back(s * y);
      dirs.push_back(v);
      w.push_back(wt * sw[j]);
    }
  }
}

}  // namespace

SphereRule SphereRule::make(int n, int n_phi, int n_angle) {
  check_n(n);
  require(n_phi >= 1 && n_angle >= 1, ErrorKind::configuration, "sphere rule needs positive orders");
  SphereRule r;
  r.n = n;
  std::vector<std::vector<double>> dirs;
  std::vector<double> dw;
  sphere_directions(2 * n, n_angle, dirs, dw);
  const GaussLegendre g = GaussLegendre::on(n_phi, -std::numbers::pi / 2, std::numbers::pi / 2);
  for (int i = 0; i < n_phi; ++i) {
    const double c = std::cos(g.x[i]);
    const double wphi = g.w[i] * std::pow(c, n - 1);
    const double a = std::sqrt(c);
    for (std::size_t j = 0; j < dirs.size(); ++j) {
      HPoint p(n);
      for (int k = 0; k < 2 * n; ++k) p.x(k) = a * dirs[j][k];
      p.t() = std::sin(g.x[i]);
      r.nodes.push_back(p);
      r.weights.push_back(wphi * dw[j]);
    }
  }
  return r;
}

double SphereRule::total() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

double koranyi_sphere_measure(int n) {
  check_n(n);
  const double sphere = 2.0 * std::pow(std::numbers::pi, n) / std::tgamma(double(n));
  const double cos_int = std::sqrt(std::numbers::pi) * std::tgamma(n / 2.0) / std::tgamma((n + 1) / 2.0);
  return sphere * cos_int;
}

BallRule BallRule::make(int n, int n_radial, int n_phi, int n_angle) {
  const SphereRule sr = SphereRule::make(n, n_phi, n_angle);
  const GaussLegendre gs = GaussLegendre::on(n_radial, 0.0, 1.0);
  const int Q = homogeneous_dimension(n);
  BallRule b;
  b.n = n;
  for (int i = 0; i < n_radial; ++i) {
    const double s = gs.x[i];
    const double ws = gs.w[i] * std::pow(s, Q - 1);
    for (std::size_t k = 0; k < sr.nodes.size(); ++k) {
      b.nodes.push_back(dilate(s, sr.nodes[k]));
      b.weights.push_back(ws * sr.weights[k]);
    }
  }
  return b;
}

double BallRule::total() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

}  // namespace hh
