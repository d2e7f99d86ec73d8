#pragma once

#include <vector>

#include "hhardy/group.hpp"

namespace hh {

struct GaussLegendre {
  std::vector<double> x, w;
  static GaussLegendre on(int m, double a, double b);
};

// Nodes on the unit Koranyi sphere with weights such that
//   int f dz = int_0^inf s^{Q-1} sum_k w_k f(s . omega_k) ds.
// Parametrisation omega = (sqrt(cos phi) sigma, sin phi), sigma in S^{2n-1}.
struct SphereRule {
  int n = 1;
  std::vector<HPoint> nodes;
  std::vector<double> weights;
  static SphereRule make(int n, int n_phi, int n_angle);
  double total() const;
};

// Closed form of the total sphere weight; |B(e,1)| = total / Q.
double koranyi_sphere_measure(int n);

// Product rule on the unit ball B(e,1): weights sum to |B(e,1)|.
struct BallRule {
  int n = 1;
  std::vector<HPoint> nodes;
  std::vector<double> weights;
  static BallRule make(int n, int n_radial, int n_phi, int n_angle);
  double total() const;
};

}  // namespace hh
