#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hhardy/grid.hpp"

namespace hh {

enum class OrliczFamily { power, sum, min, tlog, composed, complementary, custom };

const char* to_string(OrliczFamily f);

// Immutable Orlicz function with declared type metadata.
class OrliczSpec {
 public:
  static OrliczSpec power(double p);
  static OrliczSpec sum(double p1, double p2);
  static OrliczSpec min(double p1, double p2);
  static OrliczSpec tlog();
  static OrliczSpec from_family(const std::string& family, const std::vector<double>& params);
  static OrliczSpec custom(std::string name, std::function<double(double)> phi, bool convex);

  double operator()(double t) const { return (*phi_)(t); }

  OrliczFamily family() const { return family_; }
  const std::string& name() const { return name_; }
  const std::vector<double>& params() const { return params_; }
  bool convex() const { return convex_; }
  bool strictly_increasing() const { return strictly_increasing_; }
  bool bijective() const { return bijective_; }
  // i(Phi) and I(Phi) from metadata. upper_open marks "upper type p for every p > I".
  std::optional<double> lower_index() const { return lower_; }
  std::optional<double> upper_index() const { return upper_; }
  bool upper_open() const { return upper_open_; }

  friend OrliczSpec phi_power(const OrliczSpec& phi, double s);
  friend OrliczSpec complementary(const OrliczSpec& phi);

 private:
  OrliczSpec() = default;
  std::shared_ptr<const std::function<double(double)>> phi_;
  OrliczFamily family_ = OrliczFamily::custom;
  std::string name_;
  std::vector<double> params_;
  bool convex_ = false;
  bool strictly_increasing_ = true;
  bool bijective_ = true;
  std::optional<double> lower_, upper_;
  bool upper_open_ = false;
};

// Phi_s(t) = Phi(t^s); type exponents scale by s.
OrliczSpec phi_power(const OrliczSpec& phi, double s);
// Phi*(s) = sup_t (ts - Phi(t)), evaluated lazily and memoized.
OrliczSpec complementary(const OrliczSpec& phi);
// inf { t >= 0 : Phi(t) > s } by bisection.
double phi_inverse(const OrliczSpec& phi, double s);

double modular(std::span<const double> values, double cell_volume, const OrliczSpec& phi);
double modular(const GridFunction& f, const OrliczSpec& phi);

struct LuxemburgOptions {
  int max_iterations = 80;
  double rel_tol = 1e-12;
  int max_expansions = 60;
};

double luxemburg_norm(std::span<const double> values, double cell_volume, const OrliczSpec& phi,
                      const LuxemburgOptions& opt = {});
double luxemburg_norm(const GridFunction& f, const OrliczSpec& phi, const LuxemburgOptions& opt = {});
// 1 / Phi^{-1}(1 / measure).
double indicator_norm(double measure, const OrliczSpec& phi);

enum class TypeSide { lower, upper };

// Smallest C with Phi(rt) <= C r^p Phi(t) on log grids; r in [r_lo, 1] (lower) or [1, r_hi] (upper).
double type_constant(const OrliczSpec& phi, double p, TypeSide side, double r_extent, double t_lo, double t_hi,
                     int samples = 81);

// Largest observed ||f+g|| / (||f|| + ||g||) over random non-negative grid pairs.
double empirical_quasi_triangle(const OrliczSpec& phi, const GridSpec& grid, int pairs, std::uint64_t seed);

}  // namespace hh
