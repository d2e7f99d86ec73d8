#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "checks.hpp"

namespace hh::cli {

enum Exit : int { pass = 0, assertion = 1, usage = 2, parameter = 3, io = 4 };

int exit_code(ErrorKind k);

struct Tolerances {
  double weak_residual = 0.05;
  double reconstruction = 0.01;
  double pairing = 0.01;
  double cn_sigmas = 3.0;
  double norm_rel = 1e-6;
  double young_slack = 1e-9;
  double atom_moment = 1e-10;
  double decay_slope = 0.2;
  double decay_derivative = 0.4;
  double comparability = 20.0;
  double group = 1e-9;
  double ball_volume = 0.05;
  double maximal = 1e-9;

  nlohmann::json to_json() const;
};

struct ExportConfig {
  std::string kind = "ray";  // ray | slice
  std::optional<std::vector<double>> origin;  // default: box centre
  std::vector<double> direction;              // default: x_1 axis
  int samples = 24;
  double s_min = 0.0, s_max = 0.0;  // zero: two cells, and the last point inside the box
  std::vector<int> axes{0, 1};      // slice plane

  nlohmann::json to_json() const;
};

struct RunConfig {
  int n = 1;
  GridSpec grid = GridSpec::symmetric(1, 1.5, 2.25, 20, 30);
  OrliczSpec phi = OrliczSpec::power(2.0);
  double q = 1.2;
  int m = 1;
  int N = 0;
  std::uint64_t seed = 11;
  double gamma = 2.0;
  int battery = 5;
  int norm_res = 6;
  int refine = 8;
  int restarts = 4;
  Tolerances tol;
  ExportConfig exporter;
  std::string out = "hhardy-out";

  // Raises configuration or parameter errors; checks 1 < q < (n+1)/n.
  static RunConfig from_json(const nlohmann::json& j);
  void validate() const;
  PoissonConfig poisson() const;
  nlohmann::json to_json() const;
};

const std::vector<std::string>& suite_names();
// Unknown names raise a configuration error; the CLI maps them to a usage error first.
checks::SuiteReport run_suite(const std::string& name, const RunConfig& cfg);

struct Outcome {
  int code = 0;
  nlohmann::json report;
};

Outcome cmd_verify(const std::string& suite, const RunConfig& cfg, bool write_out);
Outcome cmd_solve(const std::string& input, const RunConfig& cfg);
Outcome cmd_export(const std::string& input, const std::string& format, const RunConfig& cfg);

// Ray profile or slice of a field: header row and numeric rows.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::optional<double> slope;  // least-squares log-log slope of a ray
};
Table ray_profile(const GridFunction& f, const ExportConfig& cfg);
Table slice_table(const GridFunction& f, const ExportConfig& cfg);
std::string to_csv(const Table& t);
nlohmann::json to_json(const Table& t);

// Parses argv, runs one subcommand, writes one JSON document to `out`, and returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hh::cli
