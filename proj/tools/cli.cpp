#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>

namespace hh::cli {

namespace fs = std::filesystem;

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::io:
      return Exit::io;
    case ErrorKind::parameter:
    case ErrorKind::configuration:
    case ErrorKind::domain:
    case ErrorKind::resolution:
    case ErrorKind::unsupported:
      return Exit::parameter;
    default:
      return Exit::assertion;
  }
}

namespace {

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& dst, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::configuration, where + "." + key + " is malformed: " + e.what());
  }
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  require(j.is_object(), ErrorKind::configuration, where + " must be a JSON object");
  for (const auto& [k, v] : j.items())
    require(known.count(k) > 0, ErrorKind::configuration, "unknown key \"" + k + "\" in " + where);
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec && fs::is_directory(dir), ErrorKind::io, "cannot create output directory " + dir);
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

// A grid binary starts with a one-line JSON header carrying "count"; anything else is read as a manifest.
bool is_grid_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(bool(in), ErrorKind::io, "cannot open " + path);
  std::string line;
  std::getline(in, line);
  const nlohmann::json h = nlohmann::json::parse(line, nullptr, false);
  return !h.is_discarded() && h.is_object() && h.contains("count");
}

HPoint box_center(const GridSpec& g) {
  std::vector<double> c(g.dim());
  for (int k = 0; k < g.dim(); ++k) c[k] = 0.5 * (g.lo[k] + g.hi[k]);
  return HPoint::from_coords(g.n, c);
}

}  // namespace

nlohmann::json Tolerances::to_json() const {
  return {{"weak_residual", weak_residual}, {"reconstruction", reconstruction},
          {"pairing", pairing},             {"cn_sigmas", cn_sigmas},
          {"norm_rel", norm_rel},           {"young_slack", young_slack},
          {"atom_moment", atom_moment},     {"decay_slope", decay_slope},
          {"decay_derivative", decay_derivative}, {"comparability", comparability},
          {"group", group},                 {"ball_volume", ball_volume},
          {"maximal", maximal}};
}

nlohmann::json ExportConfig::to_json() const {
  return {{"kind", kind},
          {"origin", origin ? nlohmann::json(*origin) : nlohmann::json(nullptr)},
          {"direction", direction},
          {"samples", samples},
          {"s_min", s_min},
          {"s_max", s_max},
          {"axes", axes}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  reject_unknown(j, {"n", "grid", "phi", "q", "m", "N", "seed", "gamma", "battery", "norm_res", "refine", "restarts",
                     "tolerances", "export", "out"},
                 "config");
  RunConfig c;
  read_opt(j, "n", c.n, "config");
  check_n(c.n);
  if (j.contains("grid")) {
    nlohmann::json g = j.at("grid");
    reject_unknown(g, {"n", "lo", "hi", "res"}, "config.grid");
    if (!g.contains("n")) g["n"] = c.n;
    c.grid = grid_from_json(g);
    require(c.grid.n == c.n, ErrorKind::configuration, "config.grid.n differs from config.n");
  } else if (c.n != 1) {
    c.grid = GridSpec::symmetric(c.n, 1.5, 2.25, 8, 12);
  }
  if (j.contains("phi")) {
    reject_unknown(j.at("phi"), {"family", "params"}, "config.phi");
    c.phi = orlicz_from_json(j.at("phi"));
  }
  read_opt(j, "q", c.q, "config");
  c.m = std::max(1, critical_moment_order(c.phi, c.n));
  read_opt(j, "m", c.m, "config");
  read_opt(j, "N", c.N, "config");
  read_opt(j, "seed", c.seed, "config");
  read_opt(j, "gamma", c.gamma, "config");
  read_opt(j, "battery", c.battery, "config");
  read_opt(j, "norm_res", c.norm_res, "config");
  read_opt(j, "refine", c.refine, "config");
  read_opt(j, "restarts", c.restarts, "config");
  read_opt(j, "out", c.out, "config");
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    reject_unknown(t, {"weak_residual", "reconstruction", "pairing", "cn_sigmas", "norm_rel", "young_slack",
                       "atom_moment", "decay_slope", "decay_derivative", "comparability", "group", "ball_volume",
                       "maximal"},
                   "config.tolerances");
    const std::string w = "config.tolerances";
    read_opt(t, "weak_residual", c.tol.weak_residual, w);
    read_opt(t, "reconstruction", c.tol.reconstruction, w);
    read_opt(t, "pairing", c.tol.pairing, w);
    read_opt(t, "cn_sigmas", c.tol.cn_sigmas, w);
    read_opt(t, "norm_rel", c.tol.norm_rel, w);
    read_opt(t, "young_slack", c.tol.young_slack, w);
    read_opt(t, "atom_moment", c.tol.atom_moment, w);
    read_opt(t, "decay_slope", c.tol.decay_slope, w);
    read_opt(t, "decay_derivative", c.tol.decay_derivative, w);
    read_opt(t, "comparability", c.tol.comparability, w);
    read_opt(t, "group", c.tol.group, w);
    read_opt(t, "ball_volume", c.tol.ball_volume, w);
    read_opt(t, "maximal", c.tol.maximal, w);
  }
  if (j.contains("export")) {
    const auto& e = j.at("export");
    reject_unknown(e, {"kind", "origin", "direction", "samples", "s_min", "s_max", "axes"}, "config.export");
    const std::string w = "config.export";
    read_opt(e, "kind", c.exporter.kind, w);
    if (e.contains("origin") && !e.at("origin").is_null()) {
      std::vector<double> o;
      read_opt(e, "origin", o, w);
      c.exporter.origin = o;
    }
    read_opt(e, "direction", c.exporter.direction, w);
    read_opt(e, "samples", c.exporter.samples, w);
    read_opt(e, "s_min", c.exporter.s_min, w);
    read_opt(e, "s_max", c.exporter.s_max, w);
    read_opt(e, "axes", c.exporter.axes, w);
  }
  c.validate();
  return c;
}

void RunConfig::validate() const {
  check_n(n);
  poisson().solver.validate(n);
  require(m >= 0, ErrorKind::parameter, "m must be non-negative");
  require(N >= 0, ErrorKind::parameter, "N must be non-negative");
  require(gamma > 0.0, ErrorKind::parameter, "gamma must be positive");
  require(battery >= 1, ErrorKind::parameter, "battery needs at least one test function");
  require(norm_res >= 1, ErrorKind::parameter, "norm_res must be positive");
  require(refine >= 1 && restarts >= 1, ErrorKind::parameter, "refine and restarts must be positive");
  require(exporter.kind == "ray" || exporter.kind == "slice", ErrorKind::configuration,
          "export.kind must be ray or slice");
  require(exporter.samples >= 2, ErrorKind::parameter, "export.samples must be at least 2");
  require(exporter.axes.size() == 2 && exporter.axes[0] != exporter.axes[1], ErrorKind::configuration,
          "export.axes needs two distinct axes");
  for (int a : exporter.axes)
    require(a >= 0 && a < 2 * n + 1, ErrorKind::configuration, "export.axes entries must lie in [0, 2n]");
  const nlohmann::json tj = tol.to_json();
  for (const auto& [k, v] : tj.items())
    require(v.get<double>() >= 0.0, ErrorKind::parameter, "tolerance " + k + " must be non-negative");
}

PoissonConfig RunConfig::poisson() const {
  PoissonConfig p;
  p.solver.q = q;
  p.solver.refine = refine;
  p.solver.restarts = restarts;
  p.solver.seed = seed;
  p.decomposition.maximal.N = N;
  p.gamma = gamma;
  p.battery = battery;
  p.norm_res = norm_res;
  p.seed = seed;
  return p;
}

nlohmann::json RunConfig::to_json() const {
  return {{"n", n},
          {"grid", hh::to_json(grid)},
          {"phi", hh::to_json(phi)},
          {"q", q},
          {"m", m},
          {"N", N},
          {"seed", seed},
          {"gamma", gamma},
          {"battery", battery},
          {"norm_res", norm_res},
          {"refine", refine},
          {"restarts", restarts},
          {"tolerances", tol.to_json()},
          {"export", exporter.to_json()},
          {"out", out}};
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"group",     "orlicz", "maximal",   "atoms",
                                              "potential", "czd",    "triviality"};
  return names;
}

checks::SuiteReport run_suite(const std::string& name, const RunConfig& cfg) {
  using namespace checks;
  const Tolerances& t = cfg.tol;
  const std::uint64_t s = cfg.seed;
  SuiteReport r;
  r.suite = name;
  r.seed = s;
  if (name == "group") {
    r.checks = {group_identities(s, 2000, t.group), ball_volume_scaling(t.ball_volume)};
  } else if (name == "orlicz") {
    r.checks = {luxemburg_lp(s + 1, 20, t.norm_rel), power_identity(s + 2, t.norm_rel),
                young_and_inverse_product(s + 3, 10000, t.young_slack)};
  } else if (name == "maximal") {
    r.checks = {hl_maximal_properties(t.maximal), maximal_comparability(t.comparability)};
  } else if (name == "atoms") {
    r.checks = {atom_validity(t.atom_moment)};
  } else if (name == "potential") {
    r.checks = {fundamental_pairing(t.pairing), cn_cross_validation(s + 4, 4'000'000, t.cn_sigmas),
                potential_decay(t.decay_slope, t.decay_derivative), atom_potential_pairing(t.weak_residual)};
  } else if (name == "czd") {
    r.checks = {whitney_random(s + 5, 10), single_atom_decomposition(t.reconstruction)};
  } else if (name == "triviality") {
    // The configured Phi when it is sub-critical, otherwise the power(0.4) witness.
    double p = 0.4;
    bool from_config = false;
    if (cfg.phi.family() == OrliczFamily::power) {
      try {
        check_poisson_parameters(cfg.n, cfg.phi, cfg.q);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::parameter) {
          p = cfg.phi.params().front();
          from_config = true;
        }
      }
    }
    CheckResult c = triviality(p, cfg.q, 3);
    c.detail["phi_from_config"] = from_config;
    r.checks = {c};
  } else {
    fail(ErrorKind::configuration, "unknown suite " + name);
  }
  return r;
}

Outcome cmd_verify(const std::string& suite, const RunConfig& cfg, bool write_out) {
  const checks::SuiteReport rep = run_suite(suite, cfg);
  Outcome o;
  o.code = rep.pass() ? Exit::pass : Exit::assertion;
  o.report = {{"command", "verify"}, {"status", rep.pass() ? "pass" : "fail"}, {"report", rep.to_json()},
              {"config", cfg.to_json()}};
  if (write_out) {
    make_dir(cfg.out);
    write_json(join(cfg.out, "verify_" + suite + ".json"), o.report);
  }
  return o;
}

Outcome cmd_solve(const std::string& input, const RunConfig& cfg) {
  GridFunction f;
  nlohmann::json source;
  const OrliczSpec phi = cfg.phi;
  // Inadmissible parameters are rejected before any work.
  check_poisson_parameters(cfg.n, phi, cfg.q);
  if (is_grid_file(input)) {
    f = read_grid(input);
    require(f.size() > 0, ErrorKind::parameter, "solve needs a non-empty grid");
    require(f.spec().n == cfg.n, ErrorKind::configuration, "input grid n differs from config.n");
    source = {{"kind", "grid"}, {"path", input}, {"grid", to_json(f.spec())}};
  } else {
    const nlohmann::json j = read_json(input);
    SourceManifest m = source_from_json(j);
    if (!j.contains("phi")) m.phi = cfg.phi;
    require(m.grid.n == cfg.n, ErrorKind::configuration, "manifest grid n differs from config.n");
    f = assemble_source(m);
    source = {{"kind", "atoms"}, {"path", input}, {"manifest", to_json(m)}};
  }
  const PoissonSolution sol = solve_poisson(f, phi, cfg.q, cfg.m, cfg.poisson());

  make_dir(cfg.out);
  write_grid(join(cfg.out, "F.bin"), sol.F);
  write_json(join(cfg.out, "manifest.json"), sol.decomposition.manifest("atoms.json#atom"));
  nlohmann::json atoms = nlohmann::json::object();
  for (const auto& t : sol.decomposition.terms)
    atoms["atom_" + std::to_string(t.j) + "_" + std::to_string(t.k)] = {{"cells", t.cells}, {"values", t.values}};
  write_json(join(cfg.out, "atoms.json"), {{"grid", to_json(f.spec())}, {"atoms", atoms}});
  const nlohmann::json diag = sol.diagnostics.to_json();
  write_json(join(cfg.out, "diagnostics.json"), diag);

  const bool ok = sol.diagnostics.weak_residual <= cfg.tol.weak_residual &&
                  sol.diagnostics.reconstruction <= cfg.tol.reconstruction;
  Outcome o;
  o.code = ok ? Exit::pass : Exit::assertion;
  o.report = {{"command", "solve"},
              {"status", ok ? "pass" : "fail"},
              {"source", source},
              {"diagnostics", diag},
              {"decomposition", sol.decomposition.summary()},
              {"outputs",
               {{"F", join(cfg.out, "F.bin")},
                {"manifest", join(cfg.out, "manifest.json")},
                {"atoms", join(cfg.out, "atoms.json")},
                {"diagnostics", join(cfg.out, "diagnostics.json")}}},
              {"config", cfg.to_json()}};
  write_json(join(cfg.out, "report.json"), o.report);
  return o;
}

Table ray_profile(const GridFunction& f, const ExportConfig& cfg) {
  Table t;
  t.columns = {"s", "value", "log_s", "log_abs", "local_slope"};
  if (f.size() == 0) return t;
  const GridSpec& g = f.spec();
  const HPoint origin = cfg.origin ? HPoint::from_coords(g.n, *cfg.origin) : box_center(g);
  std::vector<double> d = cfg.direction;
  if (d.empty()) {
    d.assign(g.dim(), 0.0);
    d[0] = 1.0;
  }
  HPoint w = HPoint::from_coords(g.n, d);
  const double nw = koranyi_norm(w);
  require(nw > 0.0, ErrorKind::configuration, "export.direction must be non-zero");
  w = dilate(1.0 / nw, w);
  double hmax = 0.0;
  for (int k = 0; k < g.dim(); ++k) hmax = std::max(hmax, g.spacing(k));
  const double s_lo = cfg.s_min > 0.0 ? cfg.s_min : 2.0 * hmax;
  double s_hi = cfg.s_max;
  if (s_hi <= 0.0) {
    // Last point of a fine scan still inside the box.
    const double diam = g.diameter();
    for (int k = 1; k <= 2000; ++k) {
      const double s = s_lo + (diam - s_lo) * k / 2000.0;
      if (!g.contains(multiply(origin, dilate(s, w)))) break;
      s_hi = s;
    }
  }
  require(s_hi > s_lo, ErrorKind::parameter, "ray leaves the box before s_min");
  std::vector<double> s(cfg.samples), v(cfg.samples);
  for (int k = 0; k < cfg.samples; ++k) {
    s[k] = s_lo * std::pow(s_hi / s_lo, double(k) / (cfg.samples - 1));
    v[k] = f.interpolate(multiply(origin, dilate(s[k], w)));
  }
  std::vector<double> ls(s.size()), la(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    ls[k] = std::log(s[k]);
    la[k] = std::log(std::abs(v[k]));
  }
  const std::size_t K = s.size();
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t a = k == 0 ? 0 : k - 1, b = k + 1 == K ? K - 1 : k + 1;
    const double slope = (la[b] - la[a]) / (ls[b] - ls[a]);
    t.rows.push_back({s[k], v[k], ls[k], la[k], slope});
  }
  bool finite = true;
  for (double x : la) finite = finite && std::isfinite(x);
  if (finite) t.slope = loglog_slope(s, v);
  return t;
}

Table slice_table(const GridFunction& f, const ExportConfig& cfg) {
  Table t;
  const int a = cfg.axes[0], b = cfg.axes[1];
  auto axis_name = [](int n, int k) { return k == 2 * n ? std::string("t") : "x" + std::to_string(k + 1); };
  const int n = f.size() == 0 ? 1 : f.spec().n;
  t.columns = {axis_name(n, a), axis_name(n, b), "value"};
  if (f.size() == 0) return t;
  const GridSpec& g = f.spec();
  require(a < g.dim() && b < g.dim(), ErrorKind::configuration, "export.axes outside the grid dimension");
  const HPoint origin = cfg.origin ? HPoint::from_coords(g.n, *cfg.origin) : box_center(g);
  std::vector<int> ids(g.dim());
  for (int k = 0; k < g.dim(); ++k)
    ids[k] = std::clamp(int(std::floor((origin.coord(k) - g.lo[k]) / g.spacing(k))), 0, g.res[k] - 1);
  for (int i = 0; i < g.res[a]; ++i)
    for (int j = 0; j < g.res[b]; ++j) {
      ids[a] = i;
      ids[b] = j;
      t.rows.push_back({g.center_coord(a, i), g.center_coord(b, j), f[g.ravel(ids.data())]});
    }
  return t;
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + t.columns[c];
  out += "\n";
  for (const auto& r : t.rows) {
    for (std::size_t c = 0; c < r.size(); ++c) out += (c ? "," : "") + fmt(r[c]);
    out += "\n";
  }
  return out;
}

nlohmann::json to_json(const Table& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) {
    nlohmann::json row = nlohmann::json::object();
    for (std::size_t c = 0; c < r.size(); ++c) row[t.columns[c]] = number_or_null(r[c]);
    rows.push_back(row);
  }
  return {{"columns", t.columns}, {"rows", rows}, {"slope", t.slope ? nlohmann::json(*t.slope) : nlohmann::json(nullptr)}};
}

Outcome cmd_export(const std::string& input, const std::string& format, const RunConfig& cfg) {
  require(fs::exists(input), ErrorKind::io, "field file " + input + " does not exist");
  const GridFunction f = read_grid(input);
  const Table t = cfg.exporter.kind == "ray" ? ray_profile(f, cfg.exporter) : slice_table(f, cfg.exporter);
  make_dir(cfg.out);
  const std::string path = join(cfg.out, fs::path(input).stem().string() + "_" + cfg.exporter.kind + "." + format);
  if (format == "csv")
    write_text(path, to_csv(t));
  else
    write_json(path, to_json(t));
  Outcome o;
  o.code = Exit::pass;
  o.report = {{"command", "export"},
              {"status", "pass"},
              {"input", input},
              {"output", path},
              {"format", format},
              {"kind", cfg.exporter.kind},
              {"columns", t.columns},
              {"rows", t.rows.size()},
              {"slope", t.slope ? nlohmann::json(*t.slope) : nlohmann::json(nullptr)},
              {"config", cfg.to_json()}};
  return o;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Orlicz-Hardy analysis on the Heisenberg group"};
  app.require_subcommand(1);
  std::string config_path, suite, input, out_dir, format = "csv";
  std::optional<std::uint64_t> seed;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run configuration (JSON)");
    sub->add_option("--seed", seed, "Seed for randomized checks");
    sub->add_option("--out", out_dir, "Output directory");
  };
  CLI::App* verify = app.add_subcommand("verify", "Run an invariant suite");
  add_common(verify);
  verify->add_option("--suite", suite, "group, orlicz, maximal, atoms, potential, czd or triviality")->required();
  CLI::App* solve = app.add_subcommand("solve", "Solve L F = f for an atom manifest or a grid file");
  add_common(solve);
  solve->add_option("--input", input, "Atom manifest (JSON) or grid binary")->required();
  CLI::App* exp = app.add_subcommand("export", "Export a ray profile or slice of a grid field");
  add_common(exp);
  exp->add_option("--input", input, "Grid binary")->required();
  exp->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto error_doc = [&](int code, const std::string& kind, const std::string& msg) {
    err << msg << "\n";
    out << nlohmann::json{{"status", "error"}, {"kind", kind}, {"message", msg}, {"exit", code}}.dump(2) << "\n";
    return code;
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return Exit::pass;
  } catch (const CLI::ParseError& e) {
    return error_doc(Exit::usage, "usage", e.what());
  }

  try {
    if (verify->parsed()) {
      const auto& names = suite_names();
      if (std::find(names.begin(), names.end(), suite) == names.end())
        return error_doc(Exit::usage, "usage", "unknown suite " + suite);
    }
    RunConfig cfg;
    if (!config_path.empty()) {
      require(fs::exists(config_path), ErrorKind::io, "config file " + config_path + " does not exist");
      cfg = RunConfig::from_json(read_json(config_path));
    }
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.out = out_dir;

    Outcome o;
    if (verify->parsed())
      o = cmd_verify(suite, cfg, !out_dir.empty());
    else if (solve->parsed())
      o = cmd_solve(input, cfg);
    else
      o = cmd_export(input, format, cfg);
    out << o.report.dump(2) << "\n";
    return o.code;
  } catch (const Error& e) {
    const int code = exit_code(e.kind());
    return error_doc(code, to_string(e.kind()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return error_doc(Exit::parameter, "configuration", e.what());
  } catch (const std::exception& e) {
    return error_doc(Exit::assertion, "internal", e.what());
  }
}

}  // namespace hh::cli
