#include "hhardy/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hh {

namespace {

nlohmann::json parse_or_fail(const std::string& text, const std::string& what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::io, what + ": " + e.what());
  }
}

template <class T>
T field(const nlohmann::json& j, const char* key, const std::string& where) {
  require(j.is_object() && j.contains(key), ErrorKind::configuration, where + " is missing \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::configuration, where + " has a malformed \"" + key + "\": " + e.what());
  }
}

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
  return r;
}

}  // namespace

nlohmann::json to_json(const GridSpec& g) { return {{"n", g.n}, {"lo", g.lo}, {"hi", g.hi}, {"res", g.res}}; }

GridSpec grid_from_json(const nlohmann::json& j) {
  return GridSpec(field<int>(j, "n", "grid"), field<std::vector<double>>(j, "lo", "grid"),
                  field<std::vector<double>>(j, "hi", "grid"), field<std::vector<int>>(j, "res", "grid"));
}

nlohmann::json to_json(const OrliczSpec& phi) {
  return {{"family", to_string(phi.family())}, {"params", phi.params()}};
}

OrliczSpec orlicz_from_json(const nlohmann::json& j) {
  const auto params = j.contains("params") ? field<std::vector<double>>(j, "params", "Orlicz spec")
                                           : std::vector<double>{};
  return OrliczSpec::from_family(field<std::string>(j, "family", "Orlicz spec"), params);
}

void write_grid(const std::string& path, const GridFunction& f) {
  std::ofstream out(path, std::ios::binary);
  require(bool(out), ErrorKind::io, "cannot open " + path + " for writing");
  nlohmann::json h;
  if (f.size() == 0) {
    h = {{"n", 1}, {"lo", nlohmann::json::array()}, {"hi", nlohmann::json::array()},
         {"res", nlohmann::json::array()}};
  } else {
    h = to_json(f.spec());
  }
  h["count"] = f.size();
  h["dtype"] = "float64-le";
  h["order"] = "row-major";
  out << h.dump() << '\n';
  for (double v : f.values()) {
    const std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(v));
    out.write(reinterpret_cast<const char*>(&bits), 8);
  }
  require(bool(out), ErrorKind::io, "write to " + path + " failed");
}

nlohmann::json read_grid_header(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(bool(in), ErrorKind::io, "cannot open " + path);
  std::string line;
  require(bool(std::getline(in, line)), ErrorKind::io, path + " has no header line");
  return parse_or_fail(line, path + " header");
}

GridFunction read_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(bool(in), ErrorKind::io, "cannot open " + path);
  std::string line;
  require(bool(std::getline(in, line)), ErrorKind::io, path + " has no header line");
  const nlohmann::json h = parse_or_fail(line, path + " header");
  const auto count = field<std::size_t>(h, "count", path + " header");
  if (count == 0) return GridFunction();
  const GridSpec g = grid_from_json(h);
  require(g.size() == count, ErrorKind::io, path + ": header count does not match the resolution");
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    in.read(reinterpret_cast<char*>(&bits), 8);
    require(bool(in), ErrorKind::io, path + " is truncated");
    v[i] = std::bit_cast<double>(to_le(bits));
  }
  return GridFunction(g, std::move(v));
}

void write_json(const std::string& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(bool(out), ErrorKind::io, "cannot open " + path + " for writing");
  out << text;
  require(bool(out), ErrorKind::io, "write to " + path + " failed");
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  require(bool(in), ErrorKind::io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_or_fail(ss.str(), path);
}

SmoothField profile_bump(const KoranyiBall& b) {
  return SmoothField::from(b.center.n(), [b](const HPoint& z) {
    const double s = std::pow(quasi_distance(b.center, z) / b.radius, 4);
    if (s >= 1.0) return 0.0;
    const int n = z.n();
    const double u1 = (z.x(0) - b.center.x(0)) / b.radius;
    const double ut = (z.t() - b.center.t() - symplectic(n, b.center.coords().data(), z.coords().data())) /
                      (b.radius * b.radius);
    return std::pow(1.0 - s, 3) * (1.0 + 0.5 * u1 - 0.3 * ut);
  });
}

SourceManifest source_from_json(const nlohmann::json& j) {
  SourceManifest s;
  s.grid = grid_from_json(field<nlohmann::json>(j, "grid", "source manifest"));
  if (j.contains("phi")) s.phi = orlicz_from_json(j.at("phi"));
  for (const auto& a : field<nlohmann::json>(j, "atoms", "source manifest")) {
    SourceAtom sa;
    const auto ball = field<nlohmann::json>(a, "ball", "atom entry");
    const auto c = field<std::vector<double>>(ball, "center", "atom ball");
    require(int(c.size()) == s.grid.dim(), ErrorKind::configuration, "atom centre needs 2n+1 coordinates");
    sa.ball = KoranyiBall{HPoint::from_coords(s.grid.n, c), field<double>(ball, "radius", "atom ball")};
    sa.lambda = a.contains("lambda") ? field<double>(a, "lambda", "atom entry") : 1.0;
    sa.m = a.contains("m") ? field<int>(a, "m", "atom entry") : 0;
    s.atoms.push_back(sa);
  }
  return s;
}

nlohmann::json to_json(const SourceManifest& s) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : s.atoms)
    atoms.push_back({{"ball", {{"center", a.ball.center.to_vector()}, {"radius", a.ball.radius}}},
                     {"lambda", a.lambda},
                     {"m", a.m}});
  return {{"grid", to_json(s.grid)}, {"phi", to_json(s.phi)}, {"atoms", atoms}};
}

GridFunction assemble_source(const SourceManifest& s) {
  GridFunction f(s.grid);
  for (const auto& a : s.atoms) {
    GridFunction v = make_atom(s.grid, profile_bump(a.ball), a.ball, s.phi, kInfinity, a.m).samples;
    v *= a.lambda;
    f += v;
  }
  return f;
}

}  // namespace hh
