#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "hhardy/io.hpp"

using namespace hh;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "hhardy_test_io";
  fs::create_directories(d);
  return d / name;
}

}  // namespace

TEST_CASE("grid binary round trip") {
  const GridSpec g(1, {-1.0, -0.5, -2.0}, {1.0, 0.5, 2.0}, {3, 4, 5});
  std::mt19937_64 rng(3);
  std::normal_distribution<double> u;
  GridFunction f(g);
  for (double& v : f.values()) v = u(rng);
  f[7] = -0.0;
  f[8] = 1e-310;
  const std::string path = scratch("roundtrip.bin").string();
  write_grid(path, f);
  const GridFunction r = read_grid(path);
  REQUIRE(r.spec() == g);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::memcmp(&r.values()[i], &f.values()[i], 8) == 0);

  const nlohmann::json h = read_grid_header(path);
  CHECK(h["count"] == g.size());
  CHECK(h["res"] == nlohmann::json({3, 4, 5}));
  // Header line, then raw little-endian doubles in row-major order (t fastest).
  std::ifstream in(path, std::ios::binary);
  std::string line;
  std::getline(in, line);
  CHECK(fs::file_size(path) == line.size() + 1 + 8 * g.size());
  unsigned char bytes[8];
  in.seekg(std::streamoff(line.size() + 1 + 8 * g.stride(2)));
  in.read(reinterpret_cast<char*>(bytes), 8);
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= std::uint64_t(bytes[b]) << (8 * b);
  double v;
  std::memcpy(&v, &bits, 8);
  CHECK(g.stride(2) == 1);
  CHECK(v == f[1]);
}

TEST_CASE("empty field and damaged files") {
  const std::string path = scratch("empty.bin").string();
  write_grid(path, GridFunction());
  CHECK(read_grid(path).size() == 0);

  const GridSpec g = GridSpec::symmetric(1, 1.0, 1.0, 2, 2);
  const std::string full = scratch("full.bin").string();
  write_grid(full, GridFunction(g, 1.5));
  const auto size = fs::file_size(full);
  fs::resize_file(full, size - 4);
  try {
    read_grid(full);
    FAIL("truncated file accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }
  try {
    read_grid(scratch("missing.bin").string());
    FAIL("missing file accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }
  std::ofstream(scratch("garbage.bin")) << "not json\n";
  CHECK_THROWS_AS(read_grid(scratch("garbage.bin").string()), Error);
}

TEST_CASE("Orlicz and grid JSON") {
  for (const auto& phi : {OrliczSpec::power(0.8), OrliczSpec::sum(0.7, 2.0), OrliczSpec::min(0.5, 1.8),
                          OrliczSpec::tlog()}) {
    const nlohmann::json j = to_json(phi);
    CHECK(j.contains("family"));
    CHECK(j.contains("params"));
    const OrliczSpec back = orlicz_from_json(j);
    CHECK(back.name() == phi.name());
    for (double t : {0.01, 1.0, 7.0}) CHECK(back(t) == phi(t));
  }
  CHECK(orlicz_from_json({{"family", "power"}, {"params", {2.0}}})(3.0) == doctest::Approx(9.0));
  CHECK_THROWS_AS(orlicz_from_json({{"family", "nope"}, {"params", {}}}), Error);
  CHECK_THROWS_AS(orlicz_from_json({{"params", {1.0}}}), Error);

  const GridSpec g = GridSpec::symmetric(1, 1.0, 2.0, 4, 6);
  CHECK(grid_from_json(to_json(g)) == g);
  CHECK_THROWS_AS(grid_from_json({{"n", 1}, {"lo", {0, 0, 0}}, {"hi", {1, 1}}, {"res", {2, 2, 2}}}), Error);
}

TEST_CASE("source manifests") {
  const nlohmann::json j = {
      {"grid", {{"n", 1}, {"lo", {-1.5, -1.5, -2.25}}, {"hi", {1.5, 1.5, 2.25}}, {"res", {16, 16, 24}}}},
      {"phi", {{"family", "power"}, {"params", {2.0}}}},
      {"atoms",
       {{{"ball", {{"center", {0.2, -0.1, 0.1}}, {"radius", 0.8}}}, {"lambda", 0.5}, {"m", 1}},
        {{"ball", {{"center", {-0.3, 0.2, -0.2}}, {"radius", 0.7}}}}}}};
  const SourceManifest s = source_from_json(j);
  REQUIRE(s.atoms.size() == 2);
  CHECK(s.atoms[1].lambda == 1.0);
  CHECK(s.atoms[1].m == 0);
  CHECK(source_from_json(to_json(s)).atoms[0].ball.radius == 0.8);

  // The sum is linear in the weights.
  const GridFunction f = assemble_source(s);
  SourceManifest one = s;
  one.atoms.resize(1);
  GridFunction a0 = assemble_source(one);
  one.atoms[0] = s.atoms[1];
  const GridFunction a1 = assemble_source(one);
  a0 += a1;
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(f[i] == doctest::Approx(a0[i]).scale(1.0));

  nlohmann::json bad = j;
  bad["atoms"][0]["ball"]["center"] = {0.0, 0.0};
  CHECK_THROWS_AS(source_from_json(bad), Error);
  CHECK_THROWS_AS(source_from_json(nlohmann::json::object()), Error);
}

TEST_CASE("deterministic JSON files") {
  const nlohmann::json j = {{"b", 0.1}, {"a", {1, 2, 3}}, {"c", 1.0 / 3.0}};
  const std::string p1 = scratch("a.json").string(), p2 = scratch("b.json").string();
  write_json(p1, j);
  write_json(p2, nlohmann::json::parse(j.dump()));
  std::ifstream a(p1), b(p2);
  const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa == sb);
  CHECK(read_json(p1) == j);
  CHECK_THROWS_AS(read_json(scratch("nothing.json").string()), Error);
}
