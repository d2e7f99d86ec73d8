#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hhardy/atoms.hpp"
#include "hhardy/grid.hpp"
#include "hhardy/orlicz.hpp"

namespace hh {

nlohmann::json to_json(const GridSpec& g);
GridSpec grid_from_json(const nlohmann::json& j);

// {"family": ..., "params": [...]}
nlohmann::json to_json(const OrliczSpec& phi);
OrliczSpec orlicz_from_json(const nlohmann::json& j);

// One JSON header line (n, lo, hi, res, count), then `count` little-endian float64 values in row-major order
// (last axis fastest). A field with no cells is written with count 0 and reads back as an empty GridFunction.
void write_grid(const std::string& path, const GridFunction& f);
GridFunction read_grid(const std::string& path);
nlohmann::json read_grid_header(const std::string& path);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);
void write_text(const std::string& path, const std::string& text);

// Asymmetric bump (1 - (rho/r)^4)^3 (1 + u_1/2 - 3 u_t/10) in the local variable u of the ball.
SmoothField profile_bump(const KoranyiBall& ball);

// Source manifest for a right-hand side:
// {"grid": {...}, "phi": {...}, "atoms": [{"ball": {"center": [...], "radius": r}, "lambda": w, "m": m}]}
struct SourceAtom {
  KoranyiBall ball{HPoint(1), 1.0};
  double lambda = 1.0;
  int m = 0;
};
struct SourceManifest {
  GridSpec grid;
  OrliczSpec phi = OrliczSpec::power(2.0);
  std::vector<SourceAtom> atoms;
};
SourceManifest source_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SourceManifest& s);
// sum lambda_i a_i with a_i = make_atom(profile_bump(B_i), B_i, phi, inf, m_i).
GridFunction assemble_source(const SourceManifest& s);

}  // namespace hh
