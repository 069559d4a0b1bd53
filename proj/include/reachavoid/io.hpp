#ifndef REACHAVOID_IO_HPP_
#define REACHAVOID_IO_HPP_

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reachavoid/grid.hpp"

// Rasters are written row-major starting from the bottom row (j = 0), so the
// first pixel is the cell at the domain origin.

namespace reachavoid {

inline constexpr const char* kVersion = "0.1.0";

//! Fixed 9-significant-digit rendering used by every CSV writer.
inline std::string fmt9(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::ofstream open_out(const std::filesystem::path& p, bool binary = false) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

//! 8-bit binary PGM; `pixel(idx)` returns the grey level of a cell.
template <typename Pixel>
void write_pgm8(const std::filesystem::path& p, const GridSpec& g, Pixel&& pixel) {
  auto out = open_out(p, true);
  out << "P5\n" << g.width << ' ' << g.height << "\n255\n";
  for (int j = 0; j < g.height; ++j) {
    for (int i = 0; i < g.width; ++i) {
      out.put(static_cast<char>(static_cast<std::uint8_t>(pixel(g.index(i, j)))));
    }
  }
}

inline void write_mask_pgm(const std::filesystem::path& p, const GridSpec& g, const Mask& m) {
  write_pgm8(p, g, [&](std::size_t k) { return m[k] ? 255 : 0; });
}

//! 16-bit PGM of a scalar field scaled to its finite maximum; +inf maps to
//! 65535 and finite values to [0, 65534].
inline void write_field_pgm16(const std::filesystem::path& p, const GridSpec& g,
                              const std::vector<double>& v) {
  double vmax = 0.0;
  for (double x : v) {
    if (std::isfinite(x)) vmax = std::max(vmax, x);
  }
  auto out = open_out(p, true);
  out << "P5\n" << g.width << ' ' << g.height << "\n65535\n";
  for (int j = 0; j < g.height; ++j) {
    for (int i = 0; i < g.width; ++i) {
      const double x = v[g.index(i, j)];
      std::uint16_t q = 65535;
      if (std::isfinite(x)) {
        q = static_cast<std::uint16_t>(vmax > 0 ? std::lround(x / vmax * 65534.0) : 0);
      }
      out.put(static_cast<char>(q >> 8));
      out.put(static_cast<char>(q & 0xff));
    }
  }
}

inline void write_mask_csv(const std::filesystem::path& p, const GridSpec& g, const Mask& m) {
  auto out = open_out(p);
  out << "i,j,x,y,value\n";
  for (int j = 0; j < g.height; ++j) {
    for (int i = 0; i < g.width; ++i) {
      const Vec2 c = g.center(Cell{i, j});
      out << i << ',' << j << ',' << fmt9(c.x) << ',' << fmt9(c.y) << ','
          << static_cast<int>(m[g.index(i, j)]) << '\n';
    }
  }
}

inline void write_field_csv(const std::filesystem::path& p, const GridSpec& g,
                            const std::vector<double>& v) {
  auto out = open_out(p);
  out << "i,j,x,y,value\n";
  for (int j = 0; j < g.height; ++j) {
    for (int i = 0; i < g.width; ++i) {
      const Vec2 c = g.center(Cell{i, j});
      out << i << ',' << j << ',' << fmt9(c.x) << ',' << fmt9(c.y) << ','
          << fmt9(v[g.index(i, j)]) << '\n';
    }
  }
}

struct RunManifest {
  std::string subcommand;
  std::vector<std::string> argv;
  std::string scenario_hash;
  nlohmann::json parameters = nlohmann::json::object();
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["tool"] = "reachavoid";
    j["version"] = kVersion;
    j["subcommand"] = subcommand;
    j["argv"] = argv;
    j["scenario_hash"] = scenario_hash;
    j["parameters"] = parameters;
    j["outputs"] = outputs;
    j["warnings"] = warnings;
    return j;
  }
};

inline void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  auto out = open_out(dir / "manifest.json");
  out << m.to_json().dump(2) << '\n';
}

}  // namespace reachavoid

#endif  // REACHAVOID_IO_HPP_
