#pragma once

#include "feasreg/common.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace feasreg {

/// Gridded terrain elevation. Grid node (i, j) sits at
/// (origin_x + j*cell_size, origin_y + i*cell_size); elevations row-major.
struct HeightMap {
  double origin_x = 0.0, origin_y = 0.0;  // m
  double cell_size = 0.0;                 // m
  int rows = 0, cols = 0;
  std::vector<double> z;  // m, rows*cols entries

  double at(int i, int j) const { return z[static_cast<std::size_t>(i) * cols + j]; }
  double& at(int i, int j) { return z[static_cast<std::size_t>(i) * cols + j]; }

  double max_x() const { return origin_x + (cols - 1) * cell_size; }
  double max_y() const { return origin_y + (rows - 1) * cell_size; }

  bool contains(double x, double y) const {
    return x >= origin_x - 1e-12 && x <= max_x() + 1e-12 && y >= origin_y - 1e-12 &&
           y <= max_y() + 1e-12;
  }
};

struct TerrainSample {
  double z = 0.0;
  Vec3 normal = Vec3::UnitZ();
};

namespace detail {

// Shortest round-trip decimal form; parsing it recovers the double bit-exactly.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double bilinear_z(const HeightMap& m, double x, double y) {
  const double gx = std::clamp((x - m.origin_x) / m.cell_size, 0.0, static_cast<double>(m.cols - 1));
  const double gy = std::clamp((y - m.origin_y) / m.cell_size, 0.0, static_cast<double>(m.rows - 1));
  const int j0 = std::min(static_cast<int>(gx), m.cols - 2 >= 0 ? m.cols - 2 : 0);
  const int i0 = std::min(static_cast<int>(gy), m.rows - 2 >= 0 ? m.rows - 2 : 0);
  const int j1 = std::min(j0 + 1, m.cols - 1);
  const int i1 = std::min(i0 + 1, m.rows - 1);
  const double tx = gx - j0;
  const double ty = gy - i0;
  const double z00 = m.at(i0, j0), z01 = m.at(i0, j1), z10 = m.at(i1, j0), z11 = m.at(i1, j1);
  return (1 - ty) * ((1 - tx) * z00 + tx * z01) + ty * ((1 - tx) * z10 + tx * z11);
}

}  // namespace detail

/// Bilinear elevation plus a unit normal from central-difference gradients
/// (step = one cell). At discontinuities the steeper one-sided slope wins, so
/// pallet edges report the face rather than an averaged tilt.
inline TerrainSample sample(const HeightMap& m, double x, double y) {
  if (m.rows < 1 || m.cols < 1 || m.cell_size <= 0.0)
    throw DegenerateInput("HeightMap: empty or invalid grid");
  if (!m.contains(x, y))
    throw OutOfBounds("HeightMap: sample (" + std::to_string(x) + ", " + std::to_string(y) +
                      ") outside the map extent");
  TerrainSample s;
  s.z = detail::bilinear_z(m, x, y);
  const double h = m.cell_size;
  auto clamped = [&](double px, double py) {
    return detail::bilinear_z(m, std::clamp(px, m.origin_x, m.max_x()),
                              std::clamp(py, m.origin_y, m.max_y()));
  };
  auto slope = [&](double fwd, double bwd) {
    if (std::abs(fwd) > std::abs(bwd) + 1e-9) return fwd;
    if (std::abs(bwd) > std::abs(fwd) + 1e-9) return bwd;
    return 0.5 * (fwd + bwd);
  };
  const double fx = (clamped(x + h, y) - s.z) / h;
  const double bx = (s.z - clamped(x - h, y)) / h;
  const double fy = (clamped(x, y + h) - s.z) / h;
  const double by = (s.z - clamped(x, y - h)) / h;
  const Vec3 n(-slope(fx, bx), -slope(fy, by), 1.0);
  s.normal = n.normalized();
  return s;
}

// Text format, one line of metadata then one line per row:
//   heightmap v1 <rows> <cols> <cell_m> <origin_x> <origin_y>
//   z z z ...
inline void save_heightmap(const HeightMap& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("save_heightmap: cannot open " + path);
  out << "heightmap v1 " << m.rows << ' ' << m.cols << ' ' << detail::format_double(m.cell_size)
      << ' ' << detail::format_double(m.origin_x) << ' ' << detail::format_double(m.origin_y)
      << '\n';
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) {
      if (j) out << ' ';
      out << detail::format_double(m.at(i, j));
    }
    out << '\n';
  }
}

inline HeightMap load_heightmap(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_heightmap: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ":1: empty file");
  std::istringstream header(line);
  std::string magic, version;
  HeightMap m;
  if (!(header >> magic >> version >> m.rows >> m.cols >> m.cell_size >> m.origin_x >>
        m.origin_y) ||
      magic != "heightmap" || version != "v1")
    throw ParseError(path + ":1: expected 'heightmap v1 <rows> <cols> <cell> <ox> <oy>'");
  if (m.rows < 1 || m.cols < 1 || m.cell_size <= 0.0)
    throw ParseError(path + ":1: non-positive grid dimensions");
  m.z.resize(static_cast<std::size_t>(m.rows) * m.cols);
  for (int i = 0; i < m.rows; ++i) {
    if (!std::getline(in, line))
      throw ParseError(path + ":" + std::to_string(i + 2) + ": missing row");
    std::istringstream row(line);
    for (int j = 0; j < m.cols; ++j) {
      double v;
      if (!(row >> v))
        throw ParseError(path + ":" + std::to_string(i + 2) + ": column " + std::to_string(j + 1) +
                         ": expected elevation");
      if (!std::isfinite(v))
        throw ParseError(path + ":" + std::to_string(i + 2) + ": non-finite elevation");
      m.at(i, j) = v;
    }
    double extra;
    if (row >> extra)
      throw ParseError(path + ":" + std::to_string(i + 2) + ": row longer than " +
                       std::to_string(m.cols) + " columns");
  }
  return m;
}

inline HeightMap flat_terrain(int rows, int cols, double cell, double z = 0.0,
                              double origin_x = 0.0, double origin_y = 0.0) {
  HeightMap m;
  m.rows = rows;
  m.cols = cols;
  m.cell_size = cell;
  m.origin_x = origin_x;
  m.origin_y = origin_y;
  m.z.assign(static_cast<std::size_t>(rows) * cols, z);
  return m;
}

/// Flat ground with one raised rectangle spanning [x0, x1] x [y0, y1].
inline HeightMap pallet_terrain(double height, double x0, double x1, double y0, double y1,
                                int rows = 120, int cols = 200, double cell = 0.02,
                                double origin_x = -1.0, double origin_y = -1.2) {
  HeightMap m = flat_terrain(rows, cols, cell, 0.0, origin_x, origin_y);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double x = origin_x + j * cell;
      const double y = origin_y + i * cell;
      if (x >= x0 && x <= x1 && y >= y0 && y <= y1) m.at(i, j) = height;
    }
  }
  return m;
}

/// Rough ground of brick-sized patches with heights in [0, max_height],
/// deterministic for a given seed.
inline HeightMap brick_field_terrain(double max_height, unsigned seed, int rows = 120,
                                     int cols = 200, double cell = 0.02, double origin_x = -1.0,
                                     double origin_y = -1.2) {
  HeightMap m = flat_terrain(rows, cols, cell, 0.0, origin_x, origin_y);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, max_height);
  const int brick_i = std::max(1, static_cast<int>(std::round(0.10 / cell)));
  const int brick_j = std::max(1, static_cast<int>(std::round(0.20 / cell)));
  for (int bi = 0; bi * brick_i < rows; ++bi) {
    for (int bj = 0; bj * brick_j < cols; ++bj) {
      const double h = u(rng);
      for (int i = bi * brick_i; i < std::min(rows, (bi + 1) * brick_i); ++i)
        for (int j = bj * brick_j; j < std::min(cols, (bj + 1) * brick_j); ++j) m.at(i, j) = h;
    }
  }
  return m;
}

}  // namespace feasreg
