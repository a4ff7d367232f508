// reachnav - safe navigation among non-convex obstacles
//
// Copyright (c) 2026 reachnav contributors
// SPDX-License-Identifier: MIT

#pragma once

/// \file grid.hpp
/// \brief Occupancy grids and the morphology substrate: exact squared
///        Euclidean distance transforms, disk dilation/erosion/closing,
///        connected components, and contour extraction.
///
/// Distances are computed between cell centers in cell units; squared
/// distances are integer-valued and exact in double precision.  Each mask
/// carries an outside convention: beyond the grid border the world counts as
/// occupied (bounded workspaces, where the workspace complement extends to
/// infinity) or free (unbounded workspaces).

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "reachnav/geometry.hpp"

namespace reachnav {

// ---------------------------------------------------------------------------
// GridMask
// ---------------------------------------------------------------------------

/// Rasterized occupancy bitmask.  origin is the world position of the lower
/// left corner of cell (0,0); cell centers sit at origin + res*(i+1/2, j+1/2).
struct GridMask {
  Point2 origin{0.0, 0.0};
  double resolution = 1.0;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // row-major, 1 = occupied
  bool outside_occupied = false;   // value the bits function takes beyond the
                                   // border (true: the set extends outward)
  bool resolution_warning = false; // set when features are under-resolved

  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * width + ix;
  }
  bool contains(int ix, int iy) const {
    return ix >= 0 && ix < width && iy >= 0 && iy < height;
  }
  bool at(int ix, int iy) const { return bits[index(ix, iy)] != 0; }
  void set(int ix, int iy, bool v) {
    bits[index(ix, iy)] = v ? 1 : 0;
  }
  Point2 cell_center(int ix, int iy) const {
    return {origin.x + resolution * (ix + 0.5),
            origin.y + resolution * (iy + 0.5)};
  }
  /// Cell containing the world point (floor semantics).
  std::pair<int, int> cell_of(Point2 p) const {
    return {static_cast<int>(std::floor((p.x - origin.x) / resolution)),
            static_cast<int>(std::floor((p.y - origin.y) / resolution))};
  }
  static GridMask make(Point2 origin, double resolution, int w, int h,
                       bool outside_occupied) {
    GridMask m;
    m.origin = origin;
    m.resolution = resolution;
    m.width = w;
    m.height = h;
    m.bits.assign(static_cast<std::size_t>(w) * h, 0);
    m.outside_occupied = outside_occupied;
    return m;
  }
};

inline bool operator==(const GridMask& a, const GridMask& b) {
  return a.width == b.width && a.height == b.height &&
         a.resolution == b.resolution && a.origin == b.origin &&
         a.outside_occupied == b.outside_occupied && a.bits == b.bits;
}

// ---------------------------------------------------------------------------
// Squared Euclidean distance transform
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr double kEdtInf = 1e30;

/// 1D squared distance transform (lower envelope of parabolas).
inline void edt_1d(const std::vector<double>& f, std::vector<double>& d,
                   std::vector<int>& v, std::vector<double>& z, int n) {
  int k = 0;
  v[0] = 0;
  z[0] = -kEdtInf;
  z[1] = kEdtInf;
  for (int q = 1; q < n; ++q) {
    double s;
    for (;;) {
      s = ((f[q] + q * static_cast<double>(q)) -
           (f[v[k]] + v[k] * static_cast<double>(v[k]))) /
          (2.0 * (q - v[k]));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kEdtInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - static_cast<double>(v[k]);
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace detail

/// Squared distance (cell units, between cell centers) from every cell to the
/// nearest site cell.  Sites are occupied cells when to_occupied, free cells
/// otherwise.  Virtual cells beyond the border count as sites whenever the
/// mask's outside convention matches the site kind, contributing the exact
/// perpendicular center-to-center distances.
inline std::vector<double> squared_edt(const GridMask& m, bool to_occupied) {
  const int w = m.width, h = m.height;
  std::vector<double> g(static_cast<std::size_t>(w) * h);
  // Column pass.
  {
    std::vector<double> f(h), d(h);
    std::vector<int> v(h);
    std::vector<double> z(h + 1);
    for (int ix = 0; ix < w; ++ix) {
      for (int iy = 0; iy < h; ++iy) {
        const bool site = (m.at(ix, iy) == to_occupied);
        f[iy] = site ? 0.0 : detail::kEdtInf;
      }
      detail::edt_1d(f, d, v, z, h);
      for (int iy = 0; iy < h; ++iy) g[m.index(ix, iy)] = d[iy];
    }
  }
  // Row pass.
  std::vector<double> out(static_cast<std::size_t>(w) * h);
  {
    std::vector<double> f(w), d(w);
    std::vector<int> v(w);
    std::vector<double> z(w + 1);
    for (int iy = 0; iy < h; ++iy) {
      for (int ix = 0; ix < w; ++ix) f[ix] = g[m.index(ix, iy)];
      detail::edt_1d(f, d, v, z, w);
      for (int ix = 0; ix < w; ++ix) out[m.index(ix, iy)] = d[ix];
    }
  }
  // Border clamp: virtual site cells beyond every edge of the grid.
  const bool outside_is_site = (m.outside_occupied == to_occupied);
  if (outside_is_site) {
    for (int iy = 0; iy < h; ++iy) {
      for (int ix = 0; ix < w; ++ix) {
        const double dx = std::min(ix + 1, w - ix);
        const double dy = std::min(iy + 1, h - iy);
        const double border = std::min(dx * dx, dy * dy);
        double& cell = out[m.index(ix, iy)];
        cell = std::min(cell, border);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Disk morphology
// ---------------------------------------------------------------------------

/// Minkowski dilation by the discrete disk of the given radius (meters):
/// a cell is occupied iff some occupied cell center lies within the radius.
inline GridMask dilate_disk(const GridMask& mask, double radius) {
  if (radius < 0.0) throw std::domain_error("dilate_disk: negative radius");
  GridMask out = mask;
  const double t = (radius / mask.resolution) * (radius / mask.resolution);
  const auto d2 = squared_edt(mask, /*to_occupied=*/true);
  for (std::size_t i = 0; i < out.bits.size(); ++i) {
    out.bits[i] = (d2[i] <= t) ? 1 : 0;
  }
  return out;
}

/// Minkowski erosion by the same disk: a cell stays occupied iff no free cell
/// center (including virtual outside cells under the mask's convention) lies
/// within the radius.
inline GridMask erode_disk(const GridMask& mask, double radius) {
  if (radius < 0.0) throw std::domain_error("erode_disk: negative radius");
  GridMask out = mask;
  const double t = (radius / mask.resolution) * (radius / mask.resolution);
  const auto d2 = squared_edt(mask, /*to_occupied=*/false);
  for (std::size_t i = 0; i < out.bits.size(); ++i) {
    out.bits[i] = (d2[i] > t) ? 1 : 0;
  }
  return out;
}

/// Morphological closing: dilation followed by erosion with the same disk.
/// On masks whose outside is free, the grid is padded internally so the
/// dilation can spill past the border before eroding back; the result is
/// cropped to the input frame.  This keeps the closing exact (extensive and
/// idempotent) for occupied content anywhere on the grid.
inline GridMask closing(const GridMask& mask, double alpha) {
  if (alpha < 0.0) throw std::domain_error("closing: negative alpha");
  if (mask.outside_occupied || alpha == 0.0) {
    return erode_disk(dilate_disk(mask, alpha), alpha);
  }
  const int pad =
      static_cast<int>(std::ceil(alpha / mask.resolution)) + 1;
  GridMask padded = GridMask::make(
      {mask.origin.x - pad * mask.resolution,
       mask.origin.y - pad * mask.resolution},
      mask.resolution, mask.width + 2 * pad, mask.height + 2 * pad, false);
  for (int iy = 0; iy < mask.height; ++iy) {
    for (int ix = 0; ix < mask.width; ++ix) {
      padded.set(ix + pad, iy + pad, mask.at(ix, iy));
    }
  }
  const GridMask closed_padded = erode_disk(dilate_disk(padded, alpha), alpha);
  GridMask out = mask;
  for (int iy = 0; iy < mask.height; ++iy) {
    for (int ix = 0; ix < mask.width; ++ix) {
      out.set(ix, iy, closed_padded.at(ix + pad, iy + pad));
    }
  }
  return out;
}

/// Set complement: flips every bit and the outside convention.
inline GridMask complement_mask(const GridMask& mask) {
  GridMask out = mask;
  for (auto& b : out.bits) b = b ? 0 : 1;
  out.outside_occupied = !mask.outside_occupied;
  return out;
}

/// Free space for a robot center with reach y: the complement of the
/// y-dilated occupied set.  In the result 1 marks membership in the free
/// space (it is a set mask, not an occupancy mask; outside_occupied then
/// tells whether the free set extends beyond the border).
inline GridMask free_space(const GridMask& mask, double y) {
  if (y < 0.0) throw std::domain_error("free_space: negative radius");
  return complement_mask(dilate_disk(mask, y));
}

// ---------------------------------------------------------------------------
// Connected components
// ---------------------------------------------------------------------------

/// Labels connected components of cells whose bit equals `value`.
/// Returns (labels, count); labels are 0-based, -1 elsewhere.
/// connectivity must be 4 or 8.
inline std::pair<std::vector<int>, int> label_components(const GridMask& m,
                                                         bool value,
                                                         int connectivity) {
  if (connectivity != 4 && connectivity != 8) {
    throw std::domain_error("label_components: connectivity must be 4 or 8");
  }
  std::vector<int> labels(m.bits.size(), -1);
  int count = 0;
  std::vector<std::pair<int, int>> stack;
  const int dx4[] = {1, -1, 0, 0};
  const int dy4[] = {0, 0, 1, -1};
  const int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1};
  const int dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
  const int* dx = (connectivity == 4) ? dx4 : dx8;
  const int* dy = (connectivity == 4) ? dy4 : dy8;
  for (int iy = 0; iy < m.height; ++iy) {
    for (int ix = 0; ix < m.width; ++ix) {
      if (m.at(ix, iy) != value || labels[m.index(ix, iy)] >= 0) continue;
      const int id = count++;
      stack.clear();
      stack.emplace_back(ix, iy);
      labels[m.index(ix, iy)] = id;
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        for (int k = 0; k < connectivity; ++k) {
          const int nx = cx + dx[k], ny = cy + dy[k];
          if (!m.contains(nx, ny)) continue;
          if (m.at(nx, ny) != value) continue;
          if (labels[m.index(nx, ny)] >= 0) continue;
          labels[m.index(nx, ny)] = id;
          stack.emplace_back(nx, ny);
        }
      }
    }
  }
  return {std::move(labels), count};
}

// ---------------------------------------------------------------------------
// Contour extraction (marching squares)
// ---------------------------------------------------------------------------

/// An open or closed polyline in world coordinates.
struct Polyline {
  std::vector<Point2> pts;
  bool closed = false;
};

namespace detail {

/// Marching squares over the cell-center lattice.  `inside` decides whether
/// a cell (by index) belongs to the traced set; cells beyond the border take
/// the value `outside_value`.  Returns closed loops in world coordinates,
/// collinear runs merged.  Saddle squares are resolved so that the traced
/// (occupied) set stays 4-connected.
template <typename InsideFn>
std::vector<Polyline> marching_squares(const GridMask& m, InsideFn inside,
                                       bool outside_value) {
  using Key = long long;
  const auto key = [&m](int kx, int ky) -> Key {
    // Keys are doubled lattice coordinates, offset to stay positive.
    return (static_cast<long long>(ky + 4)) * (2LL * m.width + 8) + (kx + 4);
  };
  struct Seg {
    int ax, ay, bx, by;  // doubled lattice coordinates of edge midpoints
  };
  std::vector<Seg> segs;
  const auto value_at = [&](int ix, int iy) -> bool {
    if (!m.contains(ix, iy)) return outside_value;
    return inside(ix, iy);
  };
  // Lattice squares span centers (i,j)..(i+1,j+1) for i,j in [-1, w/h).
  for (int j = -1; j < m.height; ++j) {
    for (int i = -1; i < m.width; ++i) {
      const bool b0 = value_at(i, j);          // lower-left
      const bool b1 = value_at(i + 1, j);      // lower-right
      const bool b2 = value_at(i + 1, j + 1);  // upper-right
      const bool b3 = value_at(i, j + 1);      // upper-left
      const int code = (b0 ? 1 : 0) | (b1 ? 2 : 0) | (b2 ? 4 : 0) | (b3 ? 8 : 0);
      if (code == 0 || code == 15) continue;
      // Edge midpoints in doubled lattice coordinates.
      const int Bx = 2 * i + 1, By = 2 * j;          // bottom
      const int Rx = 2 * i + 2, Ry = 2 * j + 1;      // right
      const int Tx = 2 * i + 1, Ty = 2 * j + 2;      // top
      const int Lx = 2 * i, Ly = 2 * j + 1;          // left
      const auto add = [&segs](int ax, int ay, int bx, int by) {
        segs.push_back({ax, ay, bx, by});
      };
      switch (code) {
        case 1: add(Lx, Ly, Bx, By); break;
        case 2: add(Bx, By, Rx, Ry); break;
        case 4: add(Rx, Ry, Tx, Ty); break;
        case 8: add(Tx, Ty, Lx, Ly); break;
        case 3: add(Lx, Ly, Rx, Ry); break;
        case 6: add(Bx, By, Tx, Ty); break;
        case 12: add(Rx, Ry, Lx, Ly); break;
        case 9: add(Tx, Ty, Bx, By); break;
        case 7: add(Lx, Ly, Tx, Ty); break;
        case 11: add(Tx, Ty, Rx, Ry); break;
        case 13: add(Rx, Ry, Bx, By); break;
        case 14: add(Bx, By, Lx, Ly); break;
        case 5:  // diagonal ll+ur: keep occupied 4-disconnected
          add(Lx, Ly, Bx, By);
          add(Rx, Ry, Tx, Ty);
          break;
        case 10:  // diagonal lr+ul
          add(Bx, By, Rx, Ry);
          add(Tx, Ty, Lx, Ly);
          break;
        default: break;
      }
    }
  }
  // Stitch segments into closed loops (every midpoint has degree 2).
  std::map<Key, std::vector<int>> at_point;
  for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
    at_point[key(segs[s].ax, segs[s].ay)].push_back(s);
    at_point[key(segs[s].bx, segs[s].by)].push_back(s);
  }
  std::vector<bool> used(segs.size(), false);
  std::vector<Polyline> loops;
  for (int s0 = 0; s0 < static_cast<int>(segs.size()); ++s0) {
    if (used[s0]) continue;
    std::vector<std::pair<int, int>> chain;
    int cur = s0;
    int px = segs[s0].ax, py = segs[s0].ay;
    chain.emplace_back(px, py);
    for (;;) {
      used[cur] = true;
      const int nx = (segs[cur].ax == px && segs[cur].ay == py) ? segs[cur].bx
                                                                : segs[cur].ax;
      const int ny = (segs[cur].ax == px && segs[cur].ay == py) ? segs[cur].by
                                                                : segs[cur].ay;
      px = nx;
      py = ny;
      if (px == chain.front().first && py == chain.front().second) break;
      chain.emplace_back(px, py);
      int next = -1;
      for (int cand : at_point[key(px, py)]) {
        if (!used[cand]) {
          next = cand;
          break;
        }
      }
      if (next < 0) break;  // open chain (should not happen on padded grids)
      cur = next;
    }
    // Merge collinear runs and convert to world coordinates.  Doubled
    // lattice coordinate k maps to origin + res*(k/2 + 1/2+...): lattice
    // coordinate u relates to world by p = origin + res*(u + 0.5).
    Polyline loop;
    loop.closed = true;
    const int n = static_cast<int>(chain.size());
    for (int i = 0; i < n; ++i) {
      const auto [ax, ay] = chain[(i + n - 1) % n];
      const auto [bx, by] = chain[i];
      const auto [cx, cy] = chain[(i + 1) % n];
      const long long crossv = static_cast<long long>(bx - ax) * (cy - by) -
                               static_cast<long long>(by - ay) * (cx - bx);
      if (crossv == 0) continue;  // collinear: skip middle vertex
      loop.pts.push_back({m.origin.x + m.resolution * (bx / 2.0 + 0.5),
                          m.origin.y + m.resolution * (by / 2.0 + 0.5)});
    }
    if (loop.pts.size() >= 3) loops.push_back(std::move(loop));
  }
  return loops;
}

}  // namespace detail

/// Extracts the boundary contours of the occupied set as closed loops in
/// world coordinates.
inline std::vector<Polyline> extract_contours(const GridMask& m) {
  return detail::marching_squares(
      m, [&m](int ix, int iy) { return m.at(ix, iy); }, m.outside_occupied);
}

}  // namespace reachnav
