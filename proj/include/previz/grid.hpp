#pragma once

#include <vector>

#include "previz/core.hpp"

// Occupancy-grid helpers shared by layout, locomotion and metrics.
namespace previz::grid {

inline OccupancyGrid make_grid(Vec2 origin, double cell_size, int rows, int cols) {
  OccupancyGrid g;
  g.origin = origin;
  g.cell_size = cell_size;
  g.rows = rows;
  g.cols = cols;
  g.cells.assign(static_cast<std::size_t>(rows) * cols, 0);
  return g;
}

// Cells whose center a footprint covers. Keeps grid state and metric
// geometry coherent: a cell is occupied iff some footprint covers its center.
inline std::vector<std::pair<int, int>> covered_cells(const OccupancyGrid& g, const Obb& fp) {
  std::vector<std::pair<int, int>> out;
  Rect box = fp.aabb();
  int r0 = static_cast<int>(std::floor((box.min.y - g.origin.y) / g.cell_size));
  int r1 = static_cast<int>(std::floor((box.max.y - g.origin.y) / g.cell_size));
  int c0 = static_cast<int>(std::floor((box.min.x - g.origin.x) / g.cell_size));
  int c1 = static_cast<int>(std::floor((box.max.x - g.origin.x) / g.cell_size));
  r0 = std::max(r0, 0);
  c0 = std::max(c0, 0);
  r1 = std::min(r1, g.rows - 1);
  c1 = std::min(c1, g.cols - 1);
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c)
      if (fp.contains(g.cell_center(r, c))) out.push_back({r, c});
  return out;
}

inline void stamp(OccupancyGrid& g, const Obb& fp) {
  for (auto [r, c] : covered_cells(g, fp)) g.at(r, c) = 1;
}

inline bool all_free(const OccupancyGrid& g, const std::vector<std::pair<int, int>>& cells) {
  for (auto [r, c] : cells)
    if (g.occupied(r, c)) return false;
  return true;
}

// Marks every cell whose center lies within `radius` of an occupied cell
// center as occupied. Cells at exactly `radius` stay free, so a character
// standing at the clearance boundary keeps a navigable cell.
inline OccupancyGrid inflate_obstacles(const OccupancyGrid& g, double radius) {
  if (radius <= 0.0) return g;
  OccupancyGrid out = g;
  int reach = static_cast<int>(std::ceil(radius / g.cell_size)) + 1;
  double limit = radius * radius - 1e-9;
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      if (!g.occupied(r, c)) continue;
      for (int dr = -reach; dr <= reach; ++dr) {
        for (int dc = -reach; dc <= reach; ++dc) {
          int rr = r + dr, cc = c + dc;
          if (!out.in_range(rr, cc)) continue;
          double d2 = (dr * dr + dc * dc) * g.cell_size * g.cell_size;
          if (d2 < limit) out.at(rr, cc) = 1;
        }
      }
    }
  }
  return out;
}

// 4-connected component labels over free cells; -1 marks occupied cells.
inline std::vector<int> free_components(const OccupancyGrid& g, int* component_count = nullptr) {
  std::vector<int> label(g.cells.size(), -1);
  int next = 0;
  std::vector<std::pair<int, int>> stack;
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      if (g.occupied(r, c) || label[static_cast<std::size_t>(r) * g.cols + c] >= 0) continue;
      stack.push_back({r, c});
      label[static_cast<std::size_t>(r) * g.cols + c] = next;
      while (!stack.empty()) {
        auto [cr, cc] = stack.back();
        stack.pop_back();
        const int dr[4] = {1, -1, 0, 0};
        const int dc[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          int nr = cr + dr[k], nc = cc + dc[k];
          if (!g.in_range(nr, nc) || g.occupied(nr, nc)) continue;
          auto& l = label[static_cast<std::size_t>(nr) * g.cols + nc];
          if (l < 0) {
            l = next;
            stack.push_back({nr, nc});
          }
        }
      }
      ++next;
    }
  }
  if (component_count) *component_count = next;
  return label;
}

inline std::pair<int, int> cell_of(const OccupancyGrid& g, const Vec2& p) {
  int c = static_cast<int>(std::floor((p.x - g.origin.x) / g.cell_size));
  int r = static_cast<int>(std::floor((p.y - g.origin.y) / g.cell_size));
  r = std::clamp(r, 0, g.rows - 1);
  c = std::clamp(c, 0, g.cols - 1);
  return {r, c};
}

// Path cost over an 8-connected grid kept as exact step counts, so equal
// costs compare equal regardless of summation order.
struct GridCost {
  int straight = 0;
  int diagonal = 0;

  double value(double cell_size = 1.0) const {
    return (straight + diagonal * std::numbers::sqrt2) * cell_size;
  }
  bool operator==(const GridCost&) const = default;

  // Exact comparison of straight + diagonal*sqrt(2) without rounding.
  bool less(const GridCost& o) const {
    long long da = static_cast<long long>(straight) - o.straight;
    long long db = static_cast<long long>(diagonal) - o.diagonal;
    // sign of da + db*sqrt(2)
    if (da >= 0 && db >= 0) return false;
    if (da <= 0 && db <= 0) return da < 0 || db < 0;
    // opposite signs: compare da^2 vs 2*db^2 with the sign of da
    long long lhs = da * da;
    long long rhs = 2 * db * db;
    if (da > 0) return lhs < rhs;  // da positive, db negative
    return lhs > rhs;              // da negative, db positive
  }
};

}  // namespace previz::grid
