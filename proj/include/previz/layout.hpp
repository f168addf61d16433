#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "previz/grid.hpp"

// Scene layout: consensus filtering of scene-graph samples, hierarchical
// grid placement (anchors on the floor, non-anchors on floors or anchor
// tops), and rule-based ornament enhancement.
namespace previz::layout {

inline constexpr double kDefaultCellSize = 0.1;     // 0.6 m regions are exact 6x6 blocks
inline constexpr double kAdjacencyThreshold = 0.4;  // edge-to-edge meters

struct ConsensusConfig {
  int min_votes = 1;
  int samples = 1;
};

enum class OrnamentSurface { floor, anchor_top };

struct OrnamentRule {
  std::string label;
  OrnamentSurface allowed_surface = OrnamentSurface::floor;
  double min_clearance = 0.0;
  int max_count = 0;
};

inline std::vector<OrnamentRule> default_ornament_rules() {
  return {{"plant", OrnamentSurface::floor, 0.3, 2},
          {"lamp", OrnamentSurface::anchor_top, 0.1, 2},
          {"book", OrnamentSurface::anchor_top, 0.05, 3}};
}

inline SceneObject ornament_prototype(const std::string& label) {
  if (label == "plant") return {"", label, ObjectKind::ornament, 0.35, 0.35, 0.9, {}};
  if (label == "lamp") return {"", label, ObjectKind::ornament, 0.25, 0.25, 0.5, {}};
  if (label == "book") return {"", label, ObjectKind::ornament, 0.25, 0.18, 0.06, {}};
  return {"", label, ObjectKind::ornament, 0.3, 0.3, 0.5, {}};
}

// M = ceil(depth/cell), N = ceil(width/cell), everything free.
inline OccupancyGrid build_floor_grid(const Rect& bounds, double cell_size) {
  if (!(bounds.area() > 0.0))
    throw Error(ErrorCode::invalid_input, "build_floor_grid: degenerate bounds");
  if (!(cell_size > 0.0))
    throw Error(ErrorCode::invalid_input, "build_floor_grid: cell_size must be > 0");
  int rows = static_cast<int>(std::ceil(bounds.depth() / cell_size - 1e-12));
  int cols = static_cast<int>(std::ceil(bounds.width() / cell_size - 1e-12));
  return grid::make_grid(bounds.min, cell_size, std::max(rows, 1), std::max(cols, 1));
}

// Keeps relations seen in at least min_votes samples; objects come from the
// first sample. Opposite relations (left_of/right_of, in_front_of/behind)
// that both clear the vote bar keep the higher-vote side; an exact tie
// drops both.
inline SceneGraph scene_graph_consensus(const std::vector<SceneGraph>& samples,
                                        const ConsensusConfig& cfg) {
  if (samples.empty()) throw ValidationError("scene_graph_consensus: no samples");
  if (cfg.min_votes < 1 || cfg.min_votes > cfg.samples)
    throw ValidationError("scene_graph_consensus: require 1 <= min_votes <= samples");

  auto id_set = [](const SceneGraph& g) {
    std::set<std::string> ids;
    for (const auto& o : g.objects) ids.insert(o.id);
    return ids;
  };
  const auto base_ids = id_set(samples.front());
  for (const auto& s : samples)
    if (id_set(s) != base_ids)
      throw ValidationError("scene_graph_consensus: samples disagree on object ids");

  std::map<SceneRelation, int> votes;
  for (const auto& s : samples)
    for (const auto& r : s.relations) ++votes[r];

  auto opposite = [](Relation r) -> std::optional<Relation> {
    switch (r) {
      case Relation::left_of: return Relation::right_of;
      case Relation::right_of: return Relation::left_of;
      case Relation::in_front_of: return Relation::behind;
      case Relation::behind: return Relation::in_front_of;
      default: return std::nullopt;
    }
  };

  SceneGraph out;
  out.objects = samples.front().objects;
  for (const auto& [rel, n] : votes) {
    if (n < cfg.min_votes) continue;
    if (auto opp = opposite(rel.relation)) {
      auto it = votes.find({rel.subject, *opp, rel.object});
      if (it != votes.end() && it->second >= cfg.min_votes && it->second >= n) continue;
    }
    out.relations.push_back(rel);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Relation predicates (global top-view frame: left = smaller x, front =
// smaller y; `facing` uses the subject's front half-plane).

inline bool relation_satisfied(Relation rel, const Obb& subject, const Obb& object,
                               double adjacency_threshold = kAdjacencyThreshold) {
  switch (rel) {
    case Relation::adjacent:
      return obb_distance(subject, object) <= adjacency_threshold;
    case Relation::facing:
      return (object.center - subject.center).dot(facing_dir(subject.yaw)) > 0.0;
    case Relation::left_of:
      return subject.center.x < object.center.x;
    case Relation::right_of:
      return subject.center.x > object.center.x;
    case Relation::in_front_of:
      return subject.center.y < object.center.y;
    case Relation::behind:
      return subject.center.y > object.center.y;
    case Relation::on_top_of:
      return true;  // structural; handled by grid selection
  }
  return false;
}

namespace detail {

inline const double kQuantYaws[4] = {0.0, std::numbers::pi / 2.0, std::numbers::pi,
                                     3.0 * std::numbers::pi / 2.0};

struct Candidate {
  Pose pose;
  std::vector<std::pair<int, int>> cells;
};

// Scans cells row-major from the grid origin, yaw quantized; returns the
// feasible candidate satisfying the most relations, ties by lower (row, col)
// then yaw order. `surface` is the metric rectangle the footprint must stay
// inside (the scene bounds or an anchor top), in the grid's frame. The
// score callback may veto a candidate by returning nullopt; cell freedom
// alone cannot rule out sub-cell overlaps when dims are not whole cells, so
// callers also check metric disjointness there.
inline std::optional<Candidate> scan_placement(
    const OccupancyGrid& grid, const Rect& surface, const SceneObject& obj,
    const std::function<std::optional<int>(const Obb&)>& score_fn) {
  std::optional<Candidate> best;
  int best_score = -1;
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      for (double yaw : kQuantYaws) {
        // quantized yaws keep footprints axis-aligned in this frame
        bool swapped = std::abs(std::sin(yaw)) > 0.5;
        double x_extent = swapped ? obj.width : obj.depth;
        double y_extent = swapped ? obj.depth : obj.width;
        Vec2 min_corner{grid.origin.x + c * grid.cell_size, grid.origin.y + r * grid.cell_size};
        Vec2 center = min_corner + Vec2{x_extent * 0.5, y_extent * 0.5};
        if (min_corner.x < surface.min.x - 1e-9 || min_corner.y < surface.min.y - 1e-9 ||
            min_corner.x + x_extent > surface.max.x + 1e-9 ||
            min_corner.y + y_extent > surface.max.y + 1e-9)
          continue;
        Obb fp = Obb::from_dims(center, yaw, obj.width, obj.depth);
        auto cells = grid::covered_cells(grid, fp);
        if (cells.empty() || !grid::all_free(grid, cells)) continue;
        std::optional<int> score = score_fn ? score_fn(fp) : std::optional<int>(0);
        if (score && *score > best_score) {
          best_score = *score;
          best = Candidate{{center, yaw, 0.0}, std::move(cells)};
        }
      }
    }
  }
  return best;
}

// Metric-disjointness veto against already placed footprints at one support
// level.
inline bool overlaps_any(const Obb& fp, const std::vector<Obb>& obstacles) {
  for (const auto& other : obstacles)
    if (obb_intersects(fp, other)) return true;
  return false;
}

inline std::vector<Obb> floor_footprints(const PlacedScene& scene) {
  std::vector<Obb> out;
  for (const auto& [id, pose] : scene.poses)
    if (pose.support_height == 0.0) out.push_back(scene.footprint(id));
  return out;
}

// Footprints already sitting on an anchor's top surface, in the anchor's
// local frame.
inline std::vector<Obb> top_local_footprints(const PlacedScene& scene,
                                             const std::string& anchor_id) {
  const SceneObject* anchor = scene.scene_graph.find(anchor_id);
  const Pose& anchor_pose = scene.poses.at(anchor_id);
  double support = anchor_pose.support_height + anchor->height;
  Obb anchor_fp = Obb::from_dims(anchor_pose.position, anchor_pose.yaw, anchor->width,
                                 anchor->depth);
  std::vector<Obb> out;
  for (const auto& [id, pose] : scene.poses) {
    if (id == anchor_id || std::abs(pose.support_height - support) > 1e-9) continue;
    Vec2 local_center = anchor_fp.to_local(pose.position);
    if (std::abs(local_center.x) > anchor_fp.half_depth + 1e-9 ||
        std::abs(local_center.y) > anchor_fp.half_width + 1e-9)
      continue;  // same height but a different surface
    const SceneObject* obj = scene.scene_graph.find(id);
    out.push_back(Obb::from_dims(local_center, normalize_yaw(pose.yaw - anchor_pose.yaw),
                                 obj->width, obj->depth));
  }
  return out;
}

inline std::vector<const SceneObject*> sorted_by_area(const SceneGraph& g, ObjectKind kind) {
  std::vector<const SceneObject*> out;
  for (const auto& o : g.objects)
    if (o.kind == kind) out.push_back(&o);
  std::sort(out.begin(), out.end(), [](const SceneObject* a, const SceneObject* b) {
    if (a->footprint_area() != b->footprint_area())
      return a->footprint_area() > b->footprint_area();
    return a->id < b->id;
  });
  return out;
}

inline int score_against_placed(const SceneGraph& g, const PlacedScene& scene,
                                const std::string& id, const Obb& fp) {
  int score = 0;
  for (const auto& rel : g.relations) {
    if (rel.relation == Relation::on_top_of) continue;
    if (rel.subject == id && scene.poses.count(rel.object)) {
      if (relation_satisfied(rel.relation, fp, scene.footprint(rel.object))) ++score;
    } else if (rel.object == id && scene.poses.count(rel.subject)) {
      if (relation_satisfied(rel.relation, scene.footprint(rel.subject), fp)) ++score;
    }
  }
  return score;
}

inline OccupancyGrid init_top_grid(const SceneObject& anchor, double cell_size) {
  int cols = std::max(1, static_cast<int>(std::ceil(anchor.depth / cell_size - 1e-12)));
  int rows = std::max(1, static_cast<int>(std::ceil(anchor.width / cell_size - 1e-12)));
  return grid::make_grid({-anchor.depth * 0.5, -anchor.width * 0.5}, cell_size, rows, cols);
}

}  // namespace detail

// Places every anchor on the floor grid, largest footprint first, and gives
// each one an empty top grid in its local frame. The seed is accepted for
// interface stability; the pinned scan order is already deterministic.
// `bounds` restores the exact floor rectangle when it is not a whole number
// of cells; by default the grid span is used.
inline PlacedScene place_anchors(const SceneGraph& g, const OccupancyGrid& floor_grid,
                                 std::uint64_t seed = 0,
                                 std::optional<Rect> bounds = std::nullopt) {
  (void)seed;
  PlacedScene scene;
  scene.bounds = bounds.value_or(
      Rect{floor_grid.origin,
           {floor_grid.origin.x + floor_grid.cols * floor_grid.cell_size,
            floor_grid.origin.y + floor_grid.rows * floor_grid.cell_size}});
  scene.scene_graph = g;
  scene.floor_grid = floor_grid;

  for (const SceneObject* obj : detail::sorted_by_area(g, ObjectKind::anchor)) {
    std::vector<Obb> obstacles = detail::floor_footprints(scene);
    auto cand = detail::scan_placement(
        scene.floor_grid, scene.bounds, *obj,
        [&](const Obb& fp) -> std::optional<int> {
          if (detail::overlaps_any(fp, obstacles)) return std::nullopt;
          return detail::score_against_placed(g, scene, obj->id, fp);
        });
    if (!cand) throw PlacementInfeasible("place_anchors: no feasible cell for '" + obj->id + "'");
    scene.poses[obj->id] = cand->pose;
    for (auto [r, c] : cand->cells) scene.floor_grid.at(r, c) = 1;
    scene.top_grids[obj->id] = detail::init_top_grid(*obj, floor_grid.cell_size);
  }
  return scene;
}

// Non-anchors go onto the top grid of an `on_top_of` target when one exists,
// otherwise onto the floor honoring spatial relations.
inline PlacedScene place_non_anchors(const SceneGraph& g, const PlacedScene& placed,
                                     std::uint64_t seed = 0) {
  (void)seed;
  PlacedScene scene = placed;
  for (const SceneObject* obj : detail::sorted_by_area(g, ObjectKind::non_anchor)) {
    std::string target_anchor;
    for (const auto& rel : g.relations)
      if (rel.relation == Relation::on_top_of && rel.subject == obj->id) {
        target_anchor = rel.object;
        break;
      }

    if (!target_anchor.empty()) {
      auto grid_it = scene.top_grids.find(target_anchor);
      if (grid_it == scene.top_grids.end())
        throw PlacementInfeasible("place_non_anchors: '" + obj->id +
                                  "' targets unplaced anchor '" + target_anchor + "'");
      const SceneObject* anchor = g.find(target_anchor);
      const Pose& anchor_pose = scene.poses.at(target_anchor);
      Rect top_surface{{-anchor->depth * 0.5, -anchor->width * 0.5},
                       {anchor->depth * 0.5, anchor->width * 0.5}};
      std::vector<Obb> local_obstacles = detail::top_local_footprints(scene, target_anchor);
      auto cand = detail::scan_placement(
          grid_it->second, top_surface, *obj, [&](const Obb& fp) -> std::optional<int> {
            if (detail::overlaps_any(fp, local_obstacles)) return std::nullopt;
            return 0;
          });
      if (!cand)
        throw PlacementInfeasible("place_non_anchors: no room on top of '" + target_anchor +
                                  "' for '" + obj->id + "'");
      for (auto [r, c] : cand->cells) grid_it->second.at(r, c) = 1;
      Obb anchor_fp = scene.footprint(target_anchor);
      Pose world;
      world.position = anchor_fp.to_world(cand->pose.position);
      world.yaw = normalize_yaw(anchor_pose.yaw + cand->pose.yaw);
      world.support_height = anchor_pose.support_height + anchor->height;
      scene.poses[obj->id] = world;
    } else {
      std::vector<Obb> obstacles = detail::floor_footprints(scene);
      auto cand = detail::scan_placement(
          scene.floor_grid, scene.bounds, *obj,
          [&](const Obb& fp) -> std::optional<int> {
            if (detail::overlaps_any(fp, obstacles)) return std::nullopt;
            return detail::score_against_placed(g, scene, obj->id, fp);
          });
      if (!cand)
        throw PlacementInfeasible("place_non_anchors: no feasible cell for '" + obj->id + "'");
      scene.poses[obj->id] = cand->pose;
      for (auto [r, c] : cand->cells) scene.floor_grid.at(r, c) = 1;
    }
  }
  return scene;
}

// Adds decorative objects into free cells that satisfy their rule. Failures
// skip silently; prior poses are never moved.
inline PlacedScene enhance_ornaments(const PlacedScene& placed,
                                     const std::vector<OrnamentRule>& rules,
                                     const std::optional<std::vector<std::string>>& suggestions =
                                         std::nullopt) {
  PlacedScene scene = placed;
  std::vector<std::string> requests;
  if (suggestions) {
    requests = *suggestions;
  } else {
    for (const auto& rule : rules)
      for (int i = 0; i < rule.max_count; ++i) requests.push_back(rule.label);
  }

  std::map<std::string, int> placed_count;
  int serial = 0;
  for (const auto& label : requests) {
    const OrnamentRule* rule = nullptr;
    for (const auto& r : rules)
      if (r.label == label) {
        rule = &r;
        break;
      }
    if (!rule || placed_count[label] >= rule->max_count) continue;

    SceneObject obj = ornament_prototype(label);
    obj.id = "ornament_" + label + "_" + std::to_string(++serial);

    bool done = false;
    if (rule->allowed_surface == OrnamentSurface::floor) {
      auto cand = detail::scan_placement(
          scene.floor_grid, scene.bounds, obj, [&](const Obb& fp) -> std::optional<int> {
            for (const auto& [id, pose] : scene.poses) {
              if (pose.support_height > 0.0) continue;  // floor obstacles only
              if (obb_intersects(fp, scene.footprint(id))) return std::nullopt;
              if (obb_distance(fp, scene.footprint(id)) < rule->min_clearance)
                return std::nullopt;
            }
            return 0;
          });
      if (cand) {
        for (auto [r, c] : cand->cells) scene.floor_grid.at(r, c) = 1;
        scene.scene_graph.objects.push_back(obj);
        scene.poses[obj.id] = cand->pose;
        done = true;
      }
    } else {
      for (auto& [anchor_id, top] : scene.top_grids) {
        const SceneObject* anchor = scene.scene_graph.find(anchor_id);
        const Pose& anchor_pose = scene.poses.at(anchor_id);
        Rect top_surface{{-anchor->depth * 0.5, -anchor->width * 0.5},
                         {anchor->depth * 0.5, anchor->width * 0.5}};
        std::vector<Obb> local_obstacles = detail::top_local_footprints(scene, anchor_id);
        auto cand = detail::scan_placement(
            top, top_surface, obj, [&](const Obb& fp) -> std::optional<int> {
              for (const auto& other : local_obstacles) {
                if (obb_intersects(fp, other)) return std::nullopt;
                if (obb_distance(fp, other) < rule->min_clearance) return std::nullopt;
              }
              return 0;
            });
        if (!cand) continue;
        Obb anchor_fp = scene.footprint(anchor_id);
        double support = anchor_pose.support_height + anchor->height;
        for (auto [r, c] : cand->cells) top.at(r, c) = 1;
        scene.scene_graph.objects.push_back(obj);
        scene.poses[obj.id] = Pose{anchor_fp.to_world(cand->pose.position),
                                   normalize_yaw(anchor_pose.yaw + cand->pose.yaw), support};
        done = true;
        break;
      }
    }
    if (done) ++placed_count[label];
  }
  return scene;
}

}  // namespace previz::layout
