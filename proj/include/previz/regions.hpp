#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "previz/grid.hpp"

// Performing-region optimization. Candidate standing squares are scored by a
// collision loss (exponential falloff with distance to the floor boundary and
// to the nearest obstacle footprint) plus a camera-visibility loss (capped
// mean visibility from four corner cameras raised to a penalty exponent); the
// best candidate below threshold is kept per 1 m parcel.
namespace previz::regions {

struct RegionLossParams {
  double w_b = 1.0;
  double w_o = 1.0;
  double w_c = 1.0;
  double sigma_b = 0.5;   // meters
  double sigma_o = 0.3;   // meters
  double s_max = 0.9;     // visibility cap, ratio in (0,1]
  double alpha_cam = 2.0; // visibility penalty exponent
  double tau = 0.5;       // loss threshold
  double region_size = 0.6;
  double parcel_size = 1.0;
};

struct ParcelIndex {
  int row = 0;
  int col = 0;
  auto operator<=>(const ParcelIndex&) const = default;
};

struct CandidateRegion {
  Vec2 center;
  double size = 0.6;
  ParcelIndex parcel;
  int origin_row = 0;  // grid cell of the region's min corner; tie-break key
  int origin_col = 0;

  bool operator==(const CandidateRegion&) const = default;
};

struct VisibilityCamera {
  Vec3 position;
  Vec3 look_at;
};

// Vertical sample heights of the character proxy used for visibility rays.
inline constexpr std::array<double, 5> kProxyHeights = {0.2, 0.6, 1.0, 1.4, 1.7};

struct SittableSpot {
  std::string object_id;
  Vec2 seat;
  double seat_yaw = 0.0;

  bool operator==(const SittableSpot&) const = default;
};

struct ScoredRegion {
  CandidateRegion region;
  double loss = 0.0;

  bool operator==(const ScoredRegion&) const = default;
};

struct FunctionalMap {
  std::map<ParcelIndex, ScoredRegion> standing_regions;
  std::vector<SittableSpot> sittable_spots;
};

// Four cameras at the floor corners, 2.2 m up, aimed at the centroid 1.2 m up.
inline std::array<VisibilityCamera, 4> default_visibility_cameras(const Rect& bounds) {
  Vec3 target{bounds.center().x, bounds.center().y, 1.2};
  return {VisibilityCamera{{bounds.min.x, bounds.min.y, 2.2}, target},
          VisibilityCamera{{bounds.max.x, bounds.min.y, 2.2}, target},
          VisibilityCamera{{bounds.min.x, bounds.max.y, 2.2}, target},
          VisibilityCamera{{bounds.max.x, bounds.max.y, 2.2}, target}};
}

// Every obstacle-free region_size square, at cell granularity, tagged with
// the parcel containing its center. Parcels tile from the bounds origin.
inline std::vector<CandidateRegion> enumerate_candidates(const PlacedScene& placed,
                                                         const RegionLossParams& p) {
  const OccupancyGrid& g = placed.floor_grid;
  double cells_f = p.region_size / g.cell_size;
  int side = static_cast<int>(std::llround(cells_f));
  if (std::abs(cells_f - side) > 1e-9 || side < 1)
    throw Error(ErrorCode::invalid_input,
                "enumerate_candidates: region_size must be a whole number of cells");

  // running column sums let each window check cost O(side)
  std::vector<CandidateRegion> out;
  for (int r = 0; r + side <= g.rows; ++r) {
    for (int c = 0; c + side <= g.cols; ++c) {
      bool free = true;
      for (int dr = 0; dr < side && free; ++dr)
        for (int dc = 0; dc < side; ++dc)
          if (g.occupied(r + dr, c + dc)) {
            free = false;
            break;
          }
      if (!free) continue;
      Vec2 min_corner{g.origin.x + c * g.cell_size, g.origin.y + r * g.cell_size};
      Vec2 center = min_corner + Vec2{p.region_size * 0.5, p.region_size * 0.5};
      if (min_corner.x + p.region_size > placed.bounds.max.x + 1e-9 ||
          min_corner.y + p.region_size > placed.bounds.max.y + 1e-9)
        continue;
      ParcelIndex parcel{
          static_cast<int>(std::floor((center.y - placed.bounds.min.y) / p.parcel_size)),
          static_cast<int>(std::floor((center.x - placed.bounds.min.x) / p.parcel_size))};
      out.push_back({center, p.region_size, parcel, r, c});
    }
  }
  return out;
}

// Fraction of character-proxy sample points whose segment to the camera
// clears every placed object box.
inline double visibility_ratio(const Vec2& c, const VisibilityCamera& cam,
                               const PlacedScene& placed) {
  int clear = 0;
  for (double h : kProxyHeights) {
    Vec3 p{c.x, c.y, h};
    bool blocked = false;
    for (const auto& [id, pose] : placed.poses) {
      if (placed.solid(id).intersects_segment(p, cam.position)) {
        blocked = true;
        break;
      }
    }
    if (!blocked) ++clear;
  }
  return static_cast<double>(clear) / kProxyHeights.size();
}

// The loss arithmetic alone, on precomputed distances and mean visibility.
inline double region_loss_terms(double d_boundary, double d_obstacle, double mean_visibility,
                                const RegionLossParams& p) {
  double l_coll = p.w_b * std::exp(-d_boundary / p.sigma_b) +
                  p.w_o * std::exp(-d_obstacle / p.sigma_o);
  double l_cam = p.w_c * std::pow(1.0 - std::min(mean_visibility, p.s_max), p.alpha_cam);
  return l_coll + l_cam;
}

inline double nearest_obstacle_distance(const Vec2& c, const PlacedScene& placed) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [id, pose] : placed.poses)
    best = std::min(best, placed.footprint(id).distance(c));
  return best;
}

inline double mean_visibility(const Vec2& c, const std::array<VisibilityCamera, 4>& cams,
                              const PlacedScene& placed) {
  double sum = 0.0;
  for (const auto& cam : cams) sum += visibility_ratio(c, cam, placed);
  return sum / 4.0;
}

inline double region_loss(const CandidateRegion& r, const RegionLossParams& p,
                          const PlacedScene& placed, const std::array<VisibilityCamera, 4>& cams) {
  double d_b = placed.bounds.inner_distance(r.center);
  double d_o = nearest_obstacle_distance(r.center, placed);
  double s_bar = mean_visibility(r.center, cams, placed);
  return region_loss_terms(d_b, d_o, s_bar, p);
}

// Per-parcel argmin over candidates with loss below tau. Ties break toward
// the lower (row, col) region origin, which the row-major enumeration order
// provides for free.
inline std::map<ParcelIndex, ScoredRegion> select_performing_regions(
    const PlacedScene& placed, const RegionLossParams& p,
    const std::array<VisibilityCamera, 4>& cams) {
  std::map<ParcelIndex, ScoredRegion> best;
  for (const auto& cand : enumerate_candidates(placed, p)) {
    double loss = region_loss(cand, p, placed, cams);
    if (!(loss < p.tau)) continue;
    auto it = best.find(cand.parcel);
    if (it == best.end() || loss < it->second.loss) best[cand.parcel] = {cand, loss};
  }
  return best;
}

inline const std::vector<std::string>& sittable_keywords() {
  static const std::vector<std::string> kw = {"chair", "armchair", "sofa",  "couch",   "stool",
                                              "bench", "seat",     "settee", "ottoman", "recliner"};
  return kw;
}

inline bool label_sittable(const std::string& label) {
  std::string lower;
  lower.reserve(label.size());
  for (char ch : label) lower.push_back(static_cast<char>(std::tolower(ch)));
  for (const auto& kw : sittable_keywords())
    if (lower.find(kw) != std::string::npos) return true;
  return false;
}

// Marks sittable objects (hints win over the keyword table) and derives one
// seat per object: the midpoint of the front footprint edge, facing outward.
inline std::pair<PlacedScene, std::vector<SittableSpot>> infer_sittable(
    const PlacedScene& placed,
    const std::optional<std::map<std::string, bool>>& hints = std::nullopt) {
  PlacedScene scene = placed;
  std::vector<SittableSpot> spots;
  for (auto& obj : scene.scene_graph.objects) {
    bool sit;
    if (hints && hints->count(obj.id)) {
      sit = hints->at(obj.id);
    } else if (obj.sittable.has_value()) {
      sit = *obj.sittable;
    } else {
      sit = label_sittable(obj.label);
    }
    obj.sittable = sit;
    if (!sit || !scene.poses.count(obj.id)) continue;
    const Pose& pose = scene.poses.at(obj.id);
    Vec2 seat = pose.position + facing_dir(pose.yaw) * (obj.depth * 0.5);
    spots.push_back({obj.id, seat, pose.yaw});
  }
  return {scene, spots};
}

inline FunctionalMap build_functional_map(const std::map<ParcelIndex, ScoredRegion>& regions,
                                          const std::vector<SittableSpot>& spots,
                                          const RegionLossParams& p) {
  for (const auto& [parcel, sr] : regions)
    if (!(sr.loss < p.tau))
      throw Error(ErrorCode::internal, "build_functional_map: region at or above threshold");
  return FunctionalMap{regions, spots};
}

}  // namespace previz::regions
