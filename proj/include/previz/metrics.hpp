#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "previz/camera.hpp"
#include "previz/grid.hpp"
#include "previz/regions.hpp"

// Quantitative evaluation over scenes, behaviour plans, shot plans and
// expert annotations. Every metric is a pure function returning a ratio in
// [0, 1].
namespace previz::metrics {

struct MotionAnnotation {
  int motion_id = 0;
  std::string reason;
};

struct CameraAnnotation {
  std::string type;
  std::map<std::string, std::string> specs;
  std::vector<std::string> subjects;
  std::string reason;
};

struct ClipAnnotation {
  std::map<std::string, MotionAnnotation> motions;
  std::optional<CameraAnnotation> camera;
};

struct AnnotationSet {
  std::map<behaviour::ClipRef, ClipAnnotation> clips;
};

struct MetricsReport {
  std::optional<double> object_collision_rate;
  std::optional<double> walk;
  std::optional<double> reach;
  std::optional<double> blocking_loss_norm;
  std::optional<double> motion_accuracy;
  std::optional<double> motion_diversity;
  std::optional<double> camera_collision_rate;
  std::optional<double> occlusion_rate;
  std::optional<double> camera_template_accuracy;
};

// Fraction of placed objects whose footprint overlaps at least one other.
inline double object_collision_rate(const PlacedScene& placed) {
  std::vector<std::string> ids;
  for (const auto& [id, _] : placed.poses) ids.push_back(id);
  if (ids.empty()) return 0.0;
  int colliding = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    Obb a = placed.footprint(ids[i]);
    double za0 = placed.poses.at(ids[i]).support_height;
    bool hit = false;
    for (std::size_t j = 0; j < ids.size() && !hit; ++j) {
      if (i == j) continue;
      // objects on different support levels do not collide in plan view
      if (std::abs(placed.poses.at(ids[j]).support_height - za0) > 1e-9) continue;
      hit = obb_intersects(a, placed.footprint(ids[j]));
    }
    colliding += hit;
  }
  return static_cast<double>(colliding) / ids.size();
}

// walk: cells of the largest free component (after obstacle inflation by the
// character radius) over all floor cells. reach: fraction of anchors with at
// least one cell of that component within 0.5 m of their footprint; 1.0 when
// there are no anchors.
inline std::pair<double, double> walkability(const PlacedScene& placed,
                                             double character_radius = 0.3) {
  OccupancyGrid inflated = grid::inflate_obstacles(placed.floor_grid, character_radius);
  int component_count = 0;
  std::vector<int> labels = grid::free_components(inflated, &component_count);

  std::vector<int> sizes(component_count, 0);
  for (int l : labels)
    if (l >= 0) ++sizes[l];
  int largest = -1, largest_size = 0;
  for (int i = 0; i < component_count; ++i)
    if (sizes[i] > largest_size) {
      largest_size = sizes[i];
      largest = i;
    }
  double walk = static_cast<double>(largest_size) / inflated.cells.size();

  std::vector<std::string> anchors;
  for (const auto& obj : placed.scene_graph.objects)
    if (obj.kind == ObjectKind::anchor && placed.poses.count(obj.id)) anchors.push_back(obj.id);
  if (anchors.empty()) return {walk, 1.0};

  int reached = 0;
  for (const auto& id : anchors) {
    Obb fp = placed.footprint(id);
    bool ok = false;
    for (int r = 0; r < inflated.rows && !ok; ++r)
      for (int c = 0; c < inflated.cols && !ok; ++c) {
        if (labels[static_cast<std::size_t>(r) * inflated.cols + c] != largest) continue;
        if (fp.distance(inflated.cell_center(r, c)) <= 0.5) ok = true;
      }
    reached += ok;
  }
  return {walk, static_cast<double>(reached) / anchors.size()};
}

// Mean region loss over standing poses, normalized to [0, 1] by the loss
// range across all candidate regions of the scene.
inline double blocking_loss_norm(const std::vector<Behaviour>& behaviours,
                                 const PlacedScene& placed, const regions::RegionLossParams& p,
                                 const std::array<regions::VisibilityCamera, 4>& cams) {
  auto candidates = regions::enumerate_candidates(placed, p);
  if (candidates.empty()) throw NoCandidates("blocking_loss_norm: scene has no candidate regions");

  double lmin = std::numeric_limits<double>::infinity();
  double lmax = -std::numeric_limits<double>::infinity();
  for (const auto& cand : candidates) {
    double l = regions::region_loss(cand, p, placed, cams);
    lmin = std::min(lmin, l);
    lmax = std::max(lmax, l);
  }

  std::vector<Vec2> poses;
  for (const auto& b : behaviours) {
    if (b.start_state == BodyState::standing) poses.push_back(b.start_pos);
    if (b.end_state == BodyState::standing) poses.push_back(b.end_pos);
  }
  if (poses.empty()) throw NoCandidates("blocking_loss_norm: no standing poses");

  double range = lmax - lmin;
  double sum = 0.0;
  for (const auto& pos : poses) {
    double l = regions::region_loss_terms(placed.bounds.inner_distance(pos),
                                          regions::nearest_obstacle_distance(pos, placed),
                                          regions::mean_visibility(pos, cams, placed), p);
    double norm = range > 0.0 ? (l - lmin) / range : 0.0;
    sum += std::clamp(norm, 0.0, 1.0);
  }
  return sum / poses.size();
}

// Exact-id match fraction over the (clip, character) pairs the annotations
// cover.
inline double motion_accuracy(const behaviour::BehaviourPlan& plan,
                              const AnnotationSet& annotations) {
  int total = 0, hits = 0;
  for (const auto& [ref, ann] : annotations.clips) {
    if (ann.motions.empty()) continue;
    auto clip_it = plan.motions.find(ref);
    if (clip_it == plan.motions.end())
      throw Error(ErrorCode::invalid_input, "motion_accuracy: annotation for clip not in plan");
    for (const auto& [name, m] : ann.motions) {
      auto it = clip_it->second.find(name);
      if (it == clip_it->second.end())
        throw Error(ErrorCode::invalid_input,
                    "motion_accuracy: annotation for absent character '" + name + "'");
      ++total;
      hits += (it->second == m.motion_id);
    }
  }
  if (total == 0)
    throw Error(ErrorCode::invalid_input, "motion_accuracy: no annotated motions");
  return static_cast<double>(hits) / total;
}

// Normalized Shannon entropy of the motion-id distribution; 0 by convention
// when only one distinct motion appears.
inline double motion_diversity(const behaviour::BehaviourPlan& plan) {
  std::map<int, int> counts;
  int total = 0;
  for (const auto& [ref, motions] : plan.motions)
    for (const auto& [name, id] : motions) {
      ++counts[id];
      ++total;
    }
  if (total == 0)
    throw Error(ErrorCode::invalid_input, "motion_diversity: plan has no motion assignments");
  if (counts.size() <= 1) return 0.0;
  double h = 0.0;
  for (const auto& [id, n] : counts) {
    double p = static_cast<double>(n) / total;
    h -= p * std::log2(p);
  }
  return h / std::log2(static_cast<double>(counts.size()));
}

// Fraction of shot plans whose track enters any inflated object box.
inline double camera_collision_rate(const std::vector<camera::ShotPlan>& plans,
                                    const PlacedScene& placed,
                                    const camera::CameraConfig& cfg = {}) {
  if (plans.empty()) return 0.0;
  int colliding = 0;
  for (const auto& plan : plans) {
    bool hit = false;
    for (const auto& sample : plan.track.samples) {
      for (const auto& [id, pose] : placed.poses) {
        if (camera::detail::point_in_inflated_box(sample.position, placed.solid(id),
                                                  cfg.collision_inflation)) {
          hit = true;
          break;
        }
      }
      if (hit) break;
    }
    colliding += hit;
  }
  return static_cast<double>(colliding) / plans.size();
}

// Fraction of all track samples where any subject's visibility drops below
// v_min.
inline double occlusion_rate(const std::vector<camera::ShotPlan>& plans,
                             const behaviour::BehaviourPlan& behaviours,
                             const PlacedScene& placed, const camera::CameraConfig& cfg = {}) {
  int total = 0, occluded = 0;
  for (const auto& plan : plans) {
    auto it = behaviours.behaviours.find(plan.clip);
    if (it == behaviours.behaviours.end()) continue;
    double duration = plan.track.samples.empty() ? 0.0 : plan.track.samples.back().t;
    for (const auto& sample : plan.track.samples) {
      ++total;
      double u = duration > 0.0 ? sample.t / duration : 0.0;
      for (const auto& name : plan.params.subjects) {
        auto b = it->second.find(name);
        if (b == it->second.end()) continue;
        Vec2 base = b->second.start_pos + (b->second.end_pos - b->second.start_pos) * u;
        if (camera::detail::subject_visibility(base, sample.position, placed) < cfg.v_min) {
          ++occluded;
          break;
        }
      }
    }
  }
  return total > 0 ? static_cast<double>(occluded) / total : 0.0;
}

// Fraction of annotated clips whose planned template type matches the
// annotation; spec_strict additionally requires every annotated spec enum to
// match the plan parameters.
inline double camera_template_accuracy(const std::vector<camera::ShotPlan>& plans,
                                       const AnnotationSet& annotations,
                                       bool spec_strict = false) {
  std::map<behaviour::ClipRef, const camera::ShotPlan*> by_clip;
  for (const auto& plan : plans) by_clip[plan.clip] = &plan;

  int total = 0, hits = 0;
  for (const auto& [ref, ann] : annotations.clips) {
    if (!ann.camera) continue;
    auto it = by_clip.find(ref);
    if (it == by_clip.end())
      throw Error(ErrorCode::invalid_input,
                  "camera_template_accuracy: annotation for clip not in plans");
    ++total;
    bool match = std::string(camera::to_string(it->second->type)) == ann.camera->type;
    if (match && spec_strict) {
      camera::json params = camera::shot_params_to_json(it->second->params);
      for (const auto& [key, value] : ann.camera->specs) {
        if (!params.contains(key) || params.at(key).get<std::string>() != value) {
          match = false;
          break;
        }
      }
    }
    hits += match;
  }
  if (total == 0)
    throw Error(ErrorCode::invalid_input, "camera_template_accuracy: no annotated cameras");
  return static_cast<double>(hits) / total;
}

}  // namespace previz::metrics
