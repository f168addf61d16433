#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "previz/geometry.hpp"

// Shared domain types. Everything here is a plain value; operations are pure.
namespace previz {

// ---------------------------------------------------------------------------
// Screenplay

enum class Gender { female, male, other };

struct CharacterProfile {
  std::string name;
  int age = 0;
  Gender gender = Gender::other;
  std::string occupation;
  std::string traits;
  std::string speaking_style;

  bool operator==(const CharacterProfile&) const = default;
};

struct DialogueLine {
  std::string speaker;
  std::string text;
  bool operator==(const DialogueLine&) const = default;
};

// Duration defaults to 2 s per dialogue line when the author gives none.
inline constexpr double kSecondsPerLine = 2.0;

struct Clip {
  int index = 0;
  std::vector<DialogueLine> lines;
  double duration_s = 0.0;

  bool operator==(const Clip&) const = default;
};

struct Act {
  int index = 0;
  std::string sub_topic;
  std::vector<std::string> participants;
  std::string scene_description;
  std::string plot;
  std::string dialogue_goal;
  std::vector<Clip> clips;

  bool operator==(const Act&) const = default;
};

struct Screenplay {
  std::string idea;
  std::vector<CharacterProfile> profiles;
  std::vector<Act> acts;

  bool operator==(const Screenplay&) const = default;
};

// ---------------------------------------------------------------------------
// Scene graph

enum class Relation { adjacent, on_top_of, facing, left_of, right_of, in_front_of, behind };

enum class ObjectKind { anchor, non_anchor, ornament };

struct SceneObject {
  std::string id;
  std::string label;
  ObjectKind kind = ObjectKind::non_anchor;
  double width = 0.0;   // extent perpendicular to facing
  double depth = 0.0;   // extent along facing
  double height = 0.0;
  std::optional<bool> sittable;

  double footprint_area() const { return width * depth; }
  bool operator==(const SceneObject&) const = default;
};

struct SceneRelation {
  std::string subject;
  Relation relation = Relation::adjacent;
  std::string object;

  auto operator<=>(const SceneRelation&) const = default;
};

struct SceneGraph {
  std::vector<SceneObject> objects;
  std::vector<SceneRelation> relations;

  const SceneObject* find(const std::string& id) const {
    for (const auto& o : objects)
      if (o.id == id) return &o;
    return nullptr;
  }
  bool operator==(const SceneGraph&) const = default;
};

// ---------------------------------------------------------------------------
// Occupancy grid and placed scene

struct OccupancyGrid {
  Vec2 origin;
  double cell_size = 0.1;
  int rows = 0;  // along y
  int cols = 0;  // along x
  std::vector<std::uint8_t> cells;  // row-major, 0 free / 1 occupied

  bool in_range(int r, int c) const { return r >= 0 && r < rows && c >= 0 && c < cols; }
  std::uint8_t& at(int r, int c) { return cells[static_cast<std::size_t>(r) * cols + c]; }
  std::uint8_t at(int r, int c) const { return cells[static_cast<std::size_t>(r) * cols + c]; }
  bool occupied(int r, int c) const { return at(r, c) != 0; }
  Vec2 cell_center(int r, int c) const {
    return {origin.x + (c + 0.5) * cell_size, origin.y + (r + 0.5) * cell_size};
  }
  int free_count() const {
    int n = 0;
    for (auto v : cells) n += (v == 0);
    return n;
  }
  bool operator==(const OccupancyGrid&) const = default;
};

struct Pose {
  Vec2 position;
  double yaw = 0.0;
  double support_height = 0.0;  // z of the supporting surface

  bool operator==(const Pose&) const = default;
};

struct PlacedScene {
  Rect bounds;
  SceneGraph scene_graph;
  std::map<std::string, Pose> poses;
  OccupancyGrid floor_grid;
  std::map<std::string, OccupancyGrid> top_grids;  // keyed by anchor id; local frame

  Obb footprint(const std::string& id) const {
    const SceneObject* obj = scene_graph.find(id);
    const Pose& pose = poses.at(id);
    return Obb::from_dims(pose.position, pose.yaw, obj->width, obj->depth);
  }
  Box3 solid(const std::string& id) const {
    const SceneObject* obj = scene_graph.find(id);
    const Pose& pose = poses.at(id);
    return {footprint(id), pose.support_height, pose.support_height + obj->height};
  }
};

// ---------------------------------------------------------------------------
// Behaviour and motion

enum class BodyState { standing, sitting };

struct Behaviour {
  std::string character;
  BodyState start_state = BodyState::standing;
  BodyState end_state = BodyState::standing;
  Vec2 start_pos;
  Vec2 end_pos;
  double start_facing = 0.0;
  double end_facing = 0.0;

  bool operator==(const Behaviour&) const = default;
};

struct MotionEntry {
  std::string name;
  std::set<BodyState> state_compat;
  std::string tags;

  bool operator==(const MotionEntry&) const = default;
};

struct MotionCatalog {
  std::map<int, MotionEntry> entries;

  bool operator==(const MotionCatalog&) const = default;
};

// ---------------------------------------------------------------------------
// Violations

struct Violation {
  std::string field;
  std::string rule;
  std::string detail;

  bool operator==(const Violation&) const = default;
};

// Structural checks. Violations are data, not errors.
inline std::vector<Violation> validate_screenplay(const Screenplay& s) {
  std::vector<Violation> out;
  std::set<std::string> profile_names;
  for (const auto& p : s.profiles) {
    if (!profile_names.insert(p.name).second)
      out.push_back({"profiles", "unique_name", "duplicate profile name '" + p.name + "'"});
    if (p.age <= 0)
      out.push_back({"profiles", "positive_age", "profile '" + p.name + "' has non-positive age"});
  }
  int expected_index = 1;
  for (const auto& act : s.acts) {
    std::string act_tag = "acts[" + std::to_string(act.index) + "]";
    if (act.index != expected_index)
      out.push_back({act_tag, "contiguous_index",
                     "expected act index " + std::to_string(expected_index)});
    ++expected_index;
    if (act.participants.empty())
      out.push_back({act_tag + ".participants", "nonempty", "act has no participants"});
    std::set<std::string> participants(act.participants.begin(), act.participants.end());
    for (const auto& name : act.participants)
      if (!profile_names.count(name))
        out.push_back({act_tag + ".participants", "declared_character",
                       "participant '" + name + "' has no profile"});
    for (const auto& clip : act.clips) {
      std::string clip_tag = act_tag + ".clips[" + std::to_string(clip.index) + "]";
      if (clip.lines.empty())
        out.push_back({clip_tag + ".lines", "nonempty", "clip has no dialogue lines"});
      if (!(clip.duration_s > 0.0) || !std::isfinite(clip.duration_s))
        out.push_back({clip_tag + ".duration", "positive_finite", "clip duration must be > 0"});
      for (const auto& line : clip.lines)
        if (!participants.count(line.speaker))
          out.push_back({clip_tag + ".lines", "speaker_participates",
                         "speaker '" + line.speaker + "' is not a participant"});
    }
  }
  return out;
}

inline std::vector<Violation> validate_scene_graph(const SceneGraph& g) {
  std::vector<Violation> out;
  std::set<std::string> ids;
  for (const auto& o : g.objects) {
    if (!ids.insert(o.id).second)
      out.push_back({"objects", "unique_id", "duplicate object id '" + o.id + "'"});
    if (!(o.width > 0.0 && o.depth > 0.0 && o.height > 0.0))
      out.push_back({"objects", "positive_dims", "object '" + o.id + "' has non-positive dims"});
  }
  for (const auto& r : g.relations) {
    const SceneObject* subj = g.find(r.subject);
    const SceneObject* obj = g.find(r.object);
    if (!subj)
      out.push_back({"relations", "endpoint_exists", "unknown subject id '" + r.subject + "'"});
    if (!obj)
      out.push_back({"relations", "endpoint_exists", "unknown object id '" + r.object + "'"});
    if (subj && obj && r.subject == r.object)
      out.push_back({"relations", "distinct_endpoints",
                     "relation endpoints are both '" + r.subject + "'"});
    if (r.relation == Relation::on_top_of && obj && obj->kind != ObjectKind::anchor)
      out.push_back({"relations", "on_top_of_anchor",
                     "on_top_of target '" + r.object + "' is not an anchor"});
  }
  return out;
}

inline const char* to_string(Relation r) {
  switch (r) {
    case Relation::adjacent: return "adjacent";
    case Relation::on_top_of: return "on_top_of";
    case Relation::facing: return "facing";
    case Relation::left_of: return "left_of";
    case Relation::right_of: return "right_of";
    case Relation::in_front_of: return "in_front_of";
    case Relation::behind: return "behind";
  }
  return "?";
}

inline const char* to_string(BodyState s) {
  return s == BodyState::standing ? "standing" : "sitting";
}

inline const char* to_string(ObjectKind k) {
  switch (k) {
    case ObjectKind::anchor: return "anchor";
    case ObjectKind::non_anchor: return "non_anchor";
    case ObjectKind::ornament: return "ornament";
  }
  return "?";
}

inline const char* to_string(Gender g) {
  switch (g) {
    case Gender::female: return "female";
    case Gender::male: return "male";
    case Gender::other: return "other";
  }
  return "?";
}

}  // namespace previz
