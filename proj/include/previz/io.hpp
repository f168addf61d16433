#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "previz/camera.hpp"
#include "previz/layout.hpp"
#include "previz/metrics.hpp"

// Schema-versioned JSON artifacts. Every file is a self-describing document
// {"schema_version": 1, "kind": "...", ...}; unknown versions and kinds are
// rejected. Serialization is deterministic: object keys are emitted sorted
// and doubles use shortest round-trip formatting, so identical values yield
// identical bytes.
namespace previz::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Primitives

inline json vec2_to_json(const Vec2& v) { return json::array({v.x, v.y}); }
inline Vec2 vec2_from_json(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

inline json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
inline Vec3 vec3_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

inline json rect_to_json(const Rect& r) {
  return {{"min", vec2_to_json(r.min)}, {"max", vec2_to_json(r.max)}};
}
inline Rect rect_from_json(const json& j) {
  return {vec2_from_json(j.at("min")), vec2_from_json(j.at("max"))};
}

inline json grid_to_json(const OccupancyGrid& g) {
  json rows = json::array();
  for (int r = 0; r < g.rows; ++r) {
    std::string row(g.cols, '0');
    for (int c = 0; c < g.cols; ++c)
      if (g.occupied(r, c)) row[c] = '1';
    rows.push_back(row);
  }
  return {{"origin", vec2_to_json(g.origin)},
          {"cell_size", g.cell_size},
          {"rows", g.rows},
          {"cols", g.cols},
          {"cells", rows}};
}

inline OccupancyGrid grid_from_json(const json& j) {
  OccupancyGrid g;
  g.origin = vec2_from_json(j.at("origin"));
  g.cell_size = j.at("cell_size").get<double>();
  g.rows = j.at("rows").get<int>();
  g.cols = j.at("cols").get<int>();
  g.cells.assign(static_cast<std::size_t>(g.rows) * g.cols, 0);
  const json& rows = j.at("cells");
  for (int r = 0; r < g.rows; ++r) {
    const std::string row = rows.at(r).get<std::string>();
    for (int c = 0; c < g.cols; ++c) g.at(r, c) = row.at(c) == '1' ? 1 : 0;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Screenplay

inline json screenplay_to_json(const Screenplay& s) {
  json profiles = json::array();
  for (const auto& p : s.profiles)
    profiles.push_back({{"name", p.name},
                        {"age", p.age},
                        {"gender", to_string(p.gender)},
                        {"occupation", p.occupation},
                        {"traits", p.traits},
                        {"speaking_style", p.speaking_style}});
  json acts = json::array();
  for (const auto& a : s.acts) {
    json clips = json::array();
    for (const auto& c : a.clips) {
      json lines = json::array();
      for (const auto& l : c.lines) lines.push_back({{"speaker", l.speaker}, {"text", l.text}});
      clips.push_back({{"index", c.index}, {"lines", lines}, {"duration", c.duration_s}});
    }
    acts.push_back({{"index", a.index},
                    {"sub_topic", a.sub_topic},
                    {"participants", a.participants},
                    {"scene_description", a.scene_description},
                    {"plot", a.plot},
                    {"dialogue_goal", a.dialogue_goal},
                    {"clips", clips}});
  }
  return {{"idea", s.idea}, {"profiles", profiles}, {"acts", acts}};
}

inline Screenplay screenplay_from_json(const json& j) {
  Screenplay s;
  s.idea = j.at("idea").get<std::string>();
  for (const auto& p : j.at("profiles")) {
    CharacterProfile profile;
    profile.name = p.at("name").get<std::string>();
    profile.age = p.at("age").get<int>();
    std::string g = p.at("gender").get<std::string>();
    profile.gender = g == "female" ? Gender::female : g == "male" ? Gender::male : Gender::other;
    profile.occupation = p.at("occupation").get<std::string>();
    profile.traits = p.at("traits").get<std::string>();
    profile.speaking_style = p.at("speaking_style").get<std::string>();
    s.profiles.push_back(std::move(profile));
  }
  for (const auto& a : j.at("acts")) {
    Act act;
    act.index = a.at("index").get<int>();
    act.sub_topic = a.at("sub_topic").get<std::string>();
    for (const auto& name : a.at("participants")) act.participants.push_back(name);
    act.scene_description = a.at("scene_description").get<std::string>();
    act.plot = a.at("plot").get<std::string>();
    act.dialogue_goal = a.at("dialogue_goal").get<std::string>();
    for (const auto& c : a.at("clips")) {
      Clip clip;
      clip.index = c.at("index").get<int>();
      for (const auto& l : c.at("lines"))
        clip.lines.push_back(
            {l.at("speaker").get<std::string>(), l.at("text").get<std::string>()});
      clip.duration_s = c.at("duration").get<double>();
      act.clips.push_back(std::move(clip));
    }
    s.acts.push_back(std::move(act));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Scene graph

inline json scene_graph_to_json(const SceneGraph& g) {
  json objects = json::array();
  for (const auto& o : g.objects) {
    json obj{{"id", o.id},
             {"label", o.label},
             {"kind", to_string(o.kind)},
             {"dims", json::array({o.width, o.depth, o.height})}};
    if (o.sittable) obj["sittable"] = *o.sittable;
    objects.push_back(obj);
  }
  json relations = json::array();
  for (const auto& r : g.relations)
    relations.push_back(
        {{"subject", r.subject}, {"relation", to_string(r.relation)}, {"object", r.object}});
  return {{"objects", objects}, {"relations", relations}};
}

inline Relation relation_from_string(const std::string& s) {
  static const std::map<std::string, Relation> table = {
      {"adjacent", Relation::adjacent},       {"on_top_of", Relation::on_top_of},
      {"facing", Relation::facing},           {"left_of", Relation::left_of},
      {"right_of", Relation::right_of},       {"in_front_of", Relation::in_front_of},
      {"behind", Relation::behind}};
  auto it = table.find(s);
  if (it == table.end()) throw ParseError("relation", "unknown relation '" + s + "'");
  return it->second;
}

inline SceneGraph scene_graph_from_json(const json& j) {
  SceneGraph g;
  for (const auto& o : j.at("objects")) {
    SceneObject obj;
    obj.id = o.at("id").get<std::string>();
    obj.label = o.at("label").get<std::string>();
    std::string kind = o.at("kind").get<std::string>();
    if (kind == "anchor") obj.kind = ObjectKind::anchor;
    else if (kind == "non_anchor") obj.kind = ObjectKind::non_anchor;
    else if (kind == "ornament") obj.kind = ObjectKind::ornament;
    else throw ParseError("objects.kind", "unknown kind '" + kind + "'");
    obj.width = o.at("dims").at(0).get<double>();
    obj.depth = o.at("dims").at(1).get<double>();
    obj.height = o.at("dims").at(2).get<double>();
    if (o.contains("sittable")) obj.sittable = o.at("sittable").get<bool>();
    g.objects.push_back(std::move(obj));
  }
  for (const auto& r : j.at("relations"))
    g.relations.push_back({r.at("subject").get<std::string>(),
                           relation_from_string(r.at("relation").get<std::string>()),
                           r.at("object").get<std::string>()});
  return g;
}

// ---------------------------------------------------------------------------
// Placed scene

inline json placed_scene_to_json(const PlacedScene& s) {
  json poses = json::object();
  for (const auto& [id, pose] : s.poses)
    poses[id] = {{"position", vec2_to_json(pose.position)},
                 {"yaw", pose.yaw},
                 {"support_height", pose.support_height}};
  json tops = json::object();
  for (const auto& [id, g] : s.top_grids) tops[id] = grid_to_json(g);
  return {{"bounds", rect_to_json(s.bounds)},
          {"scene_graph", scene_graph_to_json(s.scene_graph)},
          {"poses", poses},
          {"floor_grid", grid_to_json(s.floor_grid)},
          {"top_grids", tops}};
}

inline PlacedScene placed_scene_from_json(const json& j) {
  PlacedScene s;
  s.bounds = rect_from_json(j.at("bounds"));
  s.scene_graph = scene_graph_from_json(j.at("scene_graph"));
  for (const auto& [id, p] : j.at("poses").items())
    s.poses[id] = {vec2_from_json(p.at("position")), p.at("yaw").get<double>(),
                   p.at("support_height").get<double>()};
  s.floor_grid = grid_from_json(j.at("floor_grid"));
  for (const auto& [id, g] : j.at("top_grids").items()) s.top_grids[id] = grid_from_json(g);
  return s;
}

// ---------------------------------------------------------------------------
// Functional map

inline json functional_map_to_json(const regions::FunctionalMap& fm) {
  json regions_json = json::array();
  for (const auto& [parcel, sr] : fm.standing_regions)
    regions_json.push_back({{"parcel", json::array({parcel.row, parcel.col})},
                            {"center", vec2_to_json(sr.region.center)},
                            {"size", sr.region.size},
                            {"origin_cell", json::array({sr.region.origin_row,
                                                         sr.region.origin_col})},
                            {"loss", sr.loss}});
  json seats = json::array();
  for (const auto& s : fm.sittable_spots)
    seats.push_back(
        {{"object_id", s.object_id}, {"seat", vec2_to_json(s.seat)}, {"yaw", s.seat_yaw}});
  return {{"standing_regions", regions_json}, {"sittable_spots", seats}};
}

inline regions::FunctionalMap functional_map_from_json(const json& j) {
  regions::FunctionalMap fm;
  for (const auto& r : j.at("standing_regions")) {
    regions::ParcelIndex parcel{r.at("parcel").at(0).get<int>(), r.at("parcel").at(1).get<int>()};
    regions::CandidateRegion region;
    region.center = vec2_from_json(r.at("center"));
    region.size = r.at("size").get<double>();
    region.parcel = parcel;
    region.origin_row = r.at("origin_cell").at(0).get<int>();
    region.origin_col = r.at("origin_cell").at(1).get<int>();
    fm.standing_regions[parcel] = {region, r.at("loss").get<double>()};
  }
  for (const auto& s : j.at("sittable_spots"))
    fm.sittable_spots.push_back({s.at("object_id").get<std::string>(),
                                 vec2_from_json(s.at("seat")), s.at("yaw").get<double>()});
  return fm;
}

// ---------------------------------------------------------------------------
// Behaviour plan

inline json behaviour_to_json(const Behaviour& b) {
  return {{"character", b.character},
          {"start_state", to_string(b.start_state)},
          {"end_state", to_string(b.end_state)},
          {"start_pos", vec2_to_json(b.start_pos)},
          {"end_pos", vec2_to_json(b.end_pos)},
          {"start_facing", b.start_facing},
          {"end_facing", b.end_facing}};
}

inline Behaviour behaviour_from_json(const json& j) {
  Behaviour b;
  b.character = j.at("character").get<std::string>();
  b.start_state =
      j.at("start_state").get<std::string>() == "sitting" ? BodyState::sitting : BodyState::standing;
  b.end_state =
      j.at("end_state").get<std::string>() == "sitting" ? BodyState::sitting : BodyState::standing;
  b.start_pos = vec2_from_json(j.at("start_pos"));
  b.end_pos = vec2_from_json(j.at("end_pos"));
  b.start_facing = j.at("start_facing").get<double>();
  b.end_facing = j.at("end_facing").get<double>();
  return b;
}

inline json behaviour_plan_to_json(const behaviour::BehaviourPlan& plan) {
  json clips = json::array();
  for (const auto& [ref, behaviours] : plan.behaviours) {
    json entry{{"act", ref.act_index}, {"clip", ref.clip_index}};
    json b = json::object();
    for (const auto& [name, beh] : behaviours) b[name] = behaviour_to_json(beh);
    entry["behaviours"] = b;
    json m = json::object();
    if (plan.motions.count(ref))
      for (const auto& [name, id] : plan.motions.at(ref)) m[name] = id;
    entry["motions"] = m;
    json p = json::object();
    if (plan.paths.count(ref))
      for (const auto& [name, path] : plan.paths.at(ref)) {
        json points = json::array();
        for (const auto& w : path) points.push_back(vec2_to_json(w));
        p[name] = points;
      }
    entry["paths"] = p;
    entry["best_effort"] = plan.best_effort.count(ref) > 0;
    clips.push_back(std::move(entry));
  }
  return {{"clips", clips}};
}

inline behaviour::BehaviourPlan behaviour_plan_from_json(const json& j) {
  behaviour::BehaviourPlan plan;
  for (const auto& entry : j.at("clips")) {
    behaviour::ClipRef ref{entry.at("act").get<int>(), entry.at("clip").get<int>()};
    for (const auto& [name, b] : entry.at("behaviours").items())
      plan.behaviours[ref][name] = behaviour_from_json(b);
    for (const auto& [name, id] : entry.at("motions").items())
      plan.motions[ref][name] = id.get<int>();
    for (const auto& [name, points] : entry.at("paths").items()) {
      std::vector<Vec2> path;
      for (const auto& w : points) path.push_back(vec2_from_json(w));
      plan.paths[ref][name] = std::move(path);
    }
    if (entry.value("best_effort", false)) plan.best_effort.insert(ref);
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Shot plans

inline json shot_plan_to_json(const camera::ShotPlan& plan) {
  json samples = json::array();
  for (const auto& s : plan.track.samples)
    samples.push_back({{"t", s.t},
                       {"position", vec3_to_json(s.position)},
                       {"look_at", vec3_to_json(s.look_at)},
                       {"vertical_fov", s.vertical_fov}});
  json report{{"collision", plan.report.collision},
              {"occlusion_ratio", plan.report.occlusion_ratio},
              {"framing_ok", plan.report.framing_ok},
              {"passed", plan.report.passed}};
  if (plan.report.first_collision_sample)
    report["first_collision_sample"] = *plan.report.first_collision_sample;
  return {{"act", plan.clip.act_index},
          {"clip", plan.clip.clip_index},
          {"type", camera::to_string(plan.type)},
          {"params", camera::shot_params_to_json(plan.params)},
          {"track", samples},
          {"report", report},
          {"rationale", plan.rationale},
          {"fallback_unsafe", plan.fallback_unsafe}};
}

inline camera::ShotPlan shot_plan_from_json(const json& j) {
  camera::ShotPlan plan;
  plan.clip = {j.at("act").get<int>(), j.at("clip").get<int>()};
  auto type = camera::enum_from_string<camera::TemplateType>(j.at("type").get<std::string>());
  if (!type) throw ParseError("type", "unknown camera template");
  plan.type = *type;

  const json& params = j.at("params");
  for (const auto& s : params.at("subjects")) plan.params.subjects.push_back(s);
  auto opt = [&](const char* key) -> std::optional<std::string> {
    if (params.contains(key)) return params.at(key).get<std::string>();
    return std::nullopt;
  };
  if (auto v = opt("relation")) plan.params.relation = camera::enum_from_string<camera::RelationParam>(*v);
  if (auto v = opt("framing")) plan.params.framing = camera::enum_from_string<camera::Framing>(*v);
  if (auto v = opt("shot_size")) plan.params.shot_size = camera::enum_from_string<camera::ShotSize>(*v);
  if (auto v = opt("angle")) plan.params.angle = camera::enum_from_string<camera::Angle>(*v);
  if (auto v = opt("start_elev")) plan.params.start_elev = camera::enum_from_string<camera::Angle>(*v);
  if (auto v = opt("end_elev")) plan.params.end_elev = camera::enum_from_string<camera::Angle>(*v);
  if (auto v = opt("ease")) plan.params.ease = camera::enum_from_string<camera::Ease>(*v);

  for (const auto& s : j.at("track"))
    plan.track.samples.push_back({s.at("t").get<double>(), vec3_from_json(s.at("position")),
                                  vec3_from_json(s.at("look_at")),
                                  s.at("vertical_fov").get<double>()});
  const json& report = j.at("report");
  plan.report.collision = report.at("collision").get<bool>();
  if (report.contains("first_collision_sample"))
    plan.report.first_collision_sample = report.at("first_collision_sample").get<int>();
  plan.report.occlusion_ratio = report.at("occlusion_ratio").get<double>();
  plan.report.framing_ok = report.at("framing_ok").get<bool>();
  plan.report.passed = report.at("passed").get<bool>();
  plan.rationale = j.at("rationale").get<std::string>();
  plan.fallback_unsafe = j.value("fallback_unsafe", false);
  return plan;
}

// ---------------------------------------------------------------------------
// Annotations

inline json annotations_to_json(const metrics::AnnotationSet& set) {
  json clips = json::array();
  for (const auto& [ref, ann] : set.clips) {
    json motions = json::object();
    for (const auto& [name, m] : ann.motions)
      motions[name] = {{"motion_id", m.motion_id}, {"reason", m.reason}};
    json entry{{"act", ref.act_index}, {"clip", ref.clip_index}, {"motions", motions}};
    if (ann.camera)
      entry["camera"] = {{"type", ann.camera->type},
                         {"specs", ann.camera->specs},
                         {"subjects", ann.camera->subjects},
                         {"reason", ann.camera->reason}};
    clips.push_back(std::move(entry));
  }
  return {{"clips", clips}};
}

inline metrics::AnnotationSet annotations_from_json(const json& j) {
  metrics::AnnotationSet set;
  for (const auto& entry : j.at("clips")) {
    behaviour::ClipRef ref{entry.at("act").get<int>(), entry.at("clip").get<int>()};
    metrics::ClipAnnotation ann;
    for (const auto& [name, m] : entry.at("motions").items())
      ann.motions[name] = {m.at("motion_id").get<int>(), m.value("reason", "")};
    if (entry.contains("camera")) {
      metrics::CameraAnnotation cam;
      cam.type = entry.at("camera").at("type").get<std::string>();
      for (const auto& [k, v] : entry.at("camera").at("specs").items())
        cam.specs[k] = v.get<std::string>();
      for (const auto& s : entry.at("camera").at("subjects")) cam.subjects.push_back(s);
      cam.reason = entry.at("camera").value("reason", "");
      ann.camera = std::move(cam);
    }
    set.clips[ref] = std::move(ann);
  }
  return set;
}

// ---------------------------------------------------------------------------
// Metrics report

inline json metrics_report_to_json(const metrics::MetricsReport& r) {
  json out = json::object();
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) out[key] = *v;
  };
  put("object_collision_rate", r.object_collision_rate);
  put("walk", r.walk);
  put("reach", r.reach);
  put("blocking_loss_norm", r.blocking_loss_norm);
  put("motion_accuracy", r.motion_accuracy);
  put("motion_diversity", r.motion_diversity);
  put("camera_collision_rate", r.camera_collision_rate);
  put("occlusion_rate", r.occlusion_rate);
  put("camera_template_accuracy", r.camera_template_accuracy);
  return out;
}

inline metrics::MetricsReport metrics_report_from_json(const json& j) {
  metrics::MetricsReport r;
  auto get = [&](const char* key) -> std::optional<double> {
    if (j.contains(key)) return j.at(key).get<double>();
    return std::nullopt;
  };
  r.object_collision_rate = get("object_collision_rate");
  r.walk = get("walk");
  r.reach = get("reach");
  r.blocking_loss_norm = get("blocking_loss_norm");
  r.motion_accuracy = get("motion_accuracy");
  r.motion_diversity = get("motion_diversity");
  r.camera_collision_rate = get("camera_collision_rate");
  r.occlusion_rate = get("occlusion_rate");
  r.camera_template_accuracy = get("camera_template_accuracy");
  return r;
}

// ---------------------------------------------------------------------------
// Motion catalog

inline json motion_catalog_to_json(const MotionCatalog& catalog) {
  json entries = json::array();
  for (const auto& [id, e] : catalog.entries) {
    json states = json::array();
    for (auto s : e.state_compat) states.push_back(to_string(s));
    entries.push_back({{"id", id}, {"name", e.name}, {"state_compat", states}, {"tags", e.tags}});
  }
  return {{"entries", entries}};
}

inline MotionCatalog motion_catalog_from_json(const json& j) {
  MotionCatalog catalog;
  for (const auto& e : j.at("entries")) {
    MotionEntry entry;
    entry.name = e.at("name").get<std::string>();
    for (const auto& s : e.at("state_compat"))
      entry.state_compat.insert(s.get<std::string>() == "sitting" ? BodyState::sitting
                                                                  : BodyState::standing);
    entry.tags = e.value("tags", "");
    if (entry.state_compat.empty())
      throw ParseError("state_compat", "motion entry must list at least one state");
    int id = e.at("id").get<int>();
    if (catalog.entries.count(id)) throw ParseError("entries", "duplicate motion id");
    catalog.entries[id] = std::move(entry);
  }
  return catalog;
}

// ---------------------------------------------------------------------------
// File envelope

inline json wrap(const std::string& kind, json payload) {
  payload["schema_version"] = kSchemaVersion;
  payload["kind"] = kind;
  return payload;
}

inline json unwrap(const json& doc, const std::string& kind) {
  if (!doc.contains("schema_version"))
    throw ParseError(kind, "missing schema_version");
  if (doc.at("schema_version").get<int>() != kSchemaVersion)
    throw ParseError(kind, "unsupported schema_version " +
                               doc.at("schema_version").dump());
  if (doc.value("kind", "") != kind)
    throw ParseError(kind, "expected kind '" + kind + "', found '" + doc.value("kind", "") + "'");
  return doc;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::internal, "cannot write " + path.string());
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::invalid_input, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void save_document(const std::filesystem::path& path, const std::string& kind,
                          json payload) {
  write_text(path, wrap(kind, std::move(payload)).dump(2) + "\n");
}

inline json load_document(const std::filesystem::path& path, const std::string& kind) {
  json doc = json::parse(read_text(path), nullptr, false);
  if (doc.is_discarded()) throw ParseError(path.string(), "not valid JSON");
  return unwrap(doc, kind);
}

}  // namespace previz::io
