#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "previz/agents.hpp"
#include "previz/behaviour.hpp"
#include "previz/regions.hpp"

// Camera planning: a parameterized template registry, deterministic track
// expansion, geometric validation (collision, occlusion, framing) and the
// debate-judge-validation shot loop with a repair ladder.
namespace previz::camera {

using agents::json;

// ---------------------------------------------------------------------------
// Template registry

enum class TemplateType {
  // single-person
  single_static, single_profile, single_back, pedestal, dolly, orbit, pan, tilt,
  push_in, pull_out, crane, zoom,
  // two-person
  two_static, two_ots, two_profile, two_apex, two_orbit, two_push_in, two_pull_out, two_pan,
  // group
  group_static,
};

enum class Arity { single, pair, group };
enum class RelationParam { equal, dominant_a, dominant_b, intimate, distant };
enum class Framing { two_shot, ots_pair, profile_duet, split_depth };
enum class ShotSize { cu, mcu, ms, mls, ls };
enum class Angle { low, eye, high, top };
enum class Ease { linear, ease_in, ease_out, ease_in_out };

inline const char* to_string(TemplateType t) {
  switch (t) {
    case TemplateType::single_static: return "single_static";
    case TemplateType::single_profile: return "single_profile";
    case TemplateType::single_back: return "single_back";
    case TemplateType::pedestal: return "pedestal";
    case TemplateType::dolly: return "dolly";
    case TemplateType::orbit: return "orbit";
    case TemplateType::pan: return "pan";
    case TemplateType::tilt: return "tilt";
    case TemplateType::push_in: return "push_in";
    case TemplateType::pull_out: return "pull_out";
    case TemplateType::crane: return "crane";
    case TemplateType::zoom: return "zoom";
    case TemplateType::two_static: return "two_static";
    case TemplateType::two_ots: return "two_ots";
    case TemplateType::two_profile: return "two_profile";
    case TemplateType::two_apex: return "two_apex";
    case TemplateType::two_orbit: return "two_orbit";
    case TemplateType::two_push_in: return "two_push_in";
    case TemplateType::two_pull_out: return "two_pull_out";
    case TemplateType::two_pan: return "two_pan";
    case TemplateType::group_static: return "group_static";
  }
  return "?";
}

inline const char* to_string(RelationParam r) {
  switch (r) {
    case RelationParam::equal: return "equal";
    case RelationParam::dominant_a: return "dominant_A";
    case RelationParam::dominant_b: return "dominant_B";
    case RelationParam::intimate: return "intimate";
    case RelationParam::distant: return "distant";
  }
  return "?";
}

inline const char* to_string(Framing f) {
  switch (f) {
    case Framing::two_shot: return "two_shot";
    case Framing::ots_pair: return "OTS_pair";
    case Framing::profile_duet: return "profile_duet";
    case Framing::split_depth: return "split_depth";
  }
  return "?";
}

inline const char* to_string(ShotSize s) {
  switch (s) {
    case ShotSize::cu: return "CU";
    case ShotSize::mcu: return "MCU";
    case ShotSize::ms: return "MS";
    case ShotSize::mls: return "MLS";
    case ShotSize::ls: return "LS";
  }
  return "?";
}

inline const char* to_string(Angle a) {
  switch (a) {
    case Angle::low: return "low";
    case Angle::eye: return "eye";
    case Angle::high: return "high";
    case Angle::top: return "top";
  }
  return "?";
}

inline const char* to_string(Ease e) {
  switch (e) {
    case Ease::linear: return "linear";
    case Ease::ease_in: return "ease_in";
    case Ease::ease_out: return "ease_out";
    case Ease::ease_in_out: return "ease_in_out";
  }
  return "?";
}

template <typename Enum>
std::optional<Enum> enum_from_string(const std::string&);

template <>
inline std::optional<TemplateType> enum_from_string<TemplateType>(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(TemplateType::group_static); ++i)
    if (s == to_string(static_cast<TemplateType>(i))) return static_cast<TemplateType>(i);
  return std::nullopt;
}

#define PREVIZ_ENUM_FROM_STRING(Enum, last)                                        \
  template <>                                                                      \
  inline std::optional<Enum> enum_from_string<Enum>(const std::string& s) {        \
    for (int i = 0; i <= static_cast<int>(Enum::last); ++i)                        \
      if (s == to_string(static_cast<Enum>(i))) return static_cast<Enum>(i);       \
    return std::nullopt;                                                           \
  }

PREVIZ_ENUM_FROM_STRING(RelationParam, distant)
PREVIZ_ENUM_FROM_STRING(Framing, split_depth)
PREVIZ_ENUM_FROM_STRING(ShotSize, ls)
PREVIZ_ENUM_FROM_STRING(Angle, top)
PREVIZ_ENUM_FROM_STRING(Ease, ease_in_out)
#undef PREVIZ_ENUM_FROM_STRING

struct TemplateSpec {
  TemplateType type = TemplateType::single_static;
  Arity arity = Arity::single;
  bool dynamic = false;
  // parameter name -> allowed values (empty entry means the parameter is not
  // accepted by this template); all listed parameters are required
  std::map<std::string, std::vector<std::string>> param_schema;
  bool conventional = true;  // filled-in entry, not a published schema
};

namespace detail {

inline std::vector<std::string> all_relations() {
  return {"equal", "dominant_A", "dominant_B", "intimate", "distant"};
}
inline std::vector<std::string> all_framings() {
  return {"two_shot", "OTS_pair", "profile_duet", "split_depth"};
}
inline std::vector<std::string> all_sizes() { return {"CU", "MCU", "MS", "MLS", "LS"}; }
inline std::vector<std::string> all_angles() { return {"low", "eye", "high", "top"}; }
inline std::vector<std::string> all_eases() {
  return {"linear", "ease_in", "ease_out", "ease_in_out"};
}

}  // namespace detail

// 12 single-person, 8 two-person and 1 group template. two_static and
// pedestal carry the published schemas; the rest are conventional defaults.
inline const std::vector<TemplateSpec>& default_registry() {
  static const std::vector<TemplateSpec> reg = [] {
    using detail::all_angles;
    using detail::all_eases;
    using detail::all_framings;
    using detail::all_relations;
    using detail::all_sizes;
    std::vector<TemplateSpec> r;
    auto static_schema = [] {
      return std::map<std::string, std::vector<std::string>>{{"shot_size", detail::all_sizes()},
                                                             {"angle", detail::all_angles()}};
    };
    auto move_schema = [] {
      return std::map<std::string, std::vector<std::string>>{{"shot_size", detail::all_sizes()},
                                                             {"angle", detail::all_angles()},
                                                             {"ease", detail::all_eases()}};
    };
    auto elev_schema = [] {
      return std::map<std::string, std::vector<std::string>>{
          {"shot_size", detail::all_sizes()},
          {"start_elev", detail::all_angles()},
          {"end_elev", detail::all_angles()},
          {"ease", detail::all_eases()}};
    };
    r.push_back({TemplateType::single_static, Arity::single, false, static_schema(), true});
    r.push_back({TemplateType::single_profile, Arity::single, false, static_schema(), true});
    r.push_back({TemplateType::single_back, Arity::single, false, static_schema(), true});
    r.push_back({TemplateType::pedestal, Arity::single, true,
                 {{"start_elev", all_angles()}, {"end_elev", all_angles()}, {"ease", all_eases()}},
                 false});
    r.push_back({TemplateType::dolly, Arity::single, true, move_schema(), true});
    r.push_back({TemplateType::orbit, Arity::single, true, move_schema(), true});
    r.push_back({TemplateType::pan, Arity::single, true, move_schema(), true});
    r.push_back({TemplateType::tilt, Arity::single, true, elev_schema(), true});
    r.push_back({TemplateType::push_in, Arity::single, true, move_schema(), true});
    r.push_back({TemplateType::pull_out, Arity::single, true, move_schema(), true});
    r.push_back({TemplateType::crane, Arity::single, true, elev_schema(), true});
    r.push_back({TemplateType::zoom, Arity::single, true, move_schema(), true});
    r.push_back({TemplateType::two_static, Arity::pair, false,
                 {{"relation", all_relations()},
                  {"framing", all_framings()},
                  {"shot_size", all_sizes()},
                  {"angle", all_angles()}},
                 false});
    r.push_back({TemplateType::two_ots, Arity::pair, false, static_schema(), true});
    r.push_back({TemplateType::two_profile, Arity::pair, false, static_schema(), true});
    r.push_back({TemplateType::two_apex, Arity::pair, false, static_schema(), true});
    r.push_back({TemplateType::two_orbit, Arity::pair, true, move_schema(), true});
    r.push_back({TemplateType::two_push_in, Arity::pair, true, move_schema(), true});
    r.push_back({TemplateType::two_pull_out, Arity::pair, true, move_schema(), true});
    r.push_back({TemplateType::two_pan, Arity::pair, true, move_schema(), true});
    r.push_back({TemplateType::group_static, Arity::group, false, static_schema(), true});
    return r;
  }();
  return reg;
}

inline const TemplateSpec& find_template(TemplateType type,
                                         const std::vector<TemplateSpec>& registry) {
  for (const auto& spec : registry)
    if (spec.type == type) return spec;
  throw InvalidParams(std::string("unregistered camera template '") + to_string(type) + "'");
}

// ---------------------------------------------------------------------------
// Parameters, tracks, reports

struct ShotParams {
  std::vector<std::string> subjects;
  std::optional<RelationParam> relation;
  std::optional<Framing> framing;
  std::optional<ShotSize> shot_size;
  std::optional<Angle> angle;
  std::optional<Angle> start_elev;
  std::optional<Angle> end_elev;
  std::optional<Ease> ease;

  bool operator==(const ShotParams&) const = default;
};

struct ShotSample {
  double t = 0.0;
  Vec3 position;
  Vec3 look_at;
  double vertical_fov = 0.0;  // radians

  bool operator==(const ShotSample&) const = default;
};

struct ShotTrack {
  std::vector<ShotSample> samples;

  bool operator==(const ShotTrack&) const = default;
};

struct ValidationReport {
  bool collision = false;
  std::optional<int> first_collision_sample;
  double occlusion_ratio = 0.0;
  bool framing_ok = true;
  bool passed = false;

  bool operator==(const ValidationReport&) const = default;
};

struct ShotPlan {
  behaviour::ClipRef clip;
  TemplateType type = TemplateType::single_static;
  ShotParams params;
  ShotTrack track;
  ValidationReport report;
  std::string rationale;
  bool fallback_unsafe = false;
};

// Construction constants; every value is overridable through the registry
// file or the pipeline config.
struct CameraConfig {
  std::map<ShotSize, double> shot_distance = {{ShotSize::cu, 1.0},
                                              {ShotSize::mcu, 1.5},
                                              {ShotSize::ms, 2.5},
                                              {ShotSize::mls, 3.5},
                                              {ShotSize::ls, 5.0}};
  std::map<Angle, double> angle_height = {
      {Angle::low, 0.8}, {Angle::eye, 1.6}, {Angle::high, 2.6}, {Angle::top, 4.0}};
  double ots_offset_rad = std::numbers::pi / 6.0;  // 30 degrees
  double vertical_fov_rad = 40.0 * std::numbers::pi / 180.0;
  double aspect = 16.0 / 9.0;
  double sample_hz = 10.0;
  double v_min = 0.5;                 // subject-visibility floor per sample
  int max_validation_attempts = 5;
  double head_standing = 1.6;
  double head_sitting = 1.1;
  double intimate_scale = 0.8;
  double distant_scale = 1.2;
  double collision_inflation = 0.1;   // meters added around object boxes
};

// ---------------------------------------------------------------------------
// Easing

inline double eval_ease(Ease kind, double t) {
  switch (kind) {
    case Ease::linear: return t;
    case Ease::ease_in: return t * t;
    case Ease::ease_out: return 1.0 - (1.0 - t) * (1.0 - t);
    case Ease::ease_in_out: return t * t * (3.0 - 2.0 * t);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Parameter parsing against a template schema

inline ShotParams parse_shot_params(const TemplateSpec& spec, const json& params,
                                    const std::vector<std::string>& default_subjects) {
  ShotParams out;
  out.subjects = default_subjects;
  if (!params.is_object()) throw InvalidParams("shot params must be an object");

  for (const auto& [key, value] : params.items()) {
    if (key == "subjects") {
      out.subjects.clear();
      for (const auto& s : value) out.subjects.push_back(s.get<std::string>());
      continue;
    }
    auto it = spec.param_schema.find(key);
    if (it == spec.param_schema.end())
      throw InvalidParams(std::string("parameter '") + key + "' not in schema of " +
                          to_string(spec.type));
    std::string v = value.get<std::string>();
    if (std::find(it->second.begin(), it->second.end(), v) == it->second.end())
      throw InvalidParams("value '" + v + "' not allowed for parameter '" + key + "'");
    if (key == "relation") out.relation = enum_from_string<RelationParam>(v);
    else if (key == "framing") out.framing = enum_from_string<Framing>(v);
    else if (key == "shot_size") out.shot_size = enum_from_string<ShotSize>(v);
    else if (key == "angle") out.angle = enum_from_string<Angle>(v);
    else if (key == "start_elev") out.start_elev = enum_from_string<Angle>(v);
    else if (key == "end_elev") out.end_elev = enum_from_string<Angle>(v);
    else if (key == "ease") out.ease = enum_from_string<Ease>(v);
  }
  for (const auto& [key, _] : spec.param_schema)
    if (!params.contains(key))
      throw InvalidParams(std::string("missing parameter '") + key + "' for " +
                          to_string(spec.type));

  std::size_t want = spec.arity == Arity::single ? 1 : spec.arity == Arity::pair ? 2 : 3;
  if (spec.arity == Arity::group ? out.subjects.size() < 1 : out.subjects.size() != want)
    throw InvalidParams(std::string("subject count does not match arity of ") +
                        to_string(spec.type));
  return out;
}

inline json shot_params_to_json(const ShotParams& p) {
  json out = json::object();
  out["subjects"] = p.subjects;
  if (p.relation) out["relation"] = to_string(*p.relation);
  if (p.framing) out["framing"] = to_string(*p.framing);
  if (p.shot_size) out["shot_size"] = to_string(*p.shot_size);
  if (p.angle) out["angle"] = to_string(*p.angle);
  if (p.start_elev) out["start_elev"] = to_string(*p.start_elev);
  if (p.end_elev) out["end_elev"] = to_string(*p.end_elev);
  if (p.ease) out["ease"] = to_string(*p.ease);
  return out;
}

// ---------------------------------------------------------------------------
// Track expansion

namespace detail {

inline Vec2 rot90(Vec2 v) { return {-v.y, v.x}; }

inline Vec2 rotate(Vec2 v, double a) {
  double c = std::cos(a), s = std::sin(a);
  return {v.x * c - v.y * s, v.x * s + v.y * c};
}

struct SubjectView {
  Vec2 pos;
  double facing = 0.0;
  double head_z = 0.0;
  Vec3 head() const { return {pos.x, pos.y, head_z}; }
};

inline SubjectView subject_view(const Behaviour& b, const CameraConfig& cfg) {
  return {b.start_pos, b.start_facing,
          b.start_state == BodyState::sitting ? cfg.head_sitting : cfg.head_standing};
}

inline std::vector<double> sample_times(double duration, double hz) {
  std::vector<double> ts;
  double step = 1.0 / hz;
  for (double t = 0.0; t < duration - 1e-9; t += step) ts.push_back(t);
  ts.push_back(duration);
  return ts;
}

}  // namespace detail

// Deterministic pose track from the construction tables. Static templates
// yield a constant pose sampled at the same cadence as moves.
inline ShotTrack expand_template(const TemplateSpec& spec, const ShotParams& params,
                                 const std::map<std::string, Behaviour>& behaviours,
                                 const PlacedScene& placed, double duration,
                                 const CameraConfig& cfg = {}) {
  (void)placed;
  if (!(duration > 0.0)) throw InvalidParams("expand_template: duration must be > 0");
  for (const auto& name : params.subjects)
    if (!behaviours.count(name))
      throw InvalidParams("expand_template: no behaviour for subject '" + name + "'");

  auto dist = [&](ShotSize s) { return cfg.shot_distance.at(s); };
  auto height = [&](Angle a) { return cfg.angle_height.at(a); };
  double fov = cfg.vertical_fov_rad;
  Ease ease = params.ease.value_or(Ease::linear);

  std::vector<detail::SubjectView> subjects;
  for (const auto& name : params.subjects)
    subjects.push_back(detail::subject_view(behaviours.at(name), cfg));

  ShotTrack track;
  auto emit = [&](double t, Vec3 pos, Vec3 look, double vfov) {
    track.samples.push_back({t, pos, look, vfov});
  };

  const auto times = detail::sample_times(duration, cfg.sample_hz);
  auto sweep = [&](double t) { return eval_ease(ease, duration > 0 ? t / duration : 0.0); };

  switch (spec.type) {
    case TemplateType::single_static:
    case TemplateType::single_profile:
    case TemplateType::single_back: {
      const auto& s = subjects[0];
      Vec2 f = facing_dir(s.facing);
      Vec2 dir = spec.type == TemplateType::single_profile ? detail::rot90(f)
                 : spec.type == TemplateType::single_back  ? f * -1.0
                                                           : f;
      Vec3 pos{s.pos.x + dir.x * dist(*params.shot_size), s.pos.y + dir.y * dist(*params.shot_size),
               height(*params.angle)};
      for (double t : times) emit(t, pos, s.head(), fov);
      break;
    }
    case TemplateType::pedestal: {
      const auto& s = subjects[0];
      Vec2 f = facing_dir(s.facing);
      double d = cfg.shot_distance.at(ShotSize::ms);
      double z0 = height(*params.start_elev), z1 = height(*params.end_elev);
      for (double t : times) {
        double z = z0 + (z1 - z0) * sweep(t);
        emit(t, {s.pos.x + f.x * d, s.pos.y + f.y * d, z}, s.head(), fov);
      }
      break;
    }
    case TemplateType::dolly: {
      const auto& s = subjects[0];
      Vec2 f = facing_dir(s.facing);
      double d = dist(*params.shot_size);
      Vec2 base = s.pos + f * d;
      Vec2 lateral = detail::rot90(f);
      for (double t : times) {
        double off = (sweep(t) - 0.5) * d;
        emit(t, {base.x + lateral.x * off, base.y + lateral.y * off, height(*params.angle)},
             s.head(), fov);
      }
      break;
    }
    case TemplateType::orbit: {
      const auto& s = subjects[0];
      double d = dist(*params.shot_size);
      for (double t : times) {
        double a = (sweep(t) - 0.5) * (std::numbers::pi / 2.0);  // -45..+45 degrees
        Vec2 dir = detail::rotate(facing_dir(s.facing), a);
        emit(t, {s.pos.x + dir.x * d, s.pos.y + dir.y * d, height(*params.angle)}, s.head(), fov);
      }
      break;
    }
    case TemplateType::pan: {
      const auto& s = subjects[0];
      Vec2 f = facing_dir(s.facing);
      double d = dist(*params.shot_size);
      Vec3 pos{s.pos.x + f.x * d, s.pos.y + f.y * d, height(*params.angle)};
      Vec2 lateral = detail::rot90(f);
      for (double t : times) {
        double off = (sweep(t) - 0.5) * 0.8 * d;
        emit(t, pos, {s.pos.x + lateral.x * off, s.pos.y + lateral.y * off, s.head_z}, fov);
      }
      break;
    }
    case TemplateType::tilt: {
      const auto& s = subjects[0];
      Vec2 f = facing_dir(s.facing);
      double d = dist(*params.shot_size);
      Vec3 pos{s.pos.x + f.x * d, s.pos.y + f.y * d, cfg.angle_height.at(Angle::eye)};
      double z0 = height(*params.start_elev), z1 = height(*params.end_elev);
      for (double t : times)
        emit(t, pos, {s.pos.x, s.pos.y, z0 + (z1 - z0) * sweep(t)}, fov);
      break;
    }
    case TemplateType::push_in:
    case TemplateType::pull_out: {
      const auto& s = subjects[0];
      Vec2 f = facing_dir(s.facing);
      double d_far = dist(*params.shot_size);
      double d_near = *params.shot_size == ShotSize::cu ? 0.7 * d_far
                                                        : dist(static_cast<ShotSize>(
                                                              static_cast<int>(*params.shot_size) -
                                                              1));
      if (spec.type == TemplateType::pull_out) std::swap(d_far, d_near);
      for (double t : times) {
        double d = d_far + (d_near - d_far) * sweep(t);
        emit(t, {s.pos.x + f.x * d, s.pos.y + f.y * d, height(*params.angle)}, s.head(), fov);
      }
      break;
    }
    case TemplateType::crane: {
      const auto& s = subjects[0];
      Vec2 f = facing_dir(s.facing);
      double d0 = dist(*params.shot_size);
      double z0 = height(*params.start_elev), z1 = height(*params.end_elev);
      for (double t : times) {
        double u = sweep(t);
        double d = d0 * (1.0 + 0.5 * u);
        emit(t, {s.pos.x + f.x * d, s.pos.y + f.y * d, z0 + (z1 - z0) * u}, s.head(), fov);
      }
      break;
    }
    case TemplateType::zoom: {
      const auto& s = subjects[0];
      Vec2 f = facing_dir(s.facing);
      Vec3 pos{s.pos.x + f.x * dist(*params.shot_size), s.pos.y + f.y * dist(*params.shot_size),
               height(*params.angle)};
      double fov0 = 50.0 * std::numbers::pi / 180.0;
      double fov1 = 28.0 * std::numbers::pi / 180.0;
      for (double t : times) emit(t, pos, s.head(), fov0 + (fov1 - fov0) * sweep(t));
      break;
    }
    case TemplateType::two_static:
    case TemplateType::two_ots:
    case TemplateType::two_profile: {
      const auto& a = subjects[0];
      const auto& b = subjects[1];
      Vec2 axis = (b.pos - a.pos).normalized();
      Vec2 mid = (a.pos + b.pos) * 0.5;
      double mul = 1.0;
      if (params.relation == RelationParam::intimate) mul = cfg.intimate_scale;
      if (params.relation == RelationParam::distant) mul = cfg.distant_scale;
      double d = dist(*params.shot_size) * mul;
      double z = height(*params.angle);
      double head_mid = (a.head_z + b.head_z) * 0.5;

      Framing framing = spec.type == TemplateType::two_ots
                            ? Framing::ots_pair
                        : spec.type == TemplateType::two_profile ? Framing::profile_duet
                                                                 : params.framing.value();
      double look_bias = 0.5;
      if (params.relation == RelationParam::dominant_a) look_bias = 0.35;
      if (params.relation == RelationParam::dominant_b) look_bias = 0.65;

      Vec3 pos, look;
      switch (framing) {
        case Framing::two_shot: {
          Vec2 dir = detail::rotate(detail::rot90(axis), -std::numbers::pi / 9.0);  // 20 deg
          pos = {mid.x + dir.x * d, mid.y + dir.y * d, z};
          Vec2 look2 = a.pos + (b.pos - a.pos) * look_bias;
          look = {look2.x, look2.y, head_mid};
          break;
        }
        case Framing::profile_duet: {
          Vec2 dir = detail::rot90(axis);
          pos = {mid.x + dir.x * d, mid.y + dir.y * d, z};
          Vec2 look2 = a.pos + (b.pos - a.pos) * look_bias;
          look = {look2.x, look2.y, head_mid};
          break;
        }
        case Framing::ots_pair: {
          // behind-beside subject A, offset off the B->A axis, looking at B
          Vec2 dir = detail::rotate(axis * -1.0, cfg.ots_offset_rad);
          pos = {b.pos.x + dir.x * d, b.pos.y + dir.y * d, z};
          look = b.head();
          break;
        }
        case Framing::split_depth: {
          Vec2 dir = axis * -1.0;  // behind A on the pair axis
          pos = {a.pos.x + dir.x * d, a.pos.y + dir.y * d, z};
          look = b.head();
          break;
        }
      }
      for (double t : times) emit(t, pos, look, fov);
      break;
    }
    case TemplateType::two_apex:
    case TemplateType::two_orbit:
    case TemplateType::two_push_in:
    case TemplateType::two_pull_out:
    case TemplateType::two_pan: {
      const auto& a = subjects[0];
      const auto& b = subjects[1];
      Vec2 axis = (b.pos - a.pos).normalized();
      Vec2 mid = (a.pos + b.pos) * 0.5;
      double spread = (b.pos - a.pos).norm() * 0.5;
      double d = dist(*params.shot_size) + spread;
      double z = height(*params.angle);
      double head_mid = (a.head_z + b.head_z) * 0.5;
      Vec2 perp = detail::rot90(axis);
      Vec3 look{mid.x, mid.y, head_mid};

      for (double t : times) {
        double u = sweep(t);
        switch (spec.type) {
          case TemplateType::two_apex:
            emit(t, {mid.x + perp.x * d, mid.y + perp.y * d, z}, look, fov);
            break;
          case TemplateType::two_orbit: {
            Vec2 dir = detail::rotate(perp, (u - 0.5) * (std::numbers::pi / 2.0));
            emit(t, {mid.x + dir.x * d, mid.y + dir.y * d, z}, look, fov);
            break;
          }
          case TemplateType::two_push_in: {
            double dd = d * (1.0 - 0.3 * u);
            emit(t, {mid.x + perp.x * dd, mid.y + perp.y * dd, z}, look, fov);
            break;
          }
          case TemplateType::two_pull_out: {
            double dd = d * (0.7 + 0.3 * u);
            emit(t, {mid.x + perp.x * dd, mid.y + perp.y * dd, z}, look, fov);
            break;
          }
          default: {  // two_pan
            Vec3 pos{mid.x + perp.x * d, mid.y + perp.y * d, z};
            Vec3 la = a.head(), lb = b.head();
            emit(t, pos, la + (lb - la) * u, fov);
            break;
          }
        }
      }
      break;
    }
    case TemplateType::group_static: {
      Vec2 centroid{0.0, 0.0};
      double head_sum = 0.0;
      for (const auto& s : subjects) {
        centroid = centroid + s.pos;
        head_sum += s.head_z;
      }
      centroid = centroid * (1.0 / subjects.size());
      double spread = 0.0;
      for (const auto& s : subjects) spread = std::max(spread, (s.pos - centroid).norm());
      double d = dist(*params.shot_size) + spread;
      Vec3 pos{centroid.x, centroid.y - d, height(*params.angle)};
      Vec3 look{centroid.x, centroid.y, head_sum / subjects.size()};
      for (double t : times) emit(t, pos, look, fov);
      break;
    }
  }
  return track;
}

// ---------------------------------------------------------------------------
// Geometric validation

namespace detail {

inline bool point_in_inflated_box(const Vec3& p, const Box3& box, double inflation) {
  Box3 grown = box;
  grown.footprint.half_depth += inflation;
  grown.footprint.half_width += inflation;
  grown.z0 -= inflation;
  grown.z1 += inflation;
  return grown.contains(p);
}

inline Vec2 lerp_pos(const Behaviour& b, double u) {
  return b.start_pos + (b.end_pos - b.start_pos) * u;
}

// Fraction of proxy sample points visible from the camera position.
inline double subject_visibility(const Vec2& base, const Vec3& cam_pos,
                                 const PlacedScene& placed) {
  regions::VisibilityCamera cam{cam_pos, {base.x, base.y, 1.0}};
  return regions::visibility_ratio(base, cam, placed);
}

inline bool head_in_frustum(const ShotSample& s, const Vec3& head, double aspect) {
  Vec3 forward = (s.look_at - s.position).normalized();
  Vec3 up{0.0, 0.0, 1.0};
  Vec3 right = forward.cross(up);
  if (right.norm() < 1e-9) right = {1.0, 0.0, 0.0};  // looking straight down
  right = right.normalized();
  Vec3 cam_up = right.cross(forward);
  Vec3 d = head - s.position;
  double z = d.dot(forward);
  if (z <= 1e-9) return false;
  double x = d.dot(right);
  double y = d.dot(cam_up);
  double tan_v = std::tan(s.vertical_fov * 0.5);
  double tan_h = tan_v * aspect;
  return std::abs(y) <= tan_v * z + 1e-12 && std::abs(x) <= tan_h * z + 1e-12;
}

}  // namespace detail

// Collision against inflated object boxes, per-sample subject visibility via
// the same ray test the region optimizer uses, and head-in-frustum framing.
inline ValidationReport validate_shot(const ShotTrack& track, const PlacedScene& placed,
                                      const std::map<std::string, Behaviour>& behaviours,
                                      const std::vector<std::string>& subjects, double v_min,
                                      const CameraConfig& cfg = {}) {
  if (track.samples.empty()) throw InvalidParams("validate_shot: empty track");
  ValidationReport report;
  double duration = track.samples.back().t;
  int occluded = 0;

  for (std::size_t i = 0; i < track.samples.size(); ++i) {
    const auto& sample = track.samples[i];
    if (!report.collision) {
      for (const auto& [id, pose] : placed.poses) {
        if (detail::point_in_inflated_box(sample.position, placed.solid(id),
                                          cfg.collision_inflation)) {
          report.collision = true;
          report.first_collision_sample = static_cast<int>(i);
          break;
        }
      }
    }
    double u = duration > 0.0 ? sample.t / duration : 0.0;
    bool sample_occluded = false;
    for (const auto& name : subjects) {
      const Behaviour& b = behaviours.at(name);
      Vec2 base = detail::lerp_pos(b, u);
      if (detail::subject_visibility(base, sample.position, placed) < v_min) {
        sample_occluded = true;
        break;
      }
      double head_z = (u < 0.5 ? b.start_state : b.end_state) == BodyState::sitting
                          ? cfg.head_sitting
                          : cfg.head_standing;
      if (!detail::head_in_frustum(sample, {base.x, base.y, head_z}, cfg.aspect))
        report.framing_ok = false;
    }
    if (sample_occluded) ++occluded;
  }
  report.occlusion_ratio = static_cast<double>(occluded) / track.samples.size();
  report.passed = !report.collision && report.occlusion_ratio == 0.0 && report.framing_ok;
  return report;
}

// ---------------------------------------------------------------------------
// Repair ladder

// Deterministic single-step repair: collisions tighten the shot size by one
// unit, occlusion rotates the framing cycle (or raises the angle when the
// template has no framing), framing failures widen by one unit. Returns
// nothing when the ladder for the failure is exhausted.
inline std::optional<ShotParams> adjust_parameters(const ValidationReport& report,
                                                   const ShotParams& params,
                                                   const TemplateSpec& spec) {
  ShotParams next = params;
  bool has_size = spec.param_schema.count("shot_size") && params.shot_size;
  bool has_framing = spec.param_schema.count("framing") && params.framing;
  bool has_angle = spec.param_schema.count("angle") && params.angle;

  if (report.collision) {
    if (!has_size || *params.shot_size == ShotSize::cu) return std::nullopt;
    next.shot_size = static_cast<ShotSize>(static_cast<int>(*params.shot_size) - 1);
    return next;
  }
  if (report.occlusion_ratio > 0.0) {
    if (has_framing) {
      static const Framing cycle[] = {Framing::two_shot, Framing::profile_duet,
                                      Framing::split_depth, Framing::ots_pair};
      for (std::size_t i = 0; i < 4; ++i)
        if (cycle[i] == *params.framing) {
          next.framing = cycle[(i + 1) % 4];
          return next;
        }
      return std::nullopt;
    }
    if (has_angle && *params.angle != Angle::top) {
      next.angle = static_cast<Angle>(static_cast<int>(*params.angle) + 1);
      return next;
    }
    return std::nullopt;
  }
  if (!report.framing_ok) {
    if (!has_size || *params.shot_size == ShotSize::ls) return std::nullopt;
    next.shot_size = static_cast<ShotSize>(static_cast<int>(*params.shot_size) + 1);
    return next;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Shot planning via debate-judge-validation

struct ShotChoice {
  TemplateType type = TemplateType::single_static;
  ShotParams params;
  std::string rationale;
};

// Widest static template of matching arity at eye level, aimed at the
// subjects; the escape hatch when the repair ladder gives up.
inline ShotChoice safe_default_choice(const std::vector<std::string>& subjects) {
  ShotChoice c;
  c.rationale = "safe default: widest static framing at eye level";
  c.params.subjects = subjects;
  c.params.shot_size = ShotSize::ls;
  c.params.angle = Angle::eye;
  if (subjects.size() == 1) {
    c.type = TemplateType::single_static;
  } else if (subjects.size() == 2) {
    c.type = TemplateType::two_static;
    c.params.relation = RelationParam::equal;
    c.params.framing = Framing::two_shot;
  } else {
    c.type = TemplateType::group_static;
  }
  return c;
}

struct ShotPlanningInputs {
  behaviour::ClipRef ref;
  const Clip* clip = nullptr;
  const behaviour::DetectionMap* dm = nullptr;
  const regions::FunctionalMap* fm = nullptr;
  const std::map<std::string, Behaviour>* behaviours = nullptr;
  const PlacedScene* placed = nullptr;
};

struct ShotPlanResult {
  ShotPlan plan;
  agents::Transcript transcript;
};

namespace detail {

inline std::vector<std::string> default_subject_order(
    const Clip& clip, const std::map<std::string, Behaviour>& behaviours) {
  std::vector<std::string> out;
  auto add = [&](const std::string& name) {
    if (behaviours.count(name) && std::find(out.begin(), out.end(), name) == out.end())
      out.push_back(name);
  };
  for (const auto& line : clip.lines) add(line.speaker);
  for (const auto& [name, _] : behaviours) add(name);
  return out;
}

}  // namespace detail

// Two cinematographers propose, critique each other, the director chooses;
// the choice is expanded and validated, repaired up to the attempt cap, and
// rescued by the safe default when the ladder gives up. The returned plan
// either passed validation or is flagged fallback-unsafe.
inline ShotPlanResult plan_shot(const ShotPlanningInputs& in, agents::AgentBackend& proposer_1,
                                agents::AgentBackend& proposer_2,
                                agents::AgentBackend& judge_backend,
                                const agents::LoopConfig& loop_cfg,
                                const CameraConfig& cam_cfg = {},
                                const std::vector<TemplateSpec>& registry = default_registry(),
                                const prompts::PromptLibrary& prompts = {}) {
  const auto& behaviours = *in.behaviours;
  std::vector<std::string> subjects = detail::default_subject_order(*in.clip, behaviours);

  json blocking = json::object();
  for (const auto& [name, b] : behaviours)
    blocking[name] = {{"start_state", previz::to_string(b.start_state)},
                      {"start_pos", {b.start_pos.x, b.start_pos.y}},
                      {"start_facing", b.start_facing},
                      {"end_state", previz::to_string(b.end_state)},
                      {"end_pos", {b.end_pos.x, b.end_pos.y}},
                      {"end_facing", b.end_facing}};
  json registry_json = json::array();
  for (const auto& spec : registry) registry_json.push_back(to_string(spec.type));

  json base_ctx{{"clip", behaviour::clip_digest(in.ref, *in.clip)},
                {"subjects", subjects},
                {"blocking", blocking},
                {"boxes", behaviour::detection_digest(*in.dm)},
                {"templates", registry_json}};

  agents::Role cine1 = agents::make_role(agents::RoleKind::cinematographer, "cinematographer 1");
  agents::Role cine2 = agents::make_role(agents::RoleKind::cinematographer, "cinematographer 2");
  agents::Role director = agents::make_role(agents::RoleKind::director, "director");

  auto parse_choice = [&](const json& doc) -> ShotChoice {
    std::string type_name = doc.at("type").get<std::string>();
    auto type = enum_from_string<TemplateType>(type_name);
    if (!type) throw InvalidParams("unknown camera template '" + type_name + "'");
    const TemplateSpec& spec = find_template(*type, registry);
    ShotChoice choice;
    choice.type = *type;
    choice.params = parse_shot_params(spec, doc.at("params"), subjects);
    choice.rationale = doc.value("rationale", "");
    return choice;
  };

  auto propose = [&](agents::AgentBackend& backend, const agents::Role& role, int index) {
    return [&, role, index]() {
      json ctx = base_ctx;
      ctx["proposer"] = index;
      json doc = agents::ask(backend, role, {prompts.render("camera_proposal"), ctx},
                             "camera_proposal", loop_cfg);
      ShotChoice choice = parse_choice(doc);
      return std::make_pair(choice, doc.dump());
    };
  };

  auto critique = [&](agents::AgentBackend& backend, const agents::Role& role) {
    return [&, role](const ShotChoice& other) {
      json ctx = base_ctx;
      ctx["rival"] = {{"type", to_string(other.type)},
                      {"params", shot_params_to_json(other.params)},
                      {"rationale", other.rationale}};
      json doc = agents::ask(backend, role, {prompts.render("camera_critique"), ctx}, "critique",
                             loop_cfg);
      return doc.at("critique").get<std::string>();
    };
  };

  struct ExpandedReport {
    ValidationReport report;
    ShotTrack track;
  };

  auto validate = [&](const ShotChoice& choice) -> ExpandedReport {
    const TemplateSpec& spec = find_template(choice.type, registry);
    ShotTrack track =
        expand_template(spec, choice.params, behaviours, *in.placed, in.clip->duration_s, cam_cfg);
    ValidationReport report = validate_shot(track, *in.placed, behaviours, choice.params.subjects,
                                            cam_cfg.v_min, cam_cfg);
    return {report, std::move(track)};
  };

  auto djv = agents::run_debate_judge_validation<ShotChoice, ExpandedReport>(
      {agents::Proposer<ShotChoice>{cine1, propose(proposer_1, cine1, 1)},
       agents::Proposer<ShotChoice>{cine2, propose(proposer_2, cine2, 2)}},
      {critique(proposer_1, cine1), critique(proposer_2, cine2)}, director,
      [&](const ShotChoice& p1, const ShotChoice& p2, const std::string& c1,
          const std::string& c2) {
        json ctx = base_ctx;
        ctx["proposal_1"] = {{"type", to_string(p1.type)},
                             {"params", shot_params_to_json(p1.params)},
                             {"rationale", p1.rationale}};
        ctx["proposal_2"] = {{"type", to_string(p2.type)},
                             {"params", shot_params_to_json(p2.params)},
                             {"rationale", p2.rationale}};
        ctx["critique_1"] = c1;
        ctx["critique_2"] = c2;
        json doc = agents::ask(judge_backend, director, {prompts.render("camera_choice"), ctx},
                               "camera_choice", loop_cfg);
        ShotChoice choice = parse_choice(doc);
        return std::make_pair(choice, doc.dump());
      },
      validate, [](const ExpandedReport& r) { return r.report.passed; },
      [](const ExpandedReport& r) {
        json doc{{"collision", r.report.collision},
                 {"occlusion_ratio", r.report.occlusion_ratio},
                 {"framing_ok", r.report.framing_ok},
                 {"passed", r.report.passed}};
        return doc.dump();
      },
      [&](const ExpandedReport& report, const ShotChoice& choice) -> std::optional<ShotChoice> {
        const TemplateSpec& spec = find_template(choice.type, registry);
        auto adjusted = adjust_parameters(report.report, choice.params, spec);
        if (!adjusted) return std::nullopt;
        ShotChoice next = choice;
        next.params = *adjusted;
        return next;
      },
      cam_cfg.max_validation_attempts);

  ShotPlanResult result;
  result.transcript = std::move(djv.transcript);

  ShotPlan plan;
  plan.clip = in.ref;
  if (djv.passed) {
    plan.type = djv.choice.type;
    plan.params = djv.choice.params;
    plan.rationale = djv.choice.rationale;
    plan.track = djv.report->track;
    plan.report = djv.report->report;
  } else {
    // ladder exhausted or attempts spent: fall back and re-validate once
    ShotChoice fallback = safe_default_choice(subjects);
    ExpandedReport rep = validate(fallback);
    result.transcript.append(result.transcript.max_round() + 1, director,
                             agents::MessageKind::validation_result,
                             json{{"fallback", true}, {"passed", rep.report.passed}}.dump());
    plan.type = fallback.type;
    plan.params = fallback.params;
    plan.rationale = fallback.rationale;
    plan.track = rep.track;
    plan.report = rep.report;
    plan.fallback_unsafe = !rep.report.passed;
  }
  result.plan = std::move(plan);
  return result;
}

}  // namespace previz::camera
