#pragma once

#include <algorithm>
#include <climits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "previz/agents.hpp"
#include "previz/regions.hpp"

// Character blocking, motion assignment and locomotion. Blocking proposals
// come from an agent backend fed with a structured digest of the detection
// and functional maps; parsed behaviours are snapped onto valid regions and
// seats, then refined through the multi-role discuss-revise-judge loop.
namespace previz::behaviour {

using agents::json;

inline constexpr double kMinCharacterDistance = 0.5;  // meters
inline constexpr double kFacingTolerance = std::numbers::pi / 2.0;
inline constexpr double kCharacterRadius = 0.3;  // obstacle inflation for paths

// ---------------------------------------------------------------------------
// Detection map

struct DetectionBox {
  std::string id;
  std::string label;
  Vec2 center;
  double width = 0.0;
  double depth = 0.0;
  double yaw = 0.0;

  bool operator==(const DetectionBox&) const = default;
};

struct DetectionMap {
  Rect bounds;
  std::vector<DetectionBox> boxes;
};

inline DetectionMap build_detection_map(const PlacedScene& placed) {
  DetectionMap dm;
  dm.bounds = placed.bounds;
  for (const auto& [id, pose] : placed.poses) {
    const SceneObject* obj = placed.scene_graph.find(id);
    dm.boxes.push_back({id, obj->label, pose.position, obj->width, obj->depth, pose.yaw});
  }
  return dm;
}

// ---------------------------------------------------------------------------
// Plan containers

struct ClipRef {
  int act_index = 0;
  int clip_index = 0;
  auto operator<=>(const ClipRef&) const = default;
};

struct LocomotionPath {
  std::vector<Vec2> waypoints;
  grid::GridCost cost;
};

struct BehaviourPlan {
  std::map<ClipRef, std::map<std::string, Behaviour>> behaviours;
  std::map<ClipRef, std::map<std::string, int>> motions;
  std::map<ClipRef, std::map<std::string, std::vector<Vec2>>> paths;
  std::set<ClipRef> best_effort;  // clips returned at the round cap unapproved
};

enum class BlockingRule { off_region, occupied_seat, collision, facing_away, out_of_bounds };

inline const char* to_string(BlockingRule r) {
  switch (r) {
    case BlockingRule::off_region: return "off_region";
    case BlockingRule::occupied_seat: return "occupied_seat";
    case BlockingRule::collision: return "collision";
    case BlockingRule::facing_away: return "facing_away";
    case BlockingRule::out_of_bounds: return "out_of_bounds";
  }
  return "?";
}

struct BlockingViolation {
  ClipRef clip;
  std::string character;
  BlockingRule rule = BlockingRule::off_region;
  std::string detail;
};

// ---------------------------------------------------------------------------
// Digests fed to backends

inline json detection_digest(const DetectionMap& dm) {
  json boxes = json::array();
  for (const auto& b : dm.boxes)
    boxes.push_back({{"id", b.id},
                     {"label", b.label},
                     {"center", {b.center.x, b.center.y}},
                     {"width", b.width},
                     {"depth", b.depth},
                     {"yaw", b.yaw}});
  return boxes;
}

inline json functional_digest(const regions::FunctionalMap& fm) {
  json regions_json = json::array();
  for (const auto& [parcel, sr] : fm.standing_regions)
    regions_json.push_back({{"parcel", {parcel.row, parcel.col}},
                            {"center", {sr.region.center.x, sr.region.center.y}},
                            {"loss", sr.loss}});
  json seats = json::array();
  for (const auto& s : fm.sittable_spots)
    seats.push_back({{"id", s.object_id}, {"pos", {s.seat.x, s.seat.y}}, {"yaw", s.seat_yaw}});
  return json{{"regions", regions_json}, {"seats", seats}};
}

inline json clip_digest(const ClipRef& ref, const Clip& clip) {
  json lines = json::array();
  for (const auto& l : clip.lines) lines.push_back({{"speaker", l.speaker}, {"text", l.text}});
  return json{{"act_index", ref.act_index},
              {"index", ref.clip_index},
              {"duration", clip.duration_s},
              {"lines", lines}};
}

// ---------------------------------------------------------------------------
// Proposal parsing and normalization

struct ProposeResult {
  std::map<std::string, Behaviour> behaviours;
  std::vector<std::string> notes;  // normalization events, surfaced in transcripts
  std::string payload;             // wire form of the normalized plan
};

namespace detail {

struct Endpoint {
  BodyState state = BodyState::standing;
  Vec2 pos;
  double facing = 0.0;
  std::optional<std::string> seat_id;
};

inline const regions::ScoredRegion* nearest_region(const regions::FunctionalMap& fm, Vec2 p,
                                                   const std::set<std::string>* exclude = nullptr) {
  (void)exclude;
  const regions::ScoredRegion* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& [parcel, sr] : fm.standing_regions) {
    double d = (sr.region.center - p).norm();
    if (d < best_d) {
      best_d = d;
      best = &sr;
    }
  }
  return best;
}

inline const regions::SittableSpot* nearest_seat(const regions::FunctionalMap& fm, Vec2 p) {
  const regions::SittableSpot* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& s : fm.sittable_spots) {
    double d = (s.seat - p).norm();
    if (d < best_d) {
      best_d = d;
      best = &s;
    }
  }
  return best;
}

inline Endpoint normalize_endpoint(const json& rec, const std::string& which,
                                   const regions::FunctionalMap& fm,
                                   std::vector<std::string>& notes, const std::string& character,
                                   std::set<std::string>& taken_seats) {
  Endpoint ep;
  ep.state = rec.at(which + "_state").get<std::string>() == "sitting" ? BodyState::sitting
                                                                      : BodyState::standing;
  ep.facing = normalize_yaw(rec.at(which + "_facing").get<double>());

  Vec2 requested{};
  std::optional<std::string> seat_id;
  if (rec.contains(which + "_parcel")) {
    regions::ParcelIndex parcel{static_cast<int>(rec.at(which + "_parcel")[0].get<long>()),
                                static_cast<int>(rec.at(which + "_parcel")[1].get<long>())};
    auto it = fm.standing_regions.find(parcel);
    if (it == fm.standing_regions.end())
      throw UnparseableOutput(which + "_parcel",
                              "character '" + character + "' references unknown parcel (" +
                                  std::to_string(parcel.row) + "," + std::to_string(parcel.col) +
                                  ")");
    requested = it->second.region.center;
  } else if (rec.contains(which + "_seat")) {
    seat_id = rec.at(which + "_seat").get<std::string>();
    const regions::SittableSpot* spot = nullptr;
    for (const auto& s : fm.sittable_spots)
      if (s.object_id == *seat_id) spot = &s;
    if (!spot)
      throw UnparseableOutput(which + "_seat", "character '" + character +
                                                   "' references unknown seat '" + *seat_id + "'");
    requested = spot->seat;
    ep.facing = spot->seat_yaw;
    ep.state = BodyState::sitting;
  } else {
    requested = {rec.at(which + "_pos")[0].get<double>(), rec.at(which + "_pos")[1].get<double>()};
  }

  if (ep.state == BodyState::sitting) {
    const regions::SittableSpot* spot =
        seat_id ? nullptr : nearest_seat(fm, requested);  // already resolved when id given
    if (seat_id) {
      for (const auto& s : fm.sittable_spots)
        if (s.object_id == *seat_id) spot = &s;
    }
    if (spot && !taken_seats.count(spot->object_id)) {
      taken_seats.insert(spot->object_id);
      ep.pos = spot->seat;
      ep.facing = spot->seat_yaw;
      ep.seat_id = spot->object_id;
      return ep;
    }
    // seat missing or already taken: fall back to the nearest free region
    if (const regions::ScoredRegion* region = nearest_region(fm, requested)) {
      notes.push_back("character '" + character + "' lost seat" +
                      (spot ? " '" + spot->object_id + "'" : "") +
                      " (occupied); snapped to nearest standing region");
      ep.state = BodyState::standing;
      ep.pos = region->region.center;
      return ep;
    }
    notes.push_back("character '" + character + "' kept raw sitting position (no seats free)");
    ep.pos = requested;
    return ep;
  }

  if (const regions::ScoredRegion* region = nearest_region(fm, requested)) {
    ep.pos = region->region.center;
  } else {
    ep.pos = requested;  // no regions selected anywhere; leave it to validation
  }
  return ep;
}

inline std::string behaviours_payload(const std::map<std::string, Behaviour>& behaviours,
                                      const std::vector<std::string>& notes) {
  json list = json::array();
  for (const auto& [name, b] : behaviours) {
    list.push_back({{"character", name},
                    {"start_state", previz::to_string(b.start_state)},
                    {"end_state", previz::to_string(b.end_state)},
                    {"start_pos", {b.start_pos.x, b.start_pos.y}},
                    {"end_pos", {b.end_pos.x, b.end_pos.y}},
                    {"start_facing", b.start_facing},
                    {"end_facing", b.end_facing}});
  }
  json out{{"behaviours", list}};
  if (!notes.empty()) out["normalization_notes"] = notes;
  return out.dump();
}

}  // namespace detail

// Parses a backend blocking document into normalized behaviours. Standing
// endpoints snap to the nearest selected region center, sitting endpoints to
// seat points; a doubly-claimed seat sends the later character to the nearest
// free standing region with a note.
inline ProposeResult normalize_blocking(const json& doc,
                                        const std::vector<std::string>& characters,
                                        const regions::FunctionalMap& fm) {
  std::set<std::string> known(characters.begin(), characters.end());
  ProposeResult out;
  std::set<std::string> start_seats, end_seats;
  for (const auto& rec : doc.at("behaviours")) {
    std::string name = rec.at("character").get<std::string>();
    if (!known.count(name))
      throw UnparseableOutput("behaviours", "character '" + name + "' is not in this clip");
    Behaviour b;
    b.character = name;
    auto start = detail::normalize_endpoint(rec, "start", fm, out.notes, name, start_seats);
    auto end = detail::normalize_endpoint(rec, "end", fm, out.notes, name, end_seats);
    b.start_state = start.state;
    b.start_pos = start.pos;
    b.start_facing = start.facing;
    b.end_state = end.state;
    b.end_pos = end.pos;
    b.end_facing = end.facing;
    out.behaviours[name] = b;
  }
  for (const auto& name : characters)
    if (!out.behaviours.count(name))
      throw UnparseableOutput("behaviours", "no behaviour returned for character '" + name + "'");
  out.payload = detail::behaviours_payload(out.behaviours, out.notes);
  return out;
}

// Queries the backend for an initial blocking plan.
inline ProposeResult propose_blocking(const ClipRef& ref, const Clip& clip,
                                      const DetectionMap& dm, const regions::FunctionalMap& fm,
                                      const std::vector<std::string>& characters,
                                      agents::AgentBackend& backend,
                                      const agents::LoopConfig& cfg,
                                      const std::map<std::string, Behaviour>& prev_end = {},
                                      const prompts::PromptLibrary& prompts = {}) {
  json prev = json::object();
  for (const auto& [name, b] : prev_end)
    prev[name] = {{"state", previz::to_string(b.end_state)},
                  {"pos", {b.end_pos.x, b.end_pos.y}},
                  {"facing", b.end_facing}};
  json ctx{{"clip", clip_digest(ref, clip)},
           {"characters", characters},
           {"boxes", detection_digest(dm)},
           {"prev_end", prev}};
  json fd = functional_digest(fm);
  ctx["regions"] = fd["regions"];
  ctx["seats"] = fd["seats"];

  agents::Role d1 = agents::make_role(agents::RoleKind::director, "first director");
  json doc = agents::ask(backend, d1, {prompts.render("blocking_draft"), ctx}, "blocking", cfg);
  return normalize_blocking(doc, characters, fm);
}

// ---------------------------------------------------------------------------
// Validation

inline std::vector<BlockingViolation> validate_blocking(
    const std::map<std::string, Behaviour>& behaviours, const regions::FunctionalMap& fm,
    const PlacedScene& placed, const ClipRef& ref = {}) {
  std::vector<BlockingViolation> out;

  auto on_region = [&](const Vec2& p) {
    for (const auto& [parcel, sr] : fm.standing_regions) {
      double half = sr.region.size * 0.5 + 1e-9;
      if (std::abs(p.x - sr.region.center.x) <= half && std::abs(p.y - sr.region.center.y) <= half)
        return true;
    }
    return false;
  };
  auto seat_at = [&](const Vec2& p) -> const regions::SittableSpot* {
    for (const auto& s : fm.sittable_spots)
      if ((s.seat - p).norm() < 1e-6) return &s;
    return nullptr;
  };

  struct EndpointView {
    const char* tag;
    BodyState state;
    Vec2 pos;
    double facing;
  };
  auto endpoints = [](const Behaviour& b) {
    return std::array<EndpointView, 2>{
        EndpointView{"start", b.start_state, b.start_pos, b.start_facing},
        EndpointView{"end", b.end_state, b.end_pos, b.end_facing}};
  };

  for (const char* tag : {"start", "end"}) {
    std::map<std::string, std::vector<std::string>> seat_claims;
    for (const auto& [name, b] : behaviours) {
      EndpointView ep = endpoints(b)[std::string(tag) == "start" ? 0 : 1];
      if (!placed.bounds.contains(ep.pos)) {
        out.push_back({ref, name, BlockingRule::out_of_bounds,
                       std::string(tag) + " position outside scene bounds"});
        continue;
      }
      if (ep.state == BodyState::standing) {
        if (!on_region(ep.pos))
          out.push_back({ref, name, BlockingRule::off_region,
                         std::string(tag) + " pose is not on a selected region"});
        for (const auto& [id, pose] : placed.poses) {
          if (placed.footprint(id).contains(ep.pos)) {
            out.push_back({ref, name, BlockingRule::collision,
                           std::string(tag) + " pose inside object '" + id + "'"});
            break;
          }
        }
      } else {
        const regions::SittableSpot* seat = seat_at(ep.pos);
        if (!seat)
          out.push_back({ref, name, BlockingRule::off_region,
                         std::string(tag) + " sitting pose is not on a seat"});
        else
          seat_claims[seat->object_id].push_back(name);
      }
    }
    for (const auto& [seat, names] : seat_claims)
      if (names.size() > 1)
        for (std::size_t i = 1; i < names.size(); ++i)
          out.push_back({ref, names[i], BlockingRule::occupied_seat,
                         std::string(tag) + " seat '" + seat + "' already taken by " + names[0]});

    // pairwise separation
    for (auto a = behaviours.begin(); a != behaviours.end(); ++a) {
      for (auto b = std::next(a); b != behaviours.end(); ++b) {
        Vec2 pa = std::string(tag) == "start" ? a->second.start_pos : a->second.end_pos;
        Vec2 pb = std::string(tag) == "start" ? b->second.start_pos : b->second.end_pos;
        if ((pa - pb).norm() < kMinCharacterDistance - 1e-9)
          out.push_back({ref, b->first, BlockingRule::collision,
                         std::string(tag) + " distance to " + a->first + " below 0.5 m"});
      }
    }

    // facing: each standing character should face toward their nearest
    // partner; sitting facings are pinned to the seat yaw by normalization
    if (behaviours.size() >= 2) {
      for (const auto& [name, b] : behaviours) {
        EndpointView ep = endpoints(b)[std::string(tag) == "start" ? 0 : 1];
        if (ep.state == BodyState::sitting) continue;
        double best_d = std::numeric_limits<double>::infinity();
        Vec2 partner_pos;
        std::string partner;
        for (const auto& [other, ob] : behaviours) {
          if (other == name) continue;
          Vec2 op = std::string(tag) == "start" ? ob.start_pos : ob.end_pos;
          double d = (op - ep.pos).norm();
          if (d < best_d) {
            best_d = d;
            partner_pos = op;
            partner = other;
          }
        }
        if (best_d < 1e-9) continue;  // overlapping pair already reported
        double bearing = std::atan2(partner_pos.y - ep.pos.y, partner_pos.x - ep.pos.x);
        if (std::abs(angle_diff(ep.facing, bearing)) > kFacingTolerance + 1e-9)
          out.push_back({ref, name, BlockingRule::facing_away,
                         std::string(tag) + " facing more than pi/2 off the bearing to " +
                             partner});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Refinement loop (multi-role discuss-revise-judge)

struct RefineResult {
  std::map<std::string, Behaviour> behaviours;
  bool approved = false;
  agents::Transcript transcript;
};

// Runs the blocking plan through cinematographer/scene-designer/actor
// feedback, first-director revisions and second-director judgment. Approval
// additionally requires a clean validate_blocking pass, so an accepted plan
// is always spatially valid; at the round cap the lowest-violation revision
// wins and the clip is flagged best-effort by the caller.
inline RefineResult refine_blocking(const ClipRef& ref, const Clip& clip,
                                    const ProposeResult& initial,
                                    const regions::FunctionalMap& fm, const PlacedScene& placed,
                                    const DetectionMap& dm, agents::AgentBackend& backend,
                                    const agents::LoopConfig& cfg,
                                    const prompts::PromptLibrary& prompts = {}) {
  using Plan = std::map<std::string, Behaviour>;
  std::vector<std::string> characters;
  for (const auto& [name, _] : initial.behaviours) characters.push_back(name);

  json base_ctx{{"clip", clip_digest(ref, clip)},
                {"characters", characters},
                {"boxes", detection_digest(dm)}};
  json fd = functional_digest(fm);
  base_ctx["regions"] = fd["regions"];
  base_ctx["seats"] = fd["seats"];

  auto plan_ctx = [&](const Plan& plan) {
    json ctx = base_ctx;
    ctx["draft"] = json::parse(detail::behaviours_payload(plan, {}));
    json viols = json::array();
    for (const auto& v : validate_blocking(plan, fm, placed, ref))
      viols.push_back({{"character", v.character},
                       {"rule", to_string(v.rule)},
                       {"detail", v.detail}});
    ctx["violations"] = viols;
    return ctx;
  };

  agents::Role d1 = agents::make_role(agents::RoleKind::director, "first director");
  agents::Role d2 = agents::make_role(agents::RoleKind::director, "second director");
  agents::Role cine = agents::make_role(agents::RoleKind::cinematographer, "cinematographer");
  agents::Role designer = agents::make_role(agents::RoleKind::scene_designer, "scene designer");

  std::vector<agents::FeedbackHook<Plan>> feedback_roles;
  auto text_feedback = [&](const agents::Role& role, const std::string& template_name,
                           const std::map<std::string, std::string>& vars) {
    return [&, role, template_name, vars](const Plan& plan) {
      json doc = agents::ask(backend, role, {prompts.render(template_name, vars), plan_ctx(plan)},
                             "feedback", cfg);
      return doc.at("feedback").get<std::string>();
    };
  };
  feedback_roles.push_back({cine, text_feedback(cine, "blocking_feedback_cinematographer", {})});
  feedback_roles.push_back(
      {designer, text_feedback(designer, "blocking_feedback_scene_designer", {})});
  for (const auto& name : characters) {
    agents::Role actor = agents::make_actor(name);
    feedback_roles.push_back(
        {actor, text_feedback(actor, "blocking_feedback_actor", {{"character", name}})});
  }

  auto drj = agents::run_discuss_revise_judge<Plan>(
      d1, [&]() { return std::make_pair(initial.behaviours, initial.payload); }, feedback_roles,
      d1,
      [&](const Plan& plan, const std::vector<std::string>& feedback) {
        json ctx = plan_ctx(plan);
        ctx["feedback"] = feedback;
        json doc =
            agents::ask(backend, d1, {prompts.render("blocking_revise"), ctx}, "blocking", cfg);
        ProposeResult revised = normalize_blocking(doc, characters, fm);
        return std::make_pair(revised.behaviours, revised.payload);
      },
      d2,
      [&](const Plan& plan) {
        json doc = agents::ask(backend, d2, {prompts.render("blocking_judgment"), plan_ctx(plan)},
                               "judgment", cfg);
        bool valid = validate_blocking(plan, fm, placed, ref).empty();
        bool approved = doc.at("approved").get<bool>() && valid;
        std::string note = doc.at("feedback").get<std::string>();
        if (!valid) note += " [blocked: plan has validation violations]";
        return agents::Judgment{approved, note};
      },
      [&](const Plan& plan) {
        return static_cast<double>(validate_blocking(plan, fm, placed, ref).size());
      },
      cfg);

  return {drj.artifact, drj.approved, std::move(drj.transcript)};
}

// ---------------------------------------------------------------------------
// Motion selection

struct MotionResult {
  std::map<std::string, int> motions;
  std::vector<std::string> notes;
  agents::Transcript transcript;
};

namespace detail {

inline int fallback_motion(const MotionCatalog& catalog, BodyState state) {
  for (const auto& [id, entry] : catalog.entries)
    if (entry.state_compat.count(state)) return id;
  return catalog.entries.begin()->first;
}

inline std::map<std::string, int> normalize_motions(
    const json& doc, const std::map<std::string, Behaviour>& behaviours,
    const MotionCatalog& catalog, std::vector<std::string>& notes) {
  std::map<std::string, int> out;
  for (const auto& rec : doc.at("motions")) {
    std::string name = rec.at("character").get<std::string>();
    if (!behaviours.count(name))
      throw UnparseableOutput("motions", "character '" + name + "' has no behaviour in this clip");
    int id = static_cast<int>(rec.at("motion_id").get<long>());
    BodyState state = behaviours.at(name).start_state;
    auto it = catalog.entries.find(id);
    if (it == catalog.entries.end() || !it->second.state_compat.count(state)) {
      int repl = fallback_motion(catalog, state);
      notes.push_back("motion " + std::to_string(id) + " for '" + name +
                      "' is not compatible with state " + previz::to_string(state) +
                      "; fell back to " + std::to_string(repl));
      id = repl;
    }
    out[name] = id;
  }
  for (const auto& [name, _] : behaviours)
    if (!out.count(name)) {
      int repl = fallback_motion(catalog, behaviours.at(name).start_state);
      notes.push_back("no motion proposed for '" + name + "'; fell back to " +
                      std::to_string(repl));
      out[name] = repl;
    }
  return out;
}

inline json motions_payload(const std::map<std::string, int>& motions,
                            const std::vector<std::string>& notes) {
  json list = json::array();
  for (const auto& [name, id] : motions)
    list.push_back({{"character", name}, {"motion_id", id}});
  json out{{"motions", list}};
  if (!notes.empty()) out["normalization_notes"] = notes;
  return out;
}

}  // namespace detail

// Assigns one state-compatible catalog motion per character, refined through
// a screenwriter/actor/director discuss-revise-judge pass.
inline MotionResult select_motion(const ClipRef& ref, const Clip& clip,
                                  const std::map<std::string, Behaviour>& behaviours,
                                  const MotionCatalog& catalog, agents::AgentBackend& backend,
                                  const agents::LoopConfig& cfg,
                                  const prompts::PromptLibrary& prompts = {}) {
  if (catalog.entries.empty()) throw EmptyCatalog("select_motion: motion catalog is empty");
  using Assign = std::map<std::string, int>;

  json behaviours_json = json::object();
  for (const auto& [name, b] : behaviours)
    behaviours_json[name] = {{"start_state", previz::to_string(b.start_state)},
                             {"end_state", previz::to_string(b.end_state)}};
  json catalog_json = json::array();
  for (const auto& [id, entry] : catalog.entries) {
    json states = json::array();
    for (auto s : entry.state_compat) states.push_back(previz::to_string(s));
    catalog_json.push_back(
        {{"id", id}, {"name", entry.name}, {"states", states}, {"tags", entry.tags}});
  }
  std::set<std::string> speaker_set;
  for (const auto& l : clip.lines) speaker_set.insert(l.speaker);

  json base_ctx{{"clip", clip_digest(ref, clip)},
                {"behaviours", behaviours_json},
                {"speakers", std::vector<std::string>(speaker_set.begin(), speaker_set.end())},
                {"catalog", catalog_json}};

  MotionResult result;
  agents::Role writer = agents::make_role(agents::RoleKind::screenwriter, "screenwriter");
  agents::Role director = agents::make_role(agents::RoleKind::director, "director");

  std::vector<agents::FeedbackHook<Assign>> feedback_roles;
  for (const auto& [name, _] : behaviours) {
    agents::Role actor = agents::make_actor(name);
    feedback_roles.push_back({actor, [&, actor, name = name](const Assign& assign) {
                                json ctx = base_ctx;
                                ctx["draft"] = detail::motions_payload(assign, {});
                                json doc = agents::ask(
                                    backend, actor,
                                    {prompts.render("motion_feedback", {{"character", name}}), ctx},
                                    "feedback", cfg);
                                return doc.at("feedback").get<std::string>();
                              }});
  }

  auto drj = agents::run_discuss_revise_judge<Assign>(
      writer,
      [&]() {
        json doc =
            agents::ask(backend, writer, {prompts.render("motion_draft"), base_ctx}, "motions", cfg);
        Assign assign = detail::normalize_motions(doc, behaviours, catalog, result.notes);
        return std::make_pair(assign, detail::motions_payload(assign, result.notes).dump());
      },
      feedback_roles, writer,
      [&](const Assign& assign, const std::vector<std::string>& feedback) {
        json ctx = base_ctx;
        ctx["draft"] = detail::motions_payload(assign, {});
        ctx["feedback"] = feedback;
        json doc = agents::ask(backend, writer, {prompts.render("motion_revise"), ctx}, "motions",
                               cfg);
        Assign revised = detail::normalize_motions(doc, behaviours, catalog, result.notes);
        return std::make_pair(revised, detail::motions_payload(revised, result.notes).dump());
      },
      director,
      [&](const Assign& assign) {
        json ctx = base_ctx;
        ctx["draft"] = detail::motions_payload(assign, {});
        json doc =
            agents::ask(backend, director, {prompts.render("motion_judgment"), ctx}, "judgment", cfg);
        return agents::Judgment{doc.at("approved").get<bool>(),
                                doc.at("feedback").get<std::string>()};
      },
      [](const Assign&) { return 0.0; },  // normalization already guarantees compatibility
      cfg);

  result.motions = drj.artifact;
  result.transcript = std::move(drj.transcript);
  return result;
}

// ---------------------------------------------------------------------------
// Locomotion

namespace detail {

struct AStarNode {
  grid::GridCost g;
  double f = 0.0;
  int r = 0, c = 0;
};

// Octile heuristic as exact step counts, admissible for unit/sqrt2 moves.
inline grid::GridCost octile(int r0, int c0, int r1, int c1) {
  int dr = std::abs(r1 - r0), dc = std::abs(c1 - c0);
  return {std::max(dr, dc) - std::min(dr, dc), std::min(dr, dc)};
}

inline bool segment_clear(const OccupancyGrid& g, Vec2 a, Vec2 b) {
  double len = (b - a).norm();
  int steps = std::max(2, static_cast<int>(std::ceil(len / (g.cell_size * 0.25))));
  for (int i = 0; i <= steps; ++i) {
    double t = static_cast<double>(i) / steps;
    Vec2 p = a + (b - a) * t;
    auto [r, c] = grid::cell_of(g, p);
    if (g.occupied(r, c)) return false;
  }
  return true;
}

}  // namespace detail

// Shortest 8-connected path between free cells; diagonals cost sqrt(2) and
// may not cut occupied corners. The returned polyline is line-of-sight
// simplified; `cost` keeps the un-simplified optimal grid cost.
inline LocomotionPath plan_locomotion(Vec2 start, Vec2 end, const OccupancyGrid& g) {
  auto [sr, sc] = grid::cell_of(g, start);
  auto [er, ec] = grid::cell_of(g, end);
  if (g.occupied(sr, sc)) throw NoPath("plan_locomotion: start cell occupied");
  if (g.occupied(er, ec)) throw NoPath("plan_locomotion: end cell occupied");
  if (sr == er && sc == ec) return {{start}, {}};

  const std::size_t n = g.cells.size();
  std::vector<grid::GridCost> best(n, grid::GridCost{INT_MAX, INT_MAX});
  std::vector<int> parent(n, -1);
  std::vector<char> closed(n, 0);
  auto idx = [&](int r, int c) { return static_cast<std::size_t>(r) * g.cols + c; };

  auto cmp = [](const detail::AStarNode& a, const detail::AStarNode& b) { return a.f > b.f; };
  std::priority_queue<detail::AStarNode, std::vector<detail::AStarNode>, decltype(cmp)> open(cmp);
  best[idx(sr, sc)] = {0, 0};
  open.push({grid::GridCost{0, 0},
             detail::octile(sr, sc, er, ec).value(g.cell_size), sr, sc});

  const int dr[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  const int dc[8] = {0, 0, 1, -1, 1, -1, 1, -1};

  while (!open.empty()) {
    auto node = open.top();
    open.pop();
    std::size_t ni = idx(node.r, node.c);
    if (closed[ni]) continue;
    if (best[ni].less(node.g)) continue;  // stale entry
    closed[ni] = 1;
    if (node.r == er && node.c == ec) break;
    for (int k = 0; k < 8; ++k) {
      int nr = node.r + dr[k], nc = node.c + dc[k];
      if (!g.in_range(nr, nc) || g.occupied(nr, nc)) continue;
      bool diagonal = k >= 4;
      if (diagonal && (g.occupied(node.r, nc) || g.occupied(nr, node.c))) continue;
      grid::GridCost ng = node.g;
      (diagonal ? ng.diagonal : ng.straight) += 1;
      std::size_t nidx = idx(nr, nc);
      if (ng.less(best[nidx])) {
        best[nidx] = ng;
        parent[nidx] = static_cast<int>(ni);
        open.push({ng, ng.value(g.cell_size) +
                           detail::octile(nr, nc, er, ec).value(g.cell_size),
                   nr, nc});
      }
    }
  }

  std::size_t goal = idx(er, ec);
  if (best[goal].straight == INT_MAX) throw NoPath("plan_locomotion: goal unreachable");

  std::vector<Vec2> cells;
  for (int cur = static_cast<int>(goal); cur >= 0; cur = parent[cur])
    cells.push_back(g.cell_center(cur / g.cols, cur % g.cols));
  std::reverse(cells.begin(), cells.end());

  std::vector<Vec2> points;
  points.push_back(start);
  points.insert(points.end(), cells.begin(), cells.end());
  points.push_back(end);

  // greedy line-of-sight simplification
  std::vector<Vec2> simplified;
  std::size_t i = 0;
  simplified.push_back(points[0]);
  while (i + 1 < points.size()) {
    std::size_t j = points.size() - 1;
    while (j > i + 1 && !detail::segment_clear(g, points[i], points[j])) --j;
    simplified.push_back(points[j]);
    i = j;
  }
  return {std::move(simplified), best[goal]};
}

}  // namespace previz::behaviour
