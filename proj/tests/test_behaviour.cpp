#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "previz/backends.hpp"
#include "previz/behaviour.hpp"
#include "previz/layout.hpp"

using namespace previz;
using agents::json;
using behaviour::ClipRef;

namespace {

PlacedScene office_scene() {
  SceneGraph g;
  g.objects = {{"desk", "desk", ObjectKind::anchor, 1.4, 0.7, 0.75, {}},
               {"stool", "stool", ObjectKind::anchor, 0.5, 0.5, 0.45, {}}};
  auto grid = layout::build_floor_grid({{0.0, 0.0}, {5.0, 5.0}}, 0.1);
  return layout::place_non_anchors(g, layout::place_anchors(g, grid, 0), 0);
}

struct Maps {
  PlacedScene scene;
  behaviour::DetectionMap dm;
  regions::FunctionalMap fm;
};

Maps office_maps() {
  Maps m;
  m.scene = office_scene();
  auto [flagged, spots] = regions::infer_sittable(m.scene);
  m.scene = flagged;
  regions::RegionLossParams p;
  auto cams = regions::default_visibility_cameras(m.scene.bounds);
  auto selected = regions::select_performing_regions(m.scene, p, cams);
  m.fm = regions::build_functional_map(selected, spots, p);
  m.dm = behaviour::build_detection_map(m.scene);
  return m;
}

Clip two_line_clip() {
  Clip clip;
  clip.index = 1;
  clip.lines = {{"Ava", "Sit down, please."}, {"Ben", "I would rather stand."}};
  clip.duration_s = 4.0;
  return clip;
}

json behaviour_record(const std::string& name, const json& start_kind, const json& end_kind,
                      double facing = 0.0) {
  json rec{{"character", name},
           {"start_state", start_kind.contains("seat") ? "sitting" : "standing"},
           {"end_state", end_kind.contains("seat") ? "sitting" : "standing"},
           {"start_facing", facing},
           {"end_facing", facing}};
  for (const auto& [k, v] : start_kind.items()) rec["start_" + k] = v;
  for (const auto& [k, v] : end_kind.items()) rec["end_" + k] = v;
  return rec;
}

// independent shortest-path oracle: label-correcting relaxation to fixpoint
// over the same 8-connected move set
std::optional<grid::GridCost> oracle_cost(const OccupancyGrid& g, std::pair<int, int> s,
                                          std::pair<int, int> e) {
  const grid::GridCost kInf{INT_MAX, INT_MAX};
  std::vector<grid::GridCost> dist(g.cells.size(), kInf);
  auto idx = [&](int r, int c) { return static_cast<std::size_t>(r) * g.cols + c; };
  dist[idx(s.first, s.second)] = {0, 0};
  bool changed = true;
  while (changed) {
    changed = false;
    for (int r = 0; r < g.rows; ++r) {
      for (int c = 0; c < g.cols; ++c) {
        if (g.occupied(r, c) || dist[idx(r, c)] == kInf) continue;
        const int dr[8] = {1, -1, 0, 0, 1, 1, -1, -1};
        const int dc[8] = {0, 0, 1, -1, 1, -1, 1, -1};
        for (int k = 0; k < 8; ++k) {
          int nr = r + dr[k], nc = c + dc[k];
          if (!g.in_range(nr, nc) || g.occupied(nr, nc)) continue;
          if (k >= 4 && (g.occupied(r, nc) || g.occupied(nr, c))) continue;
          grid::GridCost cand = dist[idx(r, c)];
          (k >= 4 ? cand.diagonal : cand.straight) += 1;
          if (cand.less(dist[idx(nr, nc)])) {
            dist[idx(nr, nc)] = cand;
            changed = true;
          }
        }
      }
    }
  }
  if (dist[idx(e.first, e.second)] == kInf) return std::nullopt;
  return dist[idx(e.first, e.second)];
}

}  // namespace

TEST_CASE("build_detection_map mirrors poses exactly") {
  auto scene = office_scene();
  auto dm = behaviour::build_detection_map(scene);
  CHECK(dm.boxes.size() == scene.poses.size());
  for (const auto& box : dm.boxes) {
    const Pose& pose = scene.poses.at(box.id);
    const SceneObject* obj = scene.scene_graph.find(box.id);
    CHECK_THAT(box.center.x, Catch::Matchers::WithinAbs(pose.position.x, 1e-9));
    CHECK_THAT(box.center.y, Catch::Matchers::WithinAbs(pose.position.y, 1e-9));
    CHECK(box.yaw == pose.yaw);
    CHECK(box.width == obj->width);
    CHECK(box.depth == obj->depth);
  }

  PlacedScene empty;
  empty.bounds = {{0, 0}, {5, 5}};
  CHECK(behaviour::build_detection_map(empty).boxes.empty());
}

TEST_CASE("normalize_blocking snaps standing endpoints to region centers") {
  auto m = office_maps();
  auto parcel_it = m.fm.standing_regions.begin();
  regions::ParcelIndex parcel = parcel_it->first;
  Vec2 center = parcel_it->second.region.center;

  json doc{{"behaviours",
            json::array({behaviour_record(
                "Ava", {{"parcel", {parcel.row, parcel.col}}},
                {{"parcel", {parcel.row, parcel.col}}})})}};
  auto result = behaviour::normalize_blocking(doc, {"Ava"}, m.fm);
  CHECK(result.behaviours.at("Ava").start_pos == center);
  CHECK(result.behaviours.at("Ava").end_pos == center);

  // raw positions snap to the nearest region center
  json doc2{{"behaviours",
             json::array({behaviour_record("Ava", {{"pos", {center.x + 0.04, center.y - 0.03}}},
                                           {{"pos", {center.x, center.y}}})})}};
  auto snapped = behaviour::normalize_blocking(doc2, {"Ava"}, m.fm);
  CHECK(snapped.behaviours.at("Ava").start_pos == center);
}

TEST_CASE("normalize_blocking rejects unknown characters and unknown refs") {
  auto m = office_maps();
  json doc{{"behaviours",
            json::array({behaviour_record("Mallory", {{"pos", {1.0, 1.0}}}, {{"pos", {1.0, 1.0}}})})}};
  CHECK_THROWS_AS(behaviour::normalize_blocking(doc, {"Ava"}, m.fm), UnparseableOutput);

  json doc2{{"behaviours",
             json::array({behaviour_record("Ava", {{"parcel", {99, 99}}}, {{"pos", {1.0, 1.0}}})})}};
  CHECK_THROWS_AS(behaviour::normalize_blocking(doc2, {"Ava"}, m.fm), UnparseableOutput);

  json doc3{{"behaviours",
             json::array({behaviour_record("Ava", {{"seat", "ghost"}}, {{"pos", {1.0, 1.0}}})})}};
  CHECK_THROWS_AS(behaviour::normalize_blocking(doc3, {"Ava"}, m.fm), UnparseableOutput);
}

TEST_CASE("a doubly-claimed seat sends the second character to a free region") {
  auto m = office_maps();
  REQUIRE_FALSE(m.fm.sittable_spots.empty());
  std::string seat = m.fm.sittable_spots[0].object_id;
  Vec2 seat_pos = m.fm.sittable_spots[0].seat;

  json doc{{"behaviours", json::array({
                              behaviour_record("Ava", {{"seat", seat}}, {{"seat", seat}}),
                              behaviour_record("Ben", {{"seat", seat}}, {{"seat", seat}}),
                          })}};
  auto result = behaviour::normalize_blocking(doc, {"Ava", "Ben"}, m.fm);
  CHECK(result.behaviours.at("Ava").start_state == BodyState::sitting);
  CHECK(result.behaviours.at("Ava").start_pos == seat_pos);
  CHECK(result.behaviours.at("Ben").start_state == BodyState::standing);
  CHECK_FALSE(result.notes.empty());

  // nearest-free-region oracle: Ben lands on the region center closest to
  // the seat he lost
  double best = std::numeric_limits<double>::infinity();
  Vec2 best_center;
  for (const auto& [parcel, sr] : m.fm.standing_regions) {
    double d = (sr.region.center - seat_pos).norm();
    if (d < best) {
      best = d;
      best_center = sr.region.center;
    }
  }
  CHECK(result.behaviours.at("Ben").start_pos == best_center);
}

TEST_CASE("propose_blocking drives the scripted backend and snaps the result") {
  auto m = office_maps();
  agents::ScriptedBackend backend;
  Clip clip = two_line_clip();
  auto result = behaviour::propose_blocking({1, 1}, clip, m.dm, m.fm, {"Ava", "Ben"}, backend, {});
  REQUIRE(result.behaviours.size() == 2);
  for (const auto& [name, b] : result.behaviours) {
    if (b.start_state == BodyState::standing) {
      bool on_region = false;
      for (const auto& [parcel, sr] : m.fm.standing_regions)
        on_region |= (b.start_pos == sr.region.center);
      CHECK(on_region);
    }
  }
}

TEST_CASE("validate_blocking catches every rule") {
  auto m = office_maps();
  auto region_center = [&](int i) {
    auto it = m.fm.standing_regions.begin();
    std::advance(it, i);
    return it->second.region.center;
  };

  std::map<std::string, Behaviour> good;
  Vec2 a = region_center(0);
  // pick a partner region at least 0.5 m away
  Vec2 b;
  for (const auto& [parcel, sr] : m.fm.standing_regions)
    if ((sr.region.center - a).norm() >= 0.5) {
      b = sr.region.center;
      break;
    }
  double ab = std::atan2(b.y - a.y, b.x - a.x);
  good["Ava"] = {"Ava", BodyState::standing, BodyState::standing, a, a, normalize_yaw(ab),
                 normalize_yaw(ab)};
  good["Ben"] = {"Ben", BodyState::standing, BodyState::standing, b, b,
                 normalize_yaw(ab + std::numbers::pi), normalize_yaw(ab + std::numbers::pi)};
  CHECK(behaviour::validate_blocking(good, m.fm, m.scene).empty());

  SECTION("standing mid-obstacle is a collision") {
    auto bad = good;
    bad["Ava"].start_pos = m.scene.poses.at("desk").position;
    auto violations = behaviour::validate_blocking(bad, m.fm, m.scene);
    bool saw = false;
    for (const auto& v : violations) saw |= v.rule == behaviour::BlockingRule::collision;
    CHECK(saw);
  }
  SECTION("two characters on the same seat") {
    REQUIRE_FALSE(m.fm.sittable_spots.empty());
    auto bad = good;
    const auto& spot = m.fm.sittable_spots[0];
    for (auto* name : {"Ava", "Ben"}) {
      bad[name].start_state = BodyState::sitting;
      bad[name].start_pos = spot.seat;
      bad[name].start_facing = spot.seat_yaw;
    }
    auto violations = behaviour::validate_blocking(bad, m.fm, m.scene);
    bool saw = false;
    for (const auto& v : violations) saw |= v.rule == behaviour::BlockingRule::occupied_seat;
    CHECK(saw);
  }
  SECTION("facing exactly away from the partner") {
    auto bad = good;
    // bearing arithmetic oracle: pi off the bearing is the worst case
    bad["Ava"].start_facing = normalize_yaw(ab + std::numbers::pi);
    auto violations = behaviour::validate_blocking(bad, m.fm, m.scene);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].rule == behaviour::BlockingRule::facing_away);
    CHECK(violations[0].character == "Ava");
  }
  SECTION("position outside the scene bounds") {
    auto bad = good;
    bad["Ava"].end_pos = {99.0, 99.0};
    auto violations = behaviour::validate_blocking(bad, m.fm, m.scene);
    bool saw = false;
    for (const auto& v : violations) saw |= v.rule == behaviour::BlockingRule::out_of_bounds;
    CHECK(saw);
  }
  SECTION("standing off every region") {
    auto bad = good;
    bad["Ava"].start_pos = {0.05, 0.05};
    bad["Ava"].end_pos = {0.05, 0.05};
    auto violations = behaviour::validate_blocking(bad, m.fm, m.scene);
    bool saw = false;
    for (const auto& v : violations) saw |= v.rule == behaviour::BlockingRule::off_region;
    CHECK(saw);
  }
  SECTION("characters closer than the minimum distance") {
    auto bad = good;
    bad["Ben"].start_pos = a + Vec2{0.2, 0.0};
    auto violations = behaviour::validate_blocking(bad, m.fm, m.scene);
    bool saw = false;
    for (const auto& v : violations) saw |= v.rule == behaviour::BlockingRule::collision;
    CHECK(saw);
  }
}

TEST_CASE("refine_blocking approves a valid plan in one round") {
  auto m = office_maps();
  agents::ScriptedBackend backend;
  Clip clip = two_line_clip();
  auto initial = behaviour::propose_blocking({1, 1}, clip, m.dm, m.fm, {"Ava", "Ben"}, backend, {});
  auto refined =
      behaviour::refine_blocking({1, 1}, clip, initial, m.fm, m.scene, m.dm, backend, {});
  CHECK(refined.approved);
  CHECK(refined.behaviours == initial.behaviours);
  CHECK(refined.transcript.count(agents::MessageKind::judgment) == 1);
  // feedback from cinematographer, scene designer and one actor per character
  CHECK(refined.transcript.count(agents::MessageKind::feedback) == 4);
}

TEST_CASE("refine_blocking runs to the cap under a rejecting judge and flags best effort") {
  auto m = office_maps();
  json always_reject{{"fallback_to_rules", true},
                     {"responses",
                      {{"judgment",
                        json::array({json{{"approved", false}, {"feedback", "again"}}.dump(),
                                     json{{"approved", false}, {"feedback", "again"}}.dump(),
                                     json{{"approved", false}, {"feedback", "again"}}.dump()})}}}};
  agents::ScriptedBackend backend(always_reject);
  Clip clip = two_line_clip();
  auto initial = behaviour::propose_blocking({1, 1}, clip, m.dm, m.fm, {"Ava", "Ben"}, backend, {});
  auto refined =
      behaviour::refine_blocking({1, 1}, clip, initial, m.fm, m.scene, m.dm, backend, {});
  CHECK_FALSE(refined.approved);
  CHECK(refined.transcript.count(agents::MessageKind::judgment) == 3);
  // the retained plan minimizes the violation count; the scripted revisions
  // echo the valid initial plan, so zero violations is achievable
  CHECK(behaviour::validate_blocking(refined.behaviours, m.fm, m.scene).empty());
}

TEST_CASE("select_motion assigns state-compatible motions") {
  MotionCatalog catalog;
  catalog.entries[17] = {"Talking", {BodyState::standing}, "talk gesture"};
  catalog.entries[20] = {"Thoughtful Head Shake", {BodyState::standing}, "idle react"};
  catalog.entries[29] = {"Sitting Idle", {BodyState::sitting}, "idle sit"};

  std::map<std::string, Behaviour> behaviours;
  behaviours["Elias"] = {"Elias", BodyState::sitting, BodyState::sitting, {1, 1}, {1, 1}, 0, 0};
  behaviours["Maya"] = {"Maya", BodyState::standing, BodyState::standing, {2, 2}, {2, 2}, 0, 0};

  Clip clip;
  clip.index = 1;
  clip.lines = {{"Maya", "We need to leave."}};
  clip.duration_s = 2.0;

  SECTION("a sitting-compatible proposal is accepted") {
    json fixture{{"fallback_to_rules", true},
                 {"responses",
                  {{"motions",
                    json::array({json{{"motions",
                                       json::array({{{"character", "Elias"}, {"motion_id", 29}},
                                                    {{"character", "Maya"}, {"motion_id", 17}}})}}
                                     .dump()})}}}};
    agents::ScriptedBackend backend(fixture);
    auto result = behaviour::select_motion({1, 1}, clip, behaviours, catalog, backend, {});
    CHECK(result.motions.at("Elias") == 29);
    CHECK(result.motions.at("Maya") == 17);
    CHECK(result.notes.empty());
  }

  SECTION("a standing-only motion for a sitting character falls back, flagged") {
    json fixture{{"fallback_to_rules", true},
                 {"responses",
                  {{"motions",
                    json::array({json{{"motions",
                                       json::array({{{"character", "Elias"}, {"motion_id", 17}},
                                                    {{"character", "Maya"}, {"motion_id", 17}}})}}
                                     .dump()})}}}};
    agents::ScriptedBackend backend(fixture);
    auto result = behaviour::select_motion({1, 1}, clip, behaviours, catalog, backend, {});
    CHECK(result.motions.at("Elias") == 29);  // lowest sitting-compatible id
    CHECK_FALSE(result.notes.empty());
  }

  SECTION("empty catalog is an error") {
    agents::ScriptedBackend backend;
    MotionCatalog empty;
    CHECK_THROWS_AS(behaviour::select_motion({1, 1}, clip, behaviours, empty, backend, {}),
                    EmptyCatalog);
  }
}

TEST_CASE("plan_locomotion identity and corridor cases") {
  auto g = grid::make_grid({0, 0}, 0.1, 50, 50);
  auto same = behaviour::plan_locomotion({1.0, 1.0}, {1.0, 1.0}, g);
  CHECK(same.waypoints.size() == 1);
  CHECK(same.cost == grid::GridCost{0, 0});

  auto straight = behaviour::plan_locomotion({1.05, 1.05}, {2.05, 1.05}, g);
  CHECK(straight.cost == grid::GridCost{10, 0});
  CHECK_THAT(straight.cost.value(0.1), Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK(straight.waypoints.front() == Vec2{1.05, 1.05});
  CHECK(straight.waypoints.back() == Vec2{2.05, 1.05});
}

TEST_CASE("plan_locomotion goes through the single gap in a wall") {
  auto g = grid::make_grid({0, 0}, 0.1, 50, 50);
  for (int r = 0; r < 50; ++r)
    if (r != 25) g.at(r, 20) = 1;  // wall along col 20 with a gap at row 25

  Vec2 start{1.05, 0.55}, end{3.05, 0.55};
  auto path = behaviour::plan_locomotion(start, end, g);

  auto want = oracle_cost(g, grid::cell_of(g, start), grid::cell_of(g, end));
  REQUIRE(want.has_value());
  CHECK(path.cost == *want);

  // every simplified segment is clear of occupied cells
  for (std::size_t i = 0; i + 1 < path.waypoints.size(); ++i) {
    Vec2 a = path.waypoints[i], b = path.waypoints[i + 1];
    for (int k = 0; k <= 400; ++k) {
      Vec2 p = a + (b - a) * (k / 400.0);
      auto [r, c] = grid::cell_of(g, p);
      CHECK_FALSE(g.occupied(r, c));
    }
  }
}

TEST_CASE("plan_locomotion errors") {
  auto g = grid::make_grid({0, 0}, 0.1, 20, 20);
  for (int c = 0; c < 20; ++c) g.at(10, c) = 1;  // full wall, no gap
  CHECK_THROWS_AS(behaviour::plan_locomotion({0.55, 0.55}, {0.55, 1.55}, g), NoPath);

  auto g2 = grid::make_grid({0, 0}, 0.1, 20, 20);
  g2.at(5, 5) = 1;
  CHECK_THROWS_AS(behaviour::plan_locomotion({0.55, 0.55}, {0.55, 0.55}, g2), NoPath);
}

TEST_CASE("plan_locomotion matches the oracle on random grids", "[property]") {
  std::mt19937 rng(42);
  std::bernoulli_distribution wall(0.25);
  for (int trial = 0; trial < 25; ++trial) {
    auto g = grid::make_grid({0, 0}, 0.1, 30, 30);
    for (auto& cell : g.cells) cell = wall(rng) ? 1 : 0;
    g.at(0, 0) = 0;
    g.at(29, 29) = 0;
    Vec2 start = g.cell_center(0, 0), end = g.cell_center(29, 29);
    auto want = oracle_cost(g, {0, 0}, {29, 29});
    if (!want) {
      CHECK_THROWS_AS(behaviour::plan_locomotion(start, end, g), NoPath);
      continue;
    }
    auto path = behaviour::plan_locomotion(start, end, g);
    CHECK(path.cost == *want);
    CHECK(path.cost.value(g.cell_size) == want->value(g.cell_size));
  }
}

TEST_CASE("obstacle inflation keeps the clearance boundary navigable") {
  auto g = grid::make_grid({0, 0}, 0.1, 20, 20);
  g.at(10, 10) = 1;
  auto inflated = grid::inflate_obstacles(g, 0.3);
  // cells exactly 3 cells away stay free; nearer cells are blocked
  CHECK_FALSE(inflated.occupied(10, 13));
  CHECK(inflated.occupied(10, 12));
  CHECK(inflated.occupied(12, 11));
  CHECK_FALSE(inflated.occupied(13, 10));
}
