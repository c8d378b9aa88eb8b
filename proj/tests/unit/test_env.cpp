#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "vignette/env/geometry.hpp"
#include "vignette/env/placement.hpp"
#include "vignette/validation.hpp"
#include "vignette/llm/mock.hpp"

using namespace vignette;
using namespace vignette::env;

namespace {

WalkableMask open_mask(int w, int h) { return WalkableMask(w, h, true); }

// Brute force: every in-bounds tile at Chebyshev distance exactly 1 from the rect.
std::vector<Tile> perimeter_oracle(Rect r, const WalkableMask& m) {
  std::vector<Tile> out;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      int dx = std::max({0, r.x - x, x - (r.x + r.w - 1)});
      int dy = std::max({0, r.y - y, y - (r.y + r.h - 1)});
      if (std::max(dx, dy) == 1 && m.walkable({x, y})) out.push_back({x, y});
    }
  std::sort(out.begin(), out.end());
  return out;
}

Environment one_room(int w, int h, const std::string& label = "bedroom") {
  Environment env;
  env.layout_id = "test";
  env.grid_width = w + 2;
  env.grid_height = h + 2;
  env.rooms.push_back({"r0", label, {1, 1, w, h}});
  refresh_walkable_mask(env);
  return env;
}

}  // namespace

TEST_CASE("trigger tiles per zone type") {
  const auto m = open_mask(12, 12);
  CHECK(compute_trigger_tiles({3, 4}, {2, 2}, ZoneType::on, Facing::south, m) ==
        std::vector<Tile>{{3, 4}, {3, 5}, {4, 4}, {4, 5}});

  auto ring = compute_trigger_tiles({5, 5}, {2, 1}, ZoneType::around, Facing::south, m);
  CHECK(ring.size() == 10);
  CHECK(ring == perimeter_oracle({5, 5, 2, 1}, m));

  CHECK(compute_trigger_tiles({2, 2}, {1, 1}, ZoneType::directional, Facing::south, m) == std::vector<Tile>{{2, 3}});
  CHECK(compute_trigger_tiles({2, 2}, {2, 1}, ZoneType::directional, Facing::east, m) == std::vector<Tile>{{4, 2}});
  CHECK(compute_trigger_tiles({2, 2}, {2, 1}, ZoneType::directional, Facing::north, m) == std::vector<Tile>{{2, 1}, {3, 1}});

  // sofa 3x1 facing north: front half rounds up to the whole row; 3x2 facing south keeps the bottom row
  CHECK(compute_trigger_tiles({1, 1}, {3, 2}, ZoneType::partial, Facing::south, m) == std::vector<Tile>{{1, 2}, {2, 2}, {3, 2}});
  CHECK(compute_trigger_tiles({1, 1}, {2, 2}, ZoneType::partial, Facing::south, m, Rect{0, 0, 1, 1}) == std::vector<Tile>{{1, 1}});
}

TEST_CASE("around zones clip to the walkable grid") {
  for (int seed = 0; seed < 30; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed));
    WalkableMask m(10, 8, true);
    for (int i = 0; i < 20; ++i) m.set({static_cast<int>(rng.uniform_index(10)), static_cast<int>(rng.uniform_index(8))}, false);
    Rect r{static_cast<int>(rng.uniform_index(8)), static_cast<int>(rng.uniform_index(6)), 1 + static_cast<int>(rng.uniform_index(2)),
           1 + static_cast<int>(rng.uniform_index(2))};
    auto oracle = perimeter_oracle(r, m);
    if (oracle.empty()) {
      CHECK_THROWS_AS(compute_trigger_tiles({r.x, r.y}, {r.w, r.h}, ZoneType::around, Facing::south, m), ZoneUnreachableError);
    } else {
      CHECK(compute_trigger_tiles({r.x, r.y}, {r.w, r.h}, ZoneType::around, Facing::south, m) == oracle);
    }
  }
  WalkableMask walled(3, 3, false);
  CHECK_THROWS_AS(compute_trigger_tiles({1, 1}, {1, 1}, ZoneType::around, Facing::south, walled), ZoneUnreachableError);
}

TEST_CASE("find_path") {
  SUBCASE("corner to corner in an empty room") {
    auto m = open_mask(7, 5);
    auto p = find_path(m, {0, 0}, {{6, 4}});
    REQUIRE(p);
    CHECK(p->size() == 11);  // 10 steps
    CHECK(p->front() == Tile{0, 0});
    CHECK(p->back() == Tile{6, 4});
  }
  SUBCASE("target ringed by objects") {
    auto m = open_mask(7, 7);
    for (Tile t : Rect{2, 2, 3, 3}.tiles()) m.set(t, false);
    m.set({3, 3}, true);
    CHECK_FALSE(find_path(m, {0, 0}, {{3, 3}}));
  }
  SUBCASE("random masks agree with the relaxation oracle") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed * 977 + 3);
      const int w = 5 + static_cast<int>(rng.uniform_index(15));
      const int h = 5 + static_cast<int>(rng.uniform_index(15));
      WalkableMask m(w, h);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m.set({x, y}, rng.uniform01() > 0.3);
      Tile from{0, 0};
      m.set(from, true);
      std::vector<Tile> targets;
      for (int i = 0; i < 3; ++i) targets.push_back({static_cast<int>(rng.uniform_index(w)), static_cast<int>(rng.uniform_index(h))});
      const int want = fx::oracle_distance(m, from, targets);
      auto p = find_path(m, from, targets);
      INFO("seed " << seed);
      if (want < 0) {
        CHECK_FALSE(p);
        continue;
      }
      REQUIRE(p);
      CHECK(static_cast<int>(p->size()) - 1 == want);
      for (std::size_t i = 0; i < p->size(); ++i) {
        CHECK(m.walkable((*p)[i]));
        if (i) CHECK(std::abs((*p)[i].x - (*p)[i - 1].x) + std::abs((*p)[i].y - (*p)[i - 1].y) == 1);
      }
      CHECK(std::find(targets.begin(), targets.end(), p->back()) != targets.end());
    }
  }
}

TEST_CASE("affordances") {
  ObjectResolver r;
  auto bed = r.assign_affordances("bed");
  CHECK(bed.zone_type == ZoneType::on);
  CHECK_FALSE(bed.needs_facing);
  CHECK(bed.actions == std::vector<std::string>{"sleeping", "resting"});
  auto table = r.assign_affordances("dining table");
  CHECK(table.zone_type == ZoneType::around);
  CHECK_FALSE(table.needs_facing);
  auto fridge = r.assign_affordances("fridge");
  CHECK(fridge.zone_type == ZoneType::directional);
  CHECK(fridge.needs_facing);
  auto unknown = r.assign_affordances("quantum flux capacitor");
  CHECK(unknown.actions == std::vector<std::string>{"inspect"});
  CHECK(unknown.zone_type == ZoneType::around);
}

TEST_CASE("affordances from the gateway are cached per name") {
  auto mock = std::make_shared<llm::ScriptedMock>(llm::MockScript::from_json(llm::Json::parse(
      R"({"entries":[{"template":"AFFORDANCE","when":{"object_name":"easel"},"response":{"actions":["painting"],"zone_type":"directional","needs_facing":true}}]})")));
  llm::Gateway gw(mock);
  ObjectResolver r(AssetCatalog::builtin(), &gw);
  auto a = r.assign_affordances("easel");
  CHECK(a.actions == std::vector<std::string>{"painting"});
  CHECK(a.zone_type == ZoneType::directional);
  r.assign_affordances("Easel");
  CHECK(mock->call_count() == 1);
}

TEST_CASE("place_objects on the residential layout") {
  Environment base = LayoutCatalog::builtin().find("residential_home")->instantiate();
  ObjectResolver resolver;
  std::vector<RequiredObject> req = {{"stove", "kitchen", ObjectKind::necessary_event},
                                     {"dining table", "dining", ObjectKind::necessary_event},
                                     {"chair", "dining", ObjectKind::necessary_event},
                                     {"guitar", "music room", ObjectKind::necessary_event},
                                     {"microphone", "music room", ObjectKind::necessary_event}};
  auto necessities = room_necessities(base, AssetCatalog::builtin());
  req.insert(req.end(), necessities.begin(), necessities.end());
  auto result = place_objects(base, req, resolver);
  CHECK_MESSAGE(result.ok(), (result.unplaceable.empty() ? "" : result.unplaceable[0].name));
  const Environment& env = result.environment;

  int beds = 0;
  for (const auto& o : env.objects) beds += o.asset_id == "bed";
  int bedrooms = 0;
  for (const auto& r : env.rooms) bedrooms += label_matches(r.label, "bedroom");
  CHECK(bedrooms == 2);
  CHECK(beds == bedrooms);

  auto spawn = spawn_tile(env);
  REQUIRE(spawn);
  for (const auto& o : env.objects) {
    INFO(o.id);
    CHECK(fx::oracle_zone_reachable(env, o, *spawn));
    const Room* room = env.find_room(o.room_id);
    REQUIRE(room);
    CHECK(room->rect.contains(o.footprint_rect()));
  }
  const auto* guitar = env.find_object("guitar");
  REQUIRE(guitar);
  CHECK(env.find_room(guitar->room_id)->label == "music room");
  // chairs go next to the table when one exists
  const auto* chair = env.find_object("chair");
  const auto* table = env.find_object("dining_table");
  REQUIRE(chair);
  REQUIRE(table);
  CHECK(rect_distance(chair->footprint_rect(), table->footprint_rect()) <= 1);
  // wall-adjacent classes hug walls
  const auto* stove = env.find_object("stove");
  const Rect kr = env.find_room("r0")->rect;
  const Rect sr = stove->footprint_rect();
  CHECK((sr.x == kr.x || sr.y == kr.y || sr.x + sr.w == kr.x + kr.w || sr.y + sr.h == kr.y + kr.h));

  auto again = place_objects(base, req, resolver);
  CHECK(again.environment == result.environment);
  CHECK(validate_environment(env).ok());
}

TEST_CASE("unplaceable objects are reported") {
  Environment base = one_room(2, 2);
  ObjectResolver resolver;
  auto result = place_objects(base, {{"bed", "bedroom", ObjectKind::necessary_room}}, resolver);
  REQUIRE(result.unplaceable.size() == 1);
  CHECK(result.unplaceable[0].name == "bed");
  CHECK_FALSE(result.unplaceable[0].reasons.empty());
  CHECK(result.environment.objects.empty());

  auto missing = place_objects(base, {{"lamp", "garage", ObjectKind::necessary_event}}, resolver);
  REQUIRE(missing.unplaceable.size() == 1);
}

TEST_CASE("randomized placement instances") {
  const auto& assets = AssetCatalog::builtin().assets();
  ObjectResolver resolver;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed + 101);
    Environment base;
    base.layout_id = "rand";
    const int rooms = 1 + static_cast<int>(rng.uniform_index(3));
    const int rw = 3 + static_cast<int>(rng.uniform_index(6)), rh = 3 + static_cast<int>(rng.uniform_index(6));
    base.grid_width = rooms * (rw + 1) + 1;
    base.grid_height = rh + 2;
    for (int r = 0; r < rooms; ++r) {
      base.rooms.push_back({"r" + std::to_string(r), "room" + std::to_string(r), {1 + r * (rw + 1), 1, rw, rh}});
      if (r) base.doors.push_back({r * (rw + 1), 1 + static_cast<int>(rng.uniform_index(rh))});
    }
    refresh_walkable_mask(base);
    std::vector<RequiredObject> req;
    const int n = 1 + static_cast<int>(rng.uniform_index(8));
    for (int i = 0; i < n; ++i)
      req.push_back({assets[rng.uniform_index(assets.size())].display_name, "room" + std::to_string(rng.uniform_index(rooms)),
                     rng.uniform_index(2) ? ObjectKind::necessary_event : ObjectKind::necessary_room});
    auto result = place_objects(base, req, resolver);
    INFO("seed " << seed);
    const Environment& env = result.environment;
    CHECK(env.objects.size() + result.unplaceable.size() == req.size());
    for (std::size_t i = 0; i < env.objects.size(); ++i)
      for (std::size_t j = i + 1; j < env.objects.size(); ++j) CHECK_FALSE(env.objects[i].footprint_rect().overlaps(env.objects[j].footprint_rect()));
    auto spawn = spawn_tile(env);
    REQUIRE(spawn);
    for (const auto& o : env.objects) CHECK(fx::oracle_zone_reachable(env, o, *spawn));
    auto again = place_objects(base, req, resolver);
    CHECK(again.environment == env);
  }
}

TEST_CASE("decorative fill") {
  Environment base = LayoutCatalog::builtin().find("residential_home")->instantiate();
  ObjectResolver resolver;
  auto placed = place_objects(base, room_necessities(base, AssetCatalog::builtin()), resolver);
  REQUIRE(placed.ok());
  const Environment before = placed.environment;

  CHECK(fill_decorative(before, resolver, 0.0).environment.objects.size() == before.objects.size());

  auto filled = fill_decorative(before, resolver, 0.3);
  const Environment& after = filled.environment;
  CHECK(after.objects.size() > before.objects.size());
  bool bedroom_lamp_or_rug = false;
  for (const auto& o : after.objects) {
    const Room* room = after.find_room(o.room_id);
    if (o.kind == ObjectKind::decorative && label_matches(room->label, "bedroom") && (o.asset_id == "lamp" || o.asset_id == "rug"))
      bedroom_lamp_or_rug = true;
  }
  CHECK(bedroom_lamp_or_rug);

  auto spawn = spawn_tile(before);
  REQUIRE(spawn);
  REQUIRE(spawn_tile(after) == spawn);
  for (const auto& o : before.objects) {
    const auto* now = after.find_object(o.id);
    REQUIRE(now);
    CHECK(fx::oracle_zone_reachable(after, *now, *spawn));
  }
  // reachable set only loses the tiles the new footprints cover
  auto d0 = fx::relaxation_distances(derive_walkable_mask(before), *spawn);
  auto d1 = fx::relaxation_distances(derive_walkable_mask(after), *spawn);
  std::set<Tile> covered;
  for (const auto& o : after.objects)
    if (!before.find_object(o.id))
      for (Tile t : o.footprint_rect().tiles()) covered.insert(t);
  for (int y = 0; y < after.grid_height; ++y)
    for (int x = 0; x < after.grid_width; ++x) {
      const auto i = static_cast<std::size_t>(y * after.grid_width + x);
      if (d0[i] != INT_MAX && !covered.count({x, y})) CHECK(d1[i] != INT_MAX);
    }
  for (double density : {0.1, 0.5, 1.0}) {
    const auto f = fill_decorative(before, resolver, density).environment;
    for (std::size_t i = 0; i < f.objects.size(); ++i)
      for (std::size_t j = i + 1; j < f.objects.size(); ++j) CHECK_FALSE(f.objects[i].footprint_rect().overlaps(f.objects[j].footprint_rect()));
  }
}

TEST_CASE("validate_environment") {
  const auto kelly = fx::kelly_spec();
  CHECK(validate_environment(kelly).ok());

  auto overlapping = kelly.environment;
  overlapping.objects.push_back(fx::make_object("lamp", "lamp", "r3", {1, 14}, ObjectKind::decorative));
  rebuild_zones(overlapping);
  CHECK(validate_environment(overlapping).has(ViolationCode::OVERLAP));

  // wall the stove off: counters below its front row, ovens on both sides
  auto walled = kelly.environment;
  walled.objects.push_back(fx::make_object("c1", "counter", "r0", {1, 3}, ObjectKind::decorative));
  walled.objects.push_back(fx::make_object("c2", "counter", "r0", {3, 3}, ObjectKind::decorative));
  walled.objects.push_back(fx::make_object("o1", "oven", "r0", {1, 2}, ObjectKind::decorative));
  walled.objects.push_back(fx::make_object("o2", "oven", "r0", {4, 2}, ObjectKind::decorative));
  rebuild_zones(walled);
  auto spawn = spawn_tile(walled);
  REQUIRE(spawn);
  const auto* s2 = walled.find_object("stove");
  CHECK_FALSE(fx::oracle_zone_reachable(walled, *s2, *spawn));
  auto report = validate_environment(walled);
  CHECK(report.has(ViolationCode::UNREACHABLE));
  bool names_stove = false;
  for (const auto& v : report.violations) names_stove |= v.message.find("UNREACHABLE(stove)") != std::string::npos;
  CHECK(names_stove);

  auto missing = kelly;
  missing.key_events[2].activities[0].object_id = "drum";
  CHECK(validate_environment(missing).has(ViolationCode::EVENT_OBJECT_MISSING));
}
