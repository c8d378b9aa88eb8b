#include "vignette/env/placement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "vignette/env/geometry.hpp"
#include "vignette/util.hpp"

namespace vignette::env {

namespace {

constexpr const char* kGenericAsset = "generic";

Affordance generic_affordance() { return {{"inspect"}, ZoneType::around, false}; }

Affordance from_asset(const AssetSpec& a) {
  return {a.actions.empty() ? std::vector<std::string>{"inspect"} : a.actions, a.zone_type, a.needs_facing};
}

std::optional<Affordance> affordance_from_json(const llm::Json& doc) {
  Affordance out;
  for (const auto& a : doc.at("actions"))
    if (a.is_string() && !a.get<std::string>().empty()) out.actions.push_back(a.get<std::string>());
  auto zone = parse_zone_type(doc.at("zone_type").get<std::string>());
  if (out.actions.empty() || !zone) return std::nullopt;
  out.zone_type = *zone;
  out.needs_facing = doc.at("needs_facing").get<bool>() || *zone == ZoneType::directional;
  return out;
}

bool room_matches_hint(const Room& room, std::string_view hint) {
  if (hint.empty()) return true;
  if (room.id == hint) return true;
  if (room.label.empty()) return false;
  return normalize_name(room.label) == normalize_name(hint) || label_matches(room.label, hint);
}

Facing facing_for(const Rect& fp, const Rect& room) {
  if (fp.y == room.y) return Facing::south;
  if (fp.x == room.x) return Facing::east;
  if (fp.x + fp.w == room.x + room.w) return Facing::west;
  if (fp.y + fp.h == room.y + room.h) return Facing::north;
  return Facing::south;
}

bool touches_wall(const Rect& fp, const Rect& room) {
  return fp.x == room.x || fp.y == room.y || fp.x + fp.w == room.x + room.w || fp.y + fp.h == room.y + room.h;
}

std::optional<Rect> partial_rect_for(const ObjectInstance& obj, const AssetCatalog& catalog) {
  if (const AssetSpec* a = catalog.find(obj.asset_id)) return a->partial_rect;
  return std::nullopt;
}

/// Recomputes zones and the mask. False when some object's zone came out empty.
bool apply_zones(Environment& env, const AssetCatalog& catalog) {
  const WalkableMask bounds(env.grid_width, env.grid_height, true);
  bool all_ok = true;
  for (auto& obj : env.objects) {
    if (obj.zone.type != ZoneType::on && obj.zone.type != ZoneType::partial) continue;
    try {
      obj.zone.tiles = compute_trigger_tiles(obj.position, obj.footprint, obj.zone.type, obj.facing, bounds,
                                             partial_rect_for(obj, catalog));
    } catch (const ZoneUnreachableError&) {
      obj.zone.tiles.clear();
      all_ok = false;
    }
  }
  env.walkable_mask = derive_walkable_mask(env);
  for (auto& obj : env.objects) {
    if (obj.zone.type == ZoneType::on || obj.zone.type == ZoneType::partial) continue;
    try {
      obj.zone.tiles = compute_trigger_tiles(obj.position, obj.footprint, obj.zone.type, obj.facing, env.walkable_mask);
    } catch (const ZoneUnreachableError&) {
      obj.zone.tiles.clear();
      all_ok = false;
    }
  }
  return all_ok;
}

bool zone_reachable(const ObjectInstance& obj, const WalkableMask& reach) {
  return std::any_of(obj.zone.tiles.begin(), obj.zone.tiles.end(), [&](Tile t) { return reach.walkable(t); });
}

std::string unique_id(const Environment& env, const std::string& name) {
  std::string base = slugify(name);
  if (base.empty()) base = "object";
  std::string id = base;
  for (int n = 2; env.find_object(id); ++n) id = base + "_" + std::to_string(n);
  return id;
}

int near_score(const Environment& env, const ObjectTraits& traits, const Rect& fp) {
  int score = 0;
  for (const auto& rule : traits.near) {
    int best = std::numeric_limits<int>::max();
    for (const auto& other : env.objects)
      if (other.asset_id == rule.anchor) best = std::min(best, rect_distance(fp, other.footprint_rect()));
    if (best == std::numeric_limits<int>::max()) continue;  // anchor absent: rule does not apply
    score += best <= rule.max_distance ? 10 : -best;
  }
  return score;
}

struct RejectCounts {
  int no_room = 0;
  int too_big = 0;
  int overlap = 0;
  int wall = 0;
  int spawn = 0;
  int zone = 0;
  int blocks = 0;
  int shrinks = 0;
  int candidates = 0;

  std::vector<std::string> reasons(const ObjectTraits& t, std::string_view hint) const {
    std::vector<std::string> out;
    if (no_room) out.push_back("no room matches '" + std::string(hint) + "'");
    if (too_big)
      out.push_back("footprint " + std::to_string(t.footprint.w) + "x" + std::to_string(t.footprint.h) +
                    " does not fit the room");
    if (overlap) out.push_back("every fitting position overlaps another object");
    if (wall) out.push_back("no free position against a wall");
    if (spawn) out.push_back("position would cover the spawn tile");
    if (zone) out.push_back("trigger zone not reachable from spawn");
    if (blocks) out.push_back("position would cut off another object");
    if (shrinks) out.push_back("position would block a walkway");
    if (out.empty()) out.push_back("no candidate position");
    return out;
  }
};

struct Attempt {
  std::optional<Environment> env;
  std::string id;
  RejectCounts rejects;
};

/// Best feasible cell over the rooms matching `hint`; the returned environment has the object added.
Attempt try_place(const Environment& base, const ObjectTraits& traits, const std::string& name, std::string_view hint,
                  ObjectKind kind, Tile spawn, const AssetCatalog& catalog, bool keep_reach) {
  Attempt out;
  std::optional<WalkableMask> before;
  if (keep_reach) before = reachable_from(derive_walkable_mask(base), spawn);
  const std::string id = unique_id(base, name);
  int best_score = std::numeric_limits<int>::min();
  bool any_room = false;
  for (const auto& room : base.rooms) {
    if (!room_matches_hint(room, hint)) continue;
    any_room = true;
    const Rect& r = room.rect;
    if (traits.footprint.w > r.w || traits.footprint.h > r.h) {
      ++out.rejects.too_big;
      continue;
    }
    for (int y = r.y; y + traits.footprint.h <= r.y + r.h; ++y) {
      for (int x = r.x; x + traits.footprint.w <= r.x + r.w; ++x) {
        ++out.rejects.candidates;
        const Rect fp{x, y, traits.footprint.w, traits.footprint.h};
        if (std::any_of(base.objects.begin(), base.objects.end(),
                        [&](const ObjectInstance& o) { return o.footprint_rect().overlaps(fp); })) {
          ++out.rejects.overlap;
          continue;
        }
        if (traits.wall_adjacent && !touches_wall(fp, r)) {
          ++out.rejects.wall;
          continue;
        }
        if (fp.contains(spawn)) {
          ++out.rejects.spawn;
          continue;
        }
        const int score = near_score(base, traits, fp);
        if (score <= best_score) continue;

        Environment env = base;
        ObjectInstance obj;
        obj.id = id;
        obj.name = name;
        obj.room_id = room.id;
        obj.position = {x, y};
        obj.footprint = traits.footprint;
        obj.actions = traits.affordance.actions;
        obj.zone.type = traits.affordance.zone_type;
        obj.kind = kind;
        obj.facing = traits.affordance.needs_facing ? facing_for(fp, r) : Facing::south;
        obj.asset_id = traits.asset_id;
        env.objects.push_back(obj);
        const bool zones_ok = apply_zones(env, catalog);
        const ObjectInstance& placed = env.objects.back();
        if (placed.zone.tiles.empty()) {
          ++out.rejects.zone;
          continue;
        }
        if (!zones_ok) {
          ++out.rejects.blocks;
          continue;
        }
        const WalkableMask reach = reachable_from(env.walkable_mask, spawn);
        if (!zone_reachable(placed, reach)) {
          ++out.rejects.zone;
          continue;
        }
        bool others_ok = true;
        for (std::size_t i = 0; i + 1 < env.objects.size(); ++i)
          if (!zone_reachable(env.objects[i], reach)) others_ok = false;
        if (!others_ok) {
          ++out.rejects.blocks;
          continue;
        }
        if (before) {
          bool shrinks = false;
          for (Tile t : Rect{0, 0, env.grid_width, env.grid_height}.tiles())
            if (before->walkable(t) && !fp.contains(t) && !reach.walkable(t)) shrinks = true;
          if (shrinks) {
            ++out.rejects.shrinks;
            continue;
          }
        }
        best_score = score;
        out.env = std::move(env);
        out.id = id;
      }
    }
  }
  if (!any_room) ++out.rejects.no_room;
  return out;
}

int kind_rank(ObjectKind k) {
  switch (k) {
    case ObjectKind::necessary_event: return 0;
    case ObjectKind::necessary_room: return 1;
    case ObjectKind::decorative: return 2;
  }
  return 3;
}

}  // namespace

Affordance ObjectResolver::assign_affordances(std::string_view object_name) {
  const std::string key = normalize_name(object_name);
  {
    std::lock_guard lock(mutex_);
    if (auto it = affordances_.find(key); it != affordances_.end()) return it->second;
  }
  Affordance out = generic_affordance();
  if (const AssetSpec* a = catalog_.match_name(object_name)) {
    out = from_asset(*a);
  } else if (gateway_) {
    auto res = gateway_->complete({llm::TemplateId::AFFORDANCE, {{"object_name", std::string(object_name)}}, ""});
    if (res.ok())
      if (auto parsed = affordance_from_json(*res.parsed)) out = *parsed;
  }
  std::lock_guard lock(mutex_);
  affordances_.emplace(key, out);
  return out;
}

ObjectTraits ObjectResolver::resolve(std::string_view object_name, std::string_view room_label) {
  if (const AssetSpec* a = catalog_.match_name(object_name)) {
    ObjectTraits t;
    t.name = std::string(object_name);
    t.asset_id = a->id;
    t.footprint = a->footprint;
    t.affordance = from_asset(*a);
    t.wall_adjacent = a->wall_adjacent;
    t.near = a->near;
    t.partial_rect = a->partial_rect;
    t.from_catalog = true;
    return t;
  }
  const std::string key = normalize_name(object_name) + "\n" + normalize_name(room_label);
  {
    std::lock_guard lock(mutex_);
    if (auto it = traits_.find(key); it != traits_.end()) return it->second;
  }
  ObjectTraits t;
  t.name = std::string(object_name);
  t.asset_id = kGenericAsset;
  t.affordance = assign_affordances(object_name);
  if (gateway_) {
    auto res = gateway_->complete({llm::TemplateId::PLACE_REASONING,
                                   {{"object_name", std::string(object_name)},
                                    {"room_label", std::string(room_label)},
                                    {"existing", ""}},
                                   ""});
    if (res.ok()) {
      const auto& doc = *res.parsed;
      const auto& fp = doc.at("footprint");
      t.footprint = {std::clamp(fp[0].get<int>(), 1, 4), std::clamp(fp[1].get<int>(), 1, 4)};
      t.wall_adjacent = doc.at("wall_adjacent").get<bool>();
      for (const auto& n : doc.at("near")) {
        const AssetSpec* anchor = catalog_.match_name(n.at("anchor").get<std::string>());
        if (anchor) t.near.push_back({anchor->id, std::max(1, n.at("max_distance").get<int>())});
      }
    }
  }
  std::lock_guard lock(mutex_);
  traits_.emplace(key, t);
  return t;
}

PlacementResult place_objects(const Environment& base, std::vector<RequiredObject> required, ObjectResolver& resolver) {
  PlacementResult result;
  result.environment = base;
  auto spawn = spawn_tile(base);
  struct Item {
    RequiredObject req;
    ObjectTraits traits;
  };
  std::vector<Item> items;
  for (auto& r : required) {
    std::string label;
    for (const auto& room : base.rooms)
      if (room_matches_hint(room, r.room_hint)) {
        label = room.label;
        break;
      }
    items.push_back({r, resolver.resolve(r.name, label)});
  }
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (kind_rank(a.req.kind) != kind_rank(b.req.kind)) return kind_rank(a.req.kind) < kind_rank(b.req.kind);
    if (a.traits.footprint.area() != b.traits.footprint.area()) return a.traits.footprint.area() > b.traits.footprint.area();
    return a.req.name < b.req.name;
  });
  if (!spawn) {
    for (const auto& it : items) result.unplaceable.push_back({it.req.name, it.req.room_hint, {"no spawn tile: no labelled room"}});
    return result;
  }
  apply_zones(result.environment, resolver.catalog());
  for (const auto& it : items) {
    Attempt a = try_place(result.environment, it.traits, it.req.name, it.req.room_hint, it.req.kind, *spawn,
                          resolver.catalog(), false);
    if (!a.env) {
      result.unplaceable.push_back({it.req.name, it.req.room_hint, a.rejects.reasons(it.traits, it.req.room_hint)});
      continue;
    }
    result.environment = std::move(*a.env);
    result.placed_ids.push_back(a.id);
  }
  return result;
}

std::vector<RequiredObject> room_necessities(const Environment& env, const AssetCatalog& catalog) {
  std::vector<RequiredObject> out;
  for (const auto& room : env.rooms) {
    if (room.label.empty()) continue;
    for (const AssetSpec* a : catalog.necessary_for(room.label)) {
      bool present = std::any_of(env.objects.begin(), env.objects.end(),
                                 [&](const ObjectInstance& o) { return o.room_id == room.id && o.asset_id == a->id; });
      if (!present) out.push_back({a->display_name, room.id, ObjectKind::necessary_room});
    }
  }
  return out;
}

PlacementResult fill_decorative(const Environment& base, ObjectResolver& resolver, double density) {
  PlacementResult result;
  result.environment = base;
  density = std::clamp(density, 0.0, 1.0);
  auto spawn = spawn_tile(base);
  if (!spawn || density <= 0.0) return result;
  apply_zones(result.environment, resolver.catalog());
  for (const auto& room : base.rooms) {
    if (room.label.empty()) continue;
    int used = 0;
    for (const auto& o : result.environment.objects)
      if (o.room_id == room.id) used += o.footprint.area();
    int budget = static_cast<int>(std::floor(density * (room.rect.w * room.rect.h - used)));
    for (const AssetSpec* asset : resolver.catalog().decorative_for(room.label)) {
      if (asset->footprint.area() > budget) continue;
      const auto& objs = result.environment.objects;
      if (std::any_of(objs.begin(), objs.end(),
                      [&](const ObjectInstance& o) { return o.room_id == room.id && o.asset_id == asset->id; }))
        continue;
      ObjectTraits traits = resolver.resolve(asset->id, room.label);
      Attempt a = try_place(result.environment, traits, asset->display_name, room.id, ObjectKind::decorative, *spawn,
                            resolver.catalog(), true);
      if (!a.env) continue;
      result.environment = std::move(*a.env);
      result.placed_ids.push_back(a.id);
      budget -= asset->footprint.area();
    }
  }
  return result;
}

ValidationReport validate_environment(const Environment& env) {
  ValidationReport report;
  for (std::size_t i = 0; i < env.objects.size(); ++i)
    for (std::size_t j = i + 1; j < env.objects.size(); ++j)
      if (env.objects[i].footprint_rect().overlaps(env.objects[j].footprint_rect()))
        report.add(ViolationCode::OVERLAP, "/environment/objects/" + std::to_string(j),
                   "'" + env.objects[i].id + "' and '" + env.objects[j].id + "' overlap");
  for (std::size_t i = 0; i < env.objects.size(); ++i)
    if (env.objects[i].zone.tiles.empty())
      report.add(ViolationCode::ZONE_EMPTY, "/environment/objects/" + std::to_string(i) + "/zone",
                 "'" + env.objects[i].id + "' has no trigger tiles");
  auto spawn = spawn_tile(env);
  if (!spawn) {
    report.add(ViolationCode::NO_SPAWN, "/environment/rooms", "no labelled room with a free tile to spawn in");
    return report;
  }
  const WalkableMask reach = reachable_from(derive_walkable_mask(env), *spawn);
  for (std::size_t i = 0; i < env.objects.size(); ++i) {
    const auto& obj = env.objects[i];
    if (!obj.zone.tiles.empty() && !zone_reachable(obj, reach))
      report.add(ViolationCode::UNREACHABLE, "/environment/objects/" + std::to_string(i),
                 "UNREACHABLE(" + obj.id + "): no trigger tile reachable from spawn");
  }
  return report;
}

ValidationReport validate_environment(const VignetteSpec& spec) {
  ValidationReport report = validate_environment(spec.environment);
  for (std::size_t e = 0; e < spec.key_events.size(); ++e) {
    const auto& acts = spec.key_events[e].activities;
    for (std::size_t a = 0; a < acts.size(); ++a) {
      if (acts[a].object_id.empty() || spec.environment.find_object(acts[a].object_id)) continue;
      report.add(ViolationCode::EVENT_OBJECT_MISSING,
                 "/key_events/" + std::to_string(e) + "/activities/" + std::to_string(a) + "/object_id",
                 "event object '" + acts[a].object_id + "' is not in the environment");
    }
  }
  return report;
}

void rebuild_zones(Environment& env, const AssetCatalog& catalog) { apply_zones(env, catalog); }

}  // namespace vignette::env
