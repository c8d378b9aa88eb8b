#pragma once

// Shared test fixtures: hand-built specs, a random valid-spec generator and
// brute-force oracles that do not reuse library algorithms.

#include <algorithm>
#include <climits>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "vignette/catalog.hpp"
#include "vignette/env/placement.hpp"
#include "vignette/spec.hpp"
#include "vignette/util.hpp"

namespace fx {

using namespace vignette;

inline std::filesystem::path source_dir() { return VIGNETTE_SOURCE_DIR; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ObjectInstance make_object(const std::string& id, const std::string& asset, const std::string& room, Tile pos,
                                  ObjectKind kind, Facing facing = Facing::south) {
  const AssetSpec* a = AssetCatalog::builtin().find(asset);
  ObjectInstance o;
  o.id = id;
  o.name = a ? a->display_name : id;
  o.room_id = room;
  o.position = pos;
  o.footprint = a ? a->footprint : Size{1, 1};
  o.actions = a ? a->actions : std::vector<std::string>{"inspect"};
  o.zone.type = a ? a->zone_type : ZoneType::around;
  o.kind = kind;
  o.facing = facing;
  o.asset_id = asset;
  return o;
}

/// Kelly / Julie / Jack dinner vignette, after the author's edits.
inline VignetteSpec kelly_spec() {
  VignetteSpec s;
  s.title = "Dinner with Julie";
  s.story_text =
      "My friend Julie helped me make a new Indonesian dish. We had dinner together. Then, Jack practiced his guitar "
      "and Julie sang a new song she had been practicing.";
  Environment env = LayoutCatalog::builtin().find("residential_home")->instantiate();
  env.rooms[1].label = "living room";
  env.rooms[2].label = "living room";
  const auto E = ObjectKind::necessary_event;
  const auto R = ObjectKind::necessary_room;
  const auto D = ObjectKind::decorative;
  env.objects = {
      make_object("stove", "stove", "r0", {2, 1}, E, Facing::south),
      make_object("fridge", "fridge", "r0", {6, 1}, R, Facing::south),
      make_object("dining_table", "dining_table", "r1", {12, 3}, R),
      make_object("chair", "chair", "r1", {11, 3}, E),
      make_object("dining_chair", "dining_chair", "r1", {14, 3}, E),
      make_object("chair_2", "chair", "r1", {12, 4}, E),
      make_object("sofa", "sofa", "r2", {19, 4}, R, Facing::north),
      make_object("tv", "tv", "r2", {20, 1}, D, Facing::south),
      make_object("bed", "bed", "r3", {1, 14}, R),
      make_object("wardrobe", "wardrobe", "r3", {4, 16}, D, Facing::north),
      make_object("bed_2", "bed", "r4", {12, 14}, R),
      make_object("bookshelf", "bookshelf", "r5", {15, 16}, R, Facing::north),
      make_object("guitar", "guitar", "r6", {21, 11}, E),
      make_object("microphone", "microphone", "r6", {23, 14}, E),
      make_object("piano", "piano", "r6", {22, 16}, R, Facing::north),
  };
  env::rebuild_zones(env);
  s.environment = env;

  Character kelly;
  kelly.id = "kelly";
  kelly.role = Role::pc;
  kelly.name = "Kelly";
  kelly.sprite_id = "pc_default";
  Character julie;
  julie.id = "julie";
  julie.name = "Julie";
  julie.social_role = "friend";
  julie.sprite_id = "npc_1";
  Character jack;
  jack.id = "jack";
  jack.name = "Jack";
  jack.personality = "supportive";
  jack.sprite_id = "npc_2";
  s.characters = {kelly, julie, jack};

  s.key_events = {
      {0, {{"kelly", "cooking dinner", "stove"}, {"julie", "helping with cooking", "stove"}}},
      {1, {{"kelly", "having dinner", "chair"}, {"julie", "having dinner", "dining_chair"}, {"jack", "having dinner", "chair_2"}}},
      {2, {{"jack", "practicing guitar", "guitar"}, {"julie", "singing a song", "microphone"}}},
  };
  return s;
}

/// One room, one PC, one object, one event.
inline VignetteSpec minimal_spec() {
  VignetteSpec s;
  s.title = "Plants";
  s.story_text = "I watered my plants.";
  Environment env = LayoutCatalog::builtin().find("studio_room")->instantiate();
  env.objects = {make_object("plant", "plant", "r0", {2, 2}, ObjectKind::necessary_event)};
  env::rebuild_zones(env);
  s.environment = env;
  Character me;
  me.id = "me";
  me.role = Role::pc;
  me.name = "Me";
  s.characters = {me};
  s.key_events = {{0, {{"me", "watering the plant", "plant"}}}};
  return s;
}

inline std::string random_text(Rng& rng) {
  static const std::vector<std::string> words = {"alpha", "b\xC3\xA9ta", "quote\"d", "back\\slash", "tab\there",
                                                 "line\nbreak", "emoji \xF0\x9F\x8E\xB8", "plain", "", "x"};
  std::string out;
  const auto n = 1 + rng.uniform_index(3);
  for (std::uint64_t i = 0; i < n; ++i) out += (i ? " " : "") + words[rng.uniform_index(words.size())];
  return out.find_first_not_of(" ") == std::string::npos ? "t" + out : out;
}

inline std::optional<std::string> maybe_text(Rng& rng) {
  if (rng.uniform_index(2) == 0) return std::nullopt;
  return random_text(rng);
}

/// Random spec satisfying every validate_spec invariant.
inline VignetteSpec random_valid_spec(std::uint64_t seed) {
  Rng rng(seed);
  VignetteSpec s;
  s.title = random_text(rng);
  s.story_text = random_text(rng);
  Environment env;
  env.layout_id = "random_" + std::to_string(seed);
  const int rooms = 1 + static_cast<int>(rng.uniform_index(3));
  const int room_w = 4 + static_cast<int>(rng.uniform_index(5));
  const int room_h = 4 + static_cast<int>(rng.uniform_index(5));
  env.grid_width = rooms * (room_w + 1) + 1;
  env.grid_height = room_h + 2;
  for (int r = 0; r < rooms; ++r) {
    env.rooms.push_back({"r" + std::to_string(r), "room " + std::to_string(r), {1 + r * (room_w + 1), 1, room_w, room_h}});
    if (r > 0) env.doors.push_back({r * (room_w + 1), 1 + room_h / 2});
  }
  const auto& assets = AssetCatalog::builtin().assets();
  const int want = static_cast<int>(rng.uniform_index(7));
  for (int i = 0, tries = 0; i < want && tries < 200; ++tries) {
    const AssetSpec& a = assets[rng.uniform_index(assets.size())];
    const Room& room = env.rooms[rng.uniform_index(env.rooms.size())];
    if (a.footprint.w > room.rect.w || a.footprint.h > room.rect.h) continue;
    Tile pos{room.rect.x + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(room.rect.w - a.footprint.w + 1))),
             room.rect.y + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(room.rect.h - a.footprint.h + 1)))};
    ObjectInstance o = make_object("o" + std::to_string(i) + "_" + a.id, a.id, room.id, pos, ObjectKind::decorative,
                                   static_cast<Facing>(rng.uniform_index(4)));
    if (std::any_of(env.objects.begin(), env.objects.end(),
                    [&](const ObjectInstance& x) { return x.footprint_rect().overlaps(o.footprint_rect()); }))
      continue;
    Environment trial = env;
    trial.objects.push_back(o);
    env::rebuild_zones(trial);
    if (std::any_of(trial.objects.begin(), trial.objects.end(), [](const ObjectInstance& x) { return x.zone.tiles.empty(); }))
      continue;
    env = std::move(trial);
    ++i;
  }
  refresh_walkable_mask(env);

  const int nchar = 1 + static_cast<int>(rng.uniform_index(3));
  for (int c = 0; c < nchar; ++c) {
    Character ch;
    ch.id = "c" + std::to_string(c);
    ch.role = c == 0 ? Role::pc : Role::npc;
    ch.name = random_text(rng);
    ch.age = maybe_text(rng);
    ch.personality = maybe_text(rng);
    ch.social_role = maybe_text(rng);
    ch.mood = maybe_text(rng);
    ch.language_style = maybe_text(rng);
    for (std::uint64_t k = rng.uniform_index(3); k > 0; --k) ch.conversation_snippets.push_back({random_text(rng), random_text(rng)});
    ch.sprite_id = "sprite_" + std::to_string(c);
    s.characters.push_back(ch);
  }
  if (!env.objects.empty()) {
    const int nev = 1 + static_cast<int>(rng.uniform_index(4));
    for (int e = 0; e < nev; ++e) {
      KeyEvent ev;
      ev.index = e;
      for (const auto& ch : s.characters) {
        if (!ev.activities.empty() && rng.uniform_index(2) == 0) continue;
        auto& obj = env.objects[rng.uniform_index(env.objects.size())];
        obj.kind = ObjectKind::necessary_event;
        ev.activities.push_back({ch.id, random_text(rng), obj.id});
      }
      s.key_events.push_back(ev);
    }
  }
  s.environment = env;
  return s;
}

/// Distance map by repeated relaxation until fixpoint (no queue, no parent pointers).
inline std::vector<int> relaxation_distances(const WalkableMask& mask, Tile from) {
  const int w = mask.width(), h = mask.height();
  std::vector<int> d(static_cast<std::size_t>(w * h), INT_MAX);
  if (!mask.walkable(from)) return d;
  d[static_cast<std::size_t>(from.y * w + from.x)] = 0;
  for (bool changed = true; changed;) {
    changed = false;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (!mask.walkable({x, y})) continue;
        int& cur = d[static_cast<std::size_t>(y * w + x)];
        const int nb[4][2] = {{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}};
        for (auto& n : nb) {
          if (!mask.walkable({n[0], n[1]})) continue;
          int dn = d[static_cast<std::size_t>(n[1] * w + n[0])];
          if (dn != INT_MAX && dn + 1 < cur) {
            cur = dn + 1;
            changed = true;
          }
        }
      }
  }
  return d;
}

/// Shortest distance to any target, or -1.
inline int oracle_distance(const WalkableMask& mask, Tile from, const std::vector<Tile>& targets) {
  auto d = relaxation_distances(mask, from);
  int best = INT_MAX;
  for (Tile t : targets)
    if (mask.walkable(t)) best = std::min(best, d[static_cast<std::size_t>(t.y * mask.width() + t.x)]);
  return best == INT_MAX ? -1 : best;
}

inline bool oracle_zone_reachable(const Environment& env, const ObjectInstance& obj, Tile spawn) {
  return oracle_distance(derive_walkable_mask(env), spawn, obj.zone.tiles) >= 0;
}

}  // namespace fx
