#include "vignette/spec.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <limits>

namespace vignette {

namespace {

template <typename E, std::size_t N>
std::optional<E> parse_enum(std::string_view s, const std::array<E, N>& values) {
  for (E v : values) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

}  // namespace

std::vector<Tile> Rect::tiles() const {
  std::vector<Tile> out;
  out.reserve(static_cast<std::size_t>(std::max(0, w * h)));
  for (int ty = y; ty < y + h; ++ty)
    for (int tx = x; tx < x + w; ++tx) out.push_back({tx, ty});
  return out;
}

std::string_view to_string(ZoneType v) {
  switch (v) {
    case ZoneType::on: return "on";
    case ZoneType::partial: return "partial";
    case ZoneType::around: return "around";
    case ZoneType::directional: return "directional";
  }
  return "around";
}

std::string_view to_string(Facing v) {
  switch (v) {
    case Facing::north: return "north";
    case Facing::south: return "south";
    case Facing::east: return "east";
    case Facing::west: return "west";
  }
  return "south";
}

std::string_view to_string(ObjectKind v) {
  switch (v) {
    case ObjectKind::necessary_event: return "necessary_event";
    case ObjectKind::necessary_room: return "necessary_room";
    case ObjectKind::decorative: return "decorative";
  }
  return "decorative";
}

std::string_view to_string(Role v) { return v == Role::pc ? "PC" : "NPC"; }

std::optional<ZoneType> parse_zone_type(std::string_view s) {
  return parse_enum(s, std::array{ZoneType::on, ZoneType::partial, ZoneType::around, ZoneType::directional});
}
std::optional<Facing> parse_facing(std::string_view s) {
  return parse_enum(s, std::array{Facing::north, Facing::south, Facing::east, Facing::west});
}
std::optional<ObjectKind> parse_object_kind(std::string_view s) {
  return parse_enum(s, std::array{ObjectKind::necessary_event, ObjectKind::necessary_room, ObjectKind::decorative});
}
std::optional<Role> parse_role(std::string_view s) { return parse_enum(s, std::array{Role::pc, Role::npc}); }

bool TriggerZone::contains(Tile t) const { return std::binary_search(tiles.begin(), tiles.end(), t); }

bool ObjectInstance::has_action(std::string_view action) const {
  return std::find(actions.begin(), actions.end(), action) != actions.end();
}

std::size_t WalkableMask::count() const { return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), true)); }

std::vector<std::string> WalkableMask::to_rows() const {
  std::vector<std::string> rows;
  rows.reserve(static_cast<std::size_t>(height_));
  for (int y = 0; y < height_; ++y) {
    std::string row(static_cast<std::size_t>(width_), '#');
    for (int x = 0; x < width_; ++x)
      if (cells_[index({x, y})]) row[static_cast<std::size_t>(x)] = '.';
    rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<WalkableMask> WalkableMask::from_rows(const std::vector<std::string>& rows, int width, int height) {
  if (width < 0 || height < 0 || rows.size() != static_cast<std::size_t>(height)) return std::nullopt;
  WalkableMask mask(width, height);
  for (int y = 0; y < height; ++y) {
    const auto& row = rows[static_cast<std::size_t>(y)];
    if (row.size() != static_cast<std::size_t>(width)) return std::nullopt;
    for (int x = 0; x < width; ++x) {
      char c = row[static_cast<std::size_t>(x)];
      if (c != '.' && c != '#') return std::nullopt;
      mask.set({x, y}, c == '.');
    }
  }
  return mask;
}

const Room* Environment::find_room(std::string_view id) const {
  auto it = std::find_if(rooms.begin(), rooms.end(), [&](const Room& r) { return r.id == id; });
  return it == rooms.end() ? nullptr : &*it;
}

const ObjectInstance* Environment::find_object(std::string_view id) const {
  auto it = std::find_if(objects.begin(), objects.end(), [&](const ObjectInstance& o) { return o.id == id; });
  return it == objects.end() ? nullptr : &*it;
}

ObjectInstance* Environment::find_object(std::string_view id) {
  auto it = std::find_if(objects.begin(), objects.end(), [&](const ObjectInstance& o) { return o.id == id; });
  return it == objects.end() ? nullptr : &*it;
}

const ActivityTuple* KeyEvent::activity_for(std::string_view character_id) const {
  auto it = std::find_if(activities.begin(), activities.end(),
                         [&](const ActivityTuple& a) { return a.character_id == character_id; });
  return it == activities.end() ? nullptr : &*it;
}

const Character* VignetteSpec::find_character(std::string_view id) const {
  auto it = std::find_if(characters.begin(), characters.end(), [&](const Character& c) { return c.id == id; });
  return it == characters.end() ? nullptr : &*it;
}

Character* VignetteSpec::find_character(std::string_view id) {
  auto it = std::find_if(characters.begin(), characters.end(), [&](const Character& c) { return c.id == id; });
  return it == characters.end() ? nullptr : &*it;
}

const Character* VignetteSpec::player() const {
  auto it = std::find_if(characters.begin(), characters.end(), [](const Character& c) { return c.role == Role::pc; });
  return it == characters.end() ? nullptr : &*it;
}

std::string describe_persona(const Character& c) {
  std::string out;
  auto line = [&](const char* key, const std::optional<std::string>& v) {
    if (!v || v->empty()) return;
    if (!out.empty()) out += "\n";
    out += std::string(key) + ": " + *v;
  };
  line("age", c.age);
  line("personality", c.personality);
  line("social role", c.social_role);
  line("mood", c.mood);
  line("language style", c.language_style);
  return out.empty() ? "(no persona details given)" : out;
}

WalkableMask derive_walkable_mask(const Environment& env) {
  WalkableMask mask(std::max(0, env.grid_width), std::max(0, env.grid_height));
  for (const auto& room : env.rooms)
    for (Tile t : room.rect.tiles()) mask.set(t, true);
  for (Tile t : env.doors) mask.set(t, true);
  for (const auto& obj : env.objects)
    for (Tile t : obj.footprint_rect().tiles()) mask.set(t, false);
  for (const auto& obj : env.objects) {
    if (obj.zone.type != ZoneType::on && obj.zone.type != ZoneType::partial) continue;
    for (Tile t : obj.zone.tiles) {
      bool inside_room = std::any_of(env.rooms.begin(), env.rooms.end(), [&](const Room& r) { return r.rect.contains(t); });
      if (inside_room) mask.set(t, true);
    }
  }
  return mask;
}

void refresh_walkable_mask(Environment& env) { env.walkable_mask = derive_walkable_mask(env); }

std::optional<Tile> spawn_tile(const Environment& env) {
  auto room = std::find_if(env.rooms.begin(), env.rooms.end(), [](const Room& r) { return !r.label.empty(); });
  if (room == env.rooms.end()) return std::nullopt;
  const Tile center = room->rect.center();
  const WalkableMask mask = derive_walkable_mask(env);
  if (mask.walkable(center)) return center;
  // Nearest walkable tile of the same room by Manhattan distance, scan order breaks ties.
  std::optional<Tile> best;
  int best_d = std::numeric_limits<int>::max();
  for (Tile t : room->rect.tiles()) {
    if (!mask.walkable(t)) continue;
    int d = std::abs(t.x - center.x) + std::abs(t.y - center.y);
    if (d < best_d) {
      best_d = d;
      best = t;
    }
  }
  return best;
}

}  // namespace vignette
