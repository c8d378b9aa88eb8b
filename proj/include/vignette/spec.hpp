#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vignette {

inline constexpr int kSpecVersion = 1;
inline constexpr std::size_t kMaxCharacters = 3;

struct Tile {
  int x = 0;
  int y = 0;
  auto operator<=>(const Tile&) const = default;
};

struct Size {
  int w = 1;
  int h = 1;
  auto operator<=>(const Size&) const = default;
  int area() const { return w * h; }
};

struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  auto operator<=>(const Rect&) const = default;

  bool contains(Tile t) const { return t.x >= x && t.x < x + w && t.y >= y && t.y < y + h; }
  bool contains(const Rect& r) const {
    return r.x >= x && r.y >= y && r.x + r.w <= x + w && r.y + r.h <= y + h;
  }
  bool overlaps(const Rect& r) const {
    return x < r.x + r.w && r.x < x + w && y < r.y + r.h && r.y < y + h;
  }
  Tile center() const { return {x + w / 2, y + h / 2}; }
  std::vector<Tile> tiles() const;
};

enum class ZoneType { on, partial, around, directional };
enum class Facing { north, south, east, west };
enum class ObjectKind { necessary_event, necessary_room, decorative };
enum class Role { pc, npc };

std::string_view to_string(ZoneType v);
std::string_view to_string(Facing v);
std::string_view to_string(ObjectKind v);
std::string_view to_string(Role v);
std::optional<ZoneType> parse_zone_type(std::string_view s);
std::optional<Facing> parse_facing(std::string_view s);
std::optional<ObjectKind> parse_object_kind(std::string_view s);
std::optional<Role> parse_role(std::string_view s);

struct TriggerZone {
  ZoneType type = ZoneType::around;
  std::vector<Tile> tiles;  // sorted, unique
  bool operator==(const TriggerZone&) const = default;
  bool contains(Tile t) const;
};

struct Room {
  std::string id;
  std::string label;
  Rect rect;
  bool operator==(const Room&) const = default;
};

struct ObjectInstance {
  std::string id;
  std::string name;
  std::string room_id;
  Tile position;
  Size footprint;
  std::vector<std::string> actions;
  TriggerZone zone;
  ObjectKind kind = ObjectKind::decorative;
  Facing facing = Facing::south;
  std::string asset_id;
  bool operator==(const ObjectInstance&) const = default;

  Rect footprint_rect() const { return {position.x, position.y, footprint.w, footprint.h}; }
  bool has_action(std::string_view action) const;
};

/// Row-major boolean grid. Tiles outside the grid are never walkable.
class WalkableMask {
 public:
  WalkableMask() = default;
  WalkableMask(int width, int height, bool fill = false)
      : width_(width), height_(height), cells_(static_cast<std::size_t>(width * height), fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool in_bounds(Tile t) const { return t.x >= 0 && t.y >= 0 && t.x < width_ && t.y < height_; }
  bool walkable(Tile t) const { return in_bounds(t) && cells_[index(t)]; }
  void set(Tile t, bool v) {
    if (in_bounds(t)) cells_[index(t)] = v;
  }
  std::size_t count() const;

  /// One string per row, '.' walkable and '#' blocked.
  std::vector<std::string> to_rows() const;
  static std::optional<WalkableMask> from_rows(const std::vector<std::string>& rows, int width, int height);

  bool operator==(const WalkableMask&) const = default;

 private:
  std::size_t index(Tile t) const { return static_cast<std::size_t>(t.y * width_ + t.x); }
  int width_ = 0;
  int height_ = 0;
  std::vector<bool> cells_;
};

struct Environment {
  std::string layout_id;
  int grid_width = 1;
  int grid_height = 1;
  std::vector<Room> rooms;
  std::vector<Tile> doors;  // walkable wall openings between rooms
  std::vector<ObjectInstance> objects;
  WalkableMask walkable_mask{1, 1};
  bool operator==(const Environment&) const = default;

  const Room* find_room(std::string_view id) const;
  const ObjectInstance* find_object(std::string_view id) const;
  ObjectInstance* find_object(std::string_view id);
};

struct Snippet {
  std::string speaker;
  std::string utterance;
  bool operator==(const Snippet&) const = default;
};

struct Character {
  std::string id;
  Role role = Role::npc;
  std::string name;
  std::optional<std::string> age;
  std::optional<std::string> personality;
  std::optional<std::string> social_role;
  std::optional<std::string> mood;
  std::optional<std::string> language_style;
  std::vector<Snippet> conversation_snippets;
  std::string sprite_id;
  bool operator==(const Character&) const = default;
};

/// One line per filled persona field ("personality: supportive"); blank fields are skipped.
std::string describe_persona(const Character& c);

struct ActivityTuple {
  std::string character_id;
  std::string action;
  std::string object_id;  // empty while the author still has to pick an object
  bool operator==(const ActivityTuple&) const = default;
};

struct KeyEvent {
  int index = 0;
  std::vector<ActivityTuple> activities;
  bool operator==(const KeyEvent&) const = default;

  const ActivityTuple* activity_for(std::string_view character_id) const;
};

struct VignetteSpec {
  int spec_version = kSpecVersion;
  std::string title;
  std::string story_text;
  Environment environment;
  std::vector<Character> characters;
  std::vector<KeyEvent> key_events;
  bool operator==(const VignetteSpec&) const = default;

  const Character* find_character(std::string_view id) const;
  Character* find_character(std::string_view id);
  const Character* player() const;
};

/// Walkable tiles are room interiors and doors, minus object footprints.
/// Tiles of `on` and `partial` trigger zones stay walkable: characters stand on them.
WalkableMask derive_walkable_mask(const Environment& env);
void refresh_walkable_mask(Environment& env);

/// Spawn tile: center of the first room carrying a label, nudged to the nearest walkable tile.
std::optional<Tile> spawn_tile(const Environment& env);

}  // namespace vignette
