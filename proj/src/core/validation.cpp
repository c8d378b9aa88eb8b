#include "vignette/validation.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace vignette {

#define VIGNETTE_CODES(X)                                                                            \
  X(NO_PLAYER_CHARACTER) X(MULTIPLE_PLAYER_CHARACTERS) X(CHAR_CAP_EXCEEDED) X(UNKNOWN_CHARACTER_REF)  \
  X(UNKNOWN_OBJECT_REF) X(EVENT_INDEX_INVALID) X(TOO_MANY_EVENTS) X(TOO_MANY_OBJECTS)                 \
  X(UNSUPPORTED_VERSION) X(DUPLICATE_ID) X(GRID_INVALID) X(ROOM_OUT_OF_GRID) X(ROOM_OVERLAP)           \
  X(OVERLAP) X(OBJECT_OUTSIDE_ROOM) X(UNKNOWN_ROOM_REF) X(WALKABLE_MASK_MISMATCH) X(ROOM_TOO_SMALL)   \
  X(ROOM_LABEL_EMPTY) X(OBJECT_NO_ACTIONS) X(EVENT_OBJECT_UNUSED) X(ZONE_EMPTY) X(ZONE_OUT_OF_GRID)   \
  X(ZONE_NOT_ON_FOOTPRINT) X(ZONE_INTERSECTS_FOOTPRINT) X(CHARACTER_NAME_EMPTY) X(ACTION_EMPTY)       \
  X(NEEDS_OBJECT) X(EVENT_EMPTY) X(DUPLICATE_CHARACTER_IN_EVENT) X(NO_KEY_EVENTS)                     \
  X(EVENT_OBJECT_MISSING) X(UNREACHABLE) X(NO_SPAWN)

std::string_view to_string(ViolationCode code) {
#define X(name) \
  case ViolationCode::name: return #name;
  switch (code) { VIGNETTE_CODES(X) }
#undef X
  return "UNKNOWN";
}

std::vector<ViolationCode> all_violation_codes() {
#define X(name) ViolationCode::name,
  return {VIGNETTE_CODES(X)};
#undef X
}

#undef VIGNETTE_CODES

bool ValidationReport::has(ViolationCode code) const { return count(code) > 0; }

std::size_t ValidationReport::count(ViolationCode code) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [&](const Violation& v) { return v.code == code; }));
}

void ValidationReport::add(ViolationCode code, std::string path, std::string message) {
  violations.push_back({code, std::move(path), std::move(message)});
}

void ValidationReport::merge(const ValidationReport& other) {
  violations.insert(violations.end(), other.violations.begin(), other.violations.end());
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << to_string(violations[i].code) << " at " << violations[i].path;
    if (!violations[i].message.empty()) os << " (" << violations[i].message << ")";
  }
  return os.str();
}

namespace {

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

std::string at(std::string_view base, std::size_t i) { return std::string(base) + "/" + std::to_string(i); }

void check_unique_ids(ValidationReport& report, std::string_view base, const std::vector<std::string>& ids) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i].empty() || !seen.insert(ids[i]).second)
      report.add(ViolationCode::DUPLICATE_ID, at(base, i) + "/id", "id '" + ids[i] + "' is empty or repeated");
  }
}

void validate_characters(const VignetteSpec& spec, ValidationReport& report) {
  const auto& chars = spec.characters;
  auto pcs = std::count_if(chars.begin(), chars.end(), [](const Character& c) { return c.role == Role::pc; });
  if (pcs == 0) report.add(ViolationCode::NO_PLAYER_CHARACTER, "/characters", "no character has role PC");
  if (pcs > 1) report.add(ViolationCode::MULTIPLE_PLAYER_CHARACTERS, "/characters", std::to_string(pcs) + " PCs");
  if (chars.size() > kMaxCharacters)
    report.add(ViolationCode::CHAR_CAP_EXCEEDED, "/characters",
               std::to_string(chars.size()) + " characters, at most " + std::to_string(kMaxCharacters));
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < chars.size(); ++i) {
    ids.push_back(chars[i].id);
    if (blank(chars[i].name)) report.add(ViolationCode::CHARACTER_NAME_EMPTY, at("/characters", i) + "/name", "");
  }
  check_unique_ids(report, "/characters", ids);
}

void validate_zone(const Environment& env, const ObjectInstance& obj, const std::string& path, ValidationReport& report) {
  const auto& zone = obj.zone;
  if (zone.tiles.empty()) {
    report.add(ViolationCode::ZONE_EMPTY, path + "/zone", "trigger zone of '" + obj.id + "' has no tiles");
    return;
  }
  const Rect grid{0, 0, env.grid_width, env.grid_height};
  const Rect fp = obj.footprint_rect();
  bool out = false, off_footprint = false, hits_footprint = false;
  for (Tile t : zone.tiles) {
    out |= !grid.contains(t);
    off_footprint |= !fp.contains(t);
    hits_footprint |= fp.contains(t);
  }
  if (out) report.add(ViolationCode::ZONE_OUT_OF_GRID, path + "/zone", "");
  bool inside_type = zone.type == ZoneType::on || zone.type == ZoneType::partial;
  if (inside_type && off_footprint)
    report.add(ViolationCode::ZONE_NOT_ON_FOOTPRINT, path + "/zone", "zone tiles must lie on the footprint");
  if (!inside_type && hits_footprint)
    report.add(ViolationCode::ZONE_INTERSECTS_FOOTPRINT, path + "/zone", "zone tiles must surround the footprint");
}

void validate_environment_shape(const VignetteSpec& spec, const ValidationLimits& limits, ValidationReport& report) {
  const Environment& env = spec.environment;
  if (env.grid_width < 1 || env.grid_height < 1) {
    report.add(ViolationCode::GRID_INVALID, "/environment", "grid dimensions must be positive");
    return;
  }
  const Rect grid{0, 0, env.grid_width, env.grid_height};

  std::vector<std::string> room_ids;
  for (std::size_t i = 0; i < env.rooms.size(); ++i) {
    const Room& room = env.rooms[i];
    const std::string path = at("/environment/rooms", i);
    room_ids.push_back(room.id);
    if (room.rect.w < 2 || room.rect.h < 2) report.add(ViolationCode::ROOM_TOO_SMALL, path + "/rect", "");
    if (!grid.contains(room.rect)) report.add(ViolationCode::ROOM_OUT_OF_GRID, path + "/rect", "");
    if (blank(room.label)) report.add(ViolationCode::ROOM_LABEL_EMPTY, path + "/label", "");
    for (std::size_t j = 0; j < i; ++j)
      if (room.rect.overlaps(env.rooms[j].rect))
        report.add(ViolationCode::ROOM_OVERLAP, path + "/rect", "overlaps room '" + env.rooms[j].id + "'");
  }
  check_unique_ids(report, "/environment/rooms", room_ids);
  for (std::size_t i = 0; i < env.doors.size(); ++i)
    if (!grid.contains(env.doors[i])) report.add(ViolationCode::GRID_INVALID, at("/environment/doors", i), "door outside grid");

  if (env.objects.size() > limits.max_objects)
    report.add(ViolationCode::TOO_MANY_OBJECTS, "/environment/objects",
               std::to_string(env.objects.size()) + " objects, limit " + std::to_string(limits.max_objects));

  std::set<std::string> referenced;
  for (const auto& ev : spec.key_events)
    for (const auto& a : ev.activities) referenced.insert(a.object_id);

  std::vector<std::string> object_ids;
  for (std::size_t i = 0; i < env.objects.size(); ++i) {
    const ObjectInstance& obj = env.objects[i];
    const std::string path = at("/environment/objects", i);
    object_ids.push_back(obj.id);
    const Room* room = env.find_room(obj.room_id);
    if (!room) {
      report.add(ViolationCode::UNKNOWN_ROOM_REF, path + "/room_id", "unknown room '" + obj.room_id + "'");
    } else if (!room->rect.contains(obj.footprint_rect()) || obj.footprint.w < 1 || obj.footprint.h < 1) {
      report.add(ViolationCode::OBJECT_OUTSIDE_ROOM, path + "/position", "footprint not inside room '" + room->id + "'");
    }
    for (std::size_t j = 0; j < i; ++j)
      if (obj.footprint_rect().overlaps(env.objects[j].footprint_rect()))
        report.add(ViolationCode::OVERLAP, path + "/position", "overlaps object '" + env.objects[j].id + "'");
    if (obj.actions.empty()) report.add(ViolationCode::OBJECT_NO_ACTIONS, path + "/actions", "");
    if (obj.kind == ObjectKind::necessary_event && !referenced.count(obj.id))
      report.add(ViolationCode::EVENT_OBJECT_UNUSED, path + "/kind", "'" + obj.id + "' is not used by any key event");
    validate_zone(env, obj, path, report);
  }
  check_unique_ids(report, "/environment/objects", object_ids);

  if (!(env.walkable_mask == derive_walkable_mask(env)))
    report.add(ViolationCode::WALKABLE_MASK_MISMATCH, "/environment/walkable_mask", "mask differs from rooms/objects");
}

void validate_events(const VignetteSpec& spec, const ValidationLimits& limits, ValidationReport& report) {
  if (spec.key_events.size() > limits.max_events)
    report.add(ViolationCode::TOO_MANY_EVENTS, "/key_events",
               std::to_string(spec.key_events.size()) + " events, limit " + std::to_string(limits.max_events));
  for (std::size_t i = 0; i < spec.key_events.size(); ++i) {
    const KeyEvent& ev = spec.key_events[i];
    const std::string path = at("/key_events", i);
    if (ev.index != static_cast<int>(i))
      report.add(ViolationCode::EVENT_INDEX_INVALID, path + "/index",
                 "expected " + std::to_string(i) + ", found " + std::to_string(ev.index));
    if (ev.activities.empty()) report.add(ViolationCode::EVENT_EMPTY, path + "/activities", "");
    std::set<std::string> seen;
    for (std::size_t j = 0; j < ev.activities.size(); ++j) {
      const ActivityTuple& a = ev.activities[j];
      const std::string apath = at(path + "/activities", j);
      if (!seen.insert(a.character_id).second)
        report.add(ViolationCode::DUPLICATE_CHARACTER_IN_EVENT, apath + "/character_id", a.character_id);
      if (!spec.find_character(a.character_id))
        report.add(ViolationCode::UNKNOWN_CHARACTER_REF, apath + "/character_id", "unknown character '" + a.character_id + "'");
      if (blank(a.action)) report.add(ViolationCode::ACTION_EMPTY, apath + "/action", "");
      if (a.object_id.empty())
        report.add(ViolationCode::NEEDS_OBJECT, apath + "/object_id", "no object assigned");
      else if (!spec.environment.find_object(a.object_id))
        report.add(ViolationCode::UNKNOWN_OBJECT_REF, apath + "/object_id", "unknown object '" + a.object_id + "'");
    }
  }
}

}  // namespace

ValidationReport validate_spec(const VignetteSpec& spec, const ValidationLimits& limits) {
  ValidationReport report;
  if (spec.spec_version != kSpecVersion)
    report.add(ViolationCode::UNSUPPORTED_VERSION, "/spec_version", std::to_string(spec.spec_version));
  validate_characters(spec, report);
  validate_environment_shape(spec, limits, report);
  validate_events(spec, limits, report);
  return report;
}

}  // namespace vignette
