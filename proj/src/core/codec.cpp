#include "vignette/codec.hpp"

namespace vignette {

namespace {

const Json& field(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(path + "/" + key, "missing field");
  return *it;
}

std::string get_string(const Json& j, const char* key, const std::string& path) {
  const Json& v = field(j, key, path);
  if (!v.is_string()) throw SchemaError(path + "/" + key, "expected string");
  return v.get<std::string>();
}

int get_int(const Json& j, const char* key, const std::string& path) {
  const Json& v = field(j, key, path);
  if (!v.is_number_integer()) throw SchemaError(path + "/" + key, "expected integer");
  return v.get<int>();
}

std::optional<std::string> get_optional_string(const Json& j, const char* key, const std::string& path) {
  const Json& v = field(j, key, path);
  if (v.is_null()) return std::nullopt;
  if (!v.is_string()) throw SchemaError(path + "/" + key, "expected string or null");
  return v.get<std::string>();
}

const Json& get_array(const Json& j, const char* key, const std::string& path) {
  const Json& v = field(j, key, path);
  if (!v.is_array()) throw SchemaError(path + "/" + key, "expected array");
  return v;
}

Json optional_to_json(const std::optional<std::string>& v) { return v ? Json(*v) : Json(nullptr); }

template <typename E, typename Parser>
E get_enum(const Json& j, const char* key, const std::string& path, Parser parse) {
  std::string s = get_string(j, key, path);
  auto v = parse(s);
  if (!v) throw SchemaError(path + "/" + key, "unknown value '" + s + "'");
  return *v;
}

}  // namespace

Json to_json(Tile t) { return Json::array({t.x, t.y}); }

Tile tile_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    throw SchemaError(path, "expected [x, y]");
  return {j[0].get<int>(), j[1].get<int>()};
}

Json to_json(const Character& c) {
  Json snippets = Json::array();
  for (const auto& s : c.conversation_snippets) snippets.push_back({{"speaker", s.speaker}, {"utterance", s.utterance}});
  return {{"id", c.id},
          {"role", to_string(c.role)},
          {"name", c.name},
          {"age", optional_to_json(c.age)},
          {"personality", optional_to_json(c.personality)},
          {"social_role", optional_to_json(c.social_role)},
          {"mood", optional_to_json(c.mood)},
          {"language_style", optional_to_json(c.language_style)},
          {"conversation_snippets", snippets},
          {"sprite_id", c.sprite_id}};
}

Character character_from_json(const Json& j, const std::string& path) {
  Character c;
  c.id = get_string(j, "id", path);
  c.role = get_enum<Role>(j, "role", path, parse_role);
  c.name = get_string(j, "name", path);
  c.age = get_optional_string(j, "age", path);
  c.personality = get_optional_string(j, "personality", path);
  c.social_role = get_optional_string(j, "social_role", path);
  c.mood = get_optional_string(j, "mood", path);
  c.language_style = get_optional_string(j, "language_style", path);
  const Json& snippets = get_array(j, "conversation_snippets", path);
  for (std::size_t i = 0; i < snippets.size(); ++i) {
    const std::string sp = path + "/conversation_snippets/" + std::to_string(i);
    c.conversation_snippets.push_back({get_string(snippets[i], "speaker", sp), get_string(snippets[i], "utterance", sp)});
  }
  c.sprite_id = get_string(j, "sprite_id", path);
  return c;
}

Json to_json(const ObjectInstance& o) {
  Json tiles = Json::array();
  for (Tile t : o.zone.tiles) tiles.push_back(to_json(t));
  return {{"id", o.id},
          {"name", o.name},
          {"room_id", o.room_id},
          {"position", to_json(o.position)},
          {"footprint", {{"w", o.footprint.w}, {"h", o.footprint.h}}},
          {"actions", o.actions},
          {"zone", {{"zone_type", to_string(o.zone.type)}, {"tiles", tiles}}},
          {"kind", to_string(o.kind)},
          {"facing", to_string(o.facing)},
          {"asset_id", o.asset_id}};
}

ObjectInstance object_from_json(const Json& j, const std::string& path) {
  ObjectInstance o;
  o.id = get_string(j, "id", path);
  o.name = get_string(j, "name", path);
  o.room_id = get_string(j, "room_id", path);
  o.position = tile_from_json(field(j, "position", path), path + "/position");
  const Json& fp = field(j, "footprint", path);
  o.footprint = {get_int(fp, "w", path + "/footprint"), get_int(fp, "h", path + "/footprint")};
  const Json& actions = get_array(j, "actions", path);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (!actions[i].is_string()) throw SchemaError(path + "/actions/" + std::to_string(i), "expected string");
    o.actions.push_back(actions[i].get<std::string>());
  }
  const Json& zone = field(j, "zone", path);
  o.zone.type = get_enum<ZoneType>(zone, "zone_type", path + "/zone", parse_zone_type);
  const Json& tiles = get_array(zone, "tiles", path + "/zone");
  for (std::size_t i = 0; i < tiles.size(); ++i)
    o.zone.tiles.push_back(tile_from_json(tiles[i], path + "/zone/tiles/" + std::to_string(i)));
  o.kind = get_enum<ObjectKind>(j, "kind", path, parse_object_kind);
  o.facing = get_enum<Facing>(j, "facing", path, parse_facing);
  o.asset_id = get_string(j, "asset_id", path);
  return o;
}

Json to_json(const ActivityTuple& a) {
  return {{"character_id", a.character_id},
          {"action", a.action},
          {"object_id", a.object_id.empty() ? Json(nullptr) : Json(a.object_id)}};
}

ActivityTuple activity_from_json(const Json& j, const std::string& path) {
  ActivityTuple a;
  a.character_id = get_string(j, "character_id", path);
  a.action = get_string(j, "action", path);
  a.object_id = get_optional_string(j, "object_id", path).value_or("");
  return a;
}

Json to_json(const KeyEvent& e) {
  Json acts = Json::array();
  for (const auto& a : e.activities) acts.push_back(to_json(a));
  return {{"index", e.index}, {"activities", acts}};
}

Json to_json(const Environment& env) {
  Json rooms = Json::array();
  for (const auto& r : env.rooms)
    rooms.push_back({{"id", r.id},
                     {"label", r.label},
                     {"rect", {{"x", r.rect.x}, {"y", r.rect.y}, {"w", r.rect.w}, {"h", r.rect.h}}}});
  Json doors = Json::array();
  for (Tile t : env.doors) doors.push_back(to_json(t));
  Json objects = Json::array();
  for (const auto& o : env.objects) objects.push_back(to_json(o));
  return {{"layout_id", env.layout_id},
          {"grid_width", env.grid_width},
          {"grid_height", env.grid_height},
          {"rooms", rooms},
          {"doors", doors},
          {"objects", objects},
          {"walkable_mask", env.walkable_mask.to_rows()}};
}

Environment environment_from_json(const Json& j, const std::string& path) {
  Environment env;
  env.layout_id = get_string(j, "layout_id", path);
  env.grid_width = get_int(j, "grid_width", path);
  env.grid_height = get_int(j, "grid_height", path);
  const Json& rooms = get_array(j, "rooms", path);
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    const std::string rp = path + "/rooms/" + std::to_string(i);
    Room r;
    r.id = get_string(rooms[i], "id", rp);
    r.label = get_string(rooms[i], "label", rp);
    const Json& rect = field(rooms[i], "rect", rp);
    r.rect = {get_int(rect, "x", rp + "/rect"), get_int(rect, "y", rp + "/rect"), get_int(rect, "w", rp + "/rect"),
              get_int(rect, "h", rp + "/rect")};
    env.rooms.push_back(std::move(r));
  }
  const Json& doors = get_array(j, "doors", path);
  for (std::size_t i = 0; i < doors.size(); ++i)
    env.doors.push_back(tile_from_json(doors[i], path + "/doors/" + std::to_string(i)));
  const Json& objects = get_array(j, "objects", path);
  for (std::size_t i = 0; i < objects.size(); ++i)
    env.objects.push_back(object_from_json(objects[i], path + "/objects/" + std::to_string(i)));
  const Json& mask = get_array(j, "walkable_mask", path);
  std::vector<std::string> rows;
  for (const auto& row : mask) {
    if (!row.is_string()) throw SchemaError(path + "/walkable_mask", "expected strings");
    rows.push_back(row.get<std::string>());
  }
  auto parsed = WalkableMask::from_rows(rows, std::max(0, env.grid_width), std::max(0, env.grid_height));
  if (!parsed) throw SchemaError(path + "/walkable_mask", "mask rows do not match grid dimensions");
  env.walkable_mask = std::move(*parsed);
  return env;
}

Json spec_to_json(const VignetteSpec& spec) {
  Json chars = Json::array();
  for (const auto& c : spec.characters) chars.push_back(to_json(c));
  Json events = Json::array();
  for (const auto& e : spec.key_events) events.push_back(to_json(e));
  return {{"spec_version", spec.spec_version},
          {"title", spec.title},
          {"story_text", spec.story_text},
          {"environment", to_json(spec.environment)},
          {"characters", chars},
          {"key_events", events}};
}

VignetteSpec spec_from_json(const Json& doc) {
  VignetteSpec spec;
  spec.spec_version = get_int(doc, "spec_version", "");
  spec.title = get_string(doc, "title", "");
  spec.story_text = get_string(doc, "story_text", "");
  spec.environment = environment_from_json(field(doc, "environment", ""), "/environment");
  const Json& chars = get_array(doc, "characters", "");
  for (std::size_t i = 0; i < chars.size(); ++i)
    spec.characters.push_back(character_from_json(chars[i], "/characters/" + std::to_string(i)));
  const Json& events = get_array(doc, "key_events", "");
  for (std::size_t i = 0; i < events.size(); ++i) {
    const std::string ep = "/key_events/" + std::to_string(i);
    KeyEvent ev;
    ev.index = get_int(events[i], "index", ep);
    const Json& acts = get_array(events[i], "activities", ep);
    for (std::size_t k = 0; k < acts.size(); ++k)
      ev.activities.push_back(activity_from_json(acts[k], ep + "/activities/" + std::to_string(k)));
    spec.key_events.push_back(std::move(ev));
  }
  return spec;
}

Json to_json(const ValidationReport& r) {
  Json v = Json::array();
  for (const auto& x : r.violations) v.push_back({{"code", std::string(to_string(x.code))}, {"path", x.path}, {"message", x.message}});
  return {{"violations", v}};
}

std::string canonical_dump(const Json& j) { return j.dump(2, ' ', false, Json::error_handler_t::strict) + "\n"; }

std::string encode_spec(const VignetteSpec& spec, const ValidationLimits& limits) {
  ValidationReport report = validate_spec(spec, limits);
  if (!report.ok()) throw InvalidSpecError(std::move(report));
  return canonical_dump(spec_to_json(spec));
}

VignetteSpec decode_spec(std::string_view bytes, const ValidationLimits& limits) {
  Json doc;
  try {
    doc = Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
  VignetteSpec spec = spec_from_json(doc);
  ValidationReport report = validate_spec(spec, limits);
  if (!report.ok()) throw InvalidSpecError(std::move(report));
  return spec;
}

}  // namespace vignette
