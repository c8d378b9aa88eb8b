#include <algorithm>
#include <map>

#include "vignette/codec.hpp"
#include "vignette/extract/extractor.hpp"
#include "vignette/util.hpp"

namespace vignette::extract {

namespace {

std::string title_from(const std::string& story) {
  std::string first = story.substr(0, story.find_first_of(".!?\n"));
  auto b = first.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "Untitled vignette";
  first = first.substr(b);
  if (first.size() > 48) {
    auto cut = first.rfind(' ', 48);
    first = first.substr(0, cut == std::string::npos || cut < 16 ? 48 : cut) + "...";
  }
  return first;
}

// Count of each violation code, NEEDS_OBJECT excluded: leaving a tuple objectless is allowed mid-edit.
std::map<ViolationCode, std::size_t> violation_counts(const VignetteSpec& spec, const ValidationLimits& limits) {
  ValidationReport r = validate_spec(spec, limits);
  r.merge(env::validate_environment(spec));
  std::map<ViolationCode, std::size_t> out;
  for (const auto& v : r.violations)
    if (v.code != ViolationCode::NEEDS_OBJECT) ++out[v.code];
  return out;
}

const Room* room_containing(const Environment& env, const Rect& fp) {
  for (const auto& r : env.rooms)
    if (r.rect.contains(fp)) return &r;
  return nullptr;
}

Tile tile_from(const Json& j) {
  if (j.is_array() && j.size() == 2) return {j[0].get<int>(), j[1].get<int>()};
  return {j.at("x").get<int>(), j.at("y").get<int>()};
}

void unset_object_refs(VignetteSpec& spec, const std::string& object_id) {
  for (auto& ev : spec.key_events)
    for (auto& a : ev.activities)
      if (a.object_id == object_id) a.object_id.clear();
}

void renumber(std::vector<KeyEvent>& events) {
  for (std::size_t i = 0; i < events.size(); ++i) events[i].index = static_cast<int>(i);
}

std::size_t event_index(const Json& op, const std::vector<KeyEvent>& events, const char* key = "event") {
  const int i = op.at(key).get<int>();
  if (i < 0 || static_cast<std::size_t>(i) >= events.size())
    throw EditRejected(ViolationCode::EVENT_INDEX_INVALID, "/key_events/" + std::to_string(i), "no key event " + std::to_string(i));
  return static_cast<std::size_t>(i);
}

}  // namespace

ExtractionSession ExtractionSession::create(const llm::Gateway& gw, std::string story, ExtractorConfig config) {
  if (story.size() > config.max_story_chars)
    throw ExtractionError("STORY_TOO_LONG",
                          "story has " + std::to_string(story.size()) + " characters, limit is " +
                              std::to_string(config.max_story_chars),
                          {{"limit", config.max_story_chars}, {"length", story.size()}});
  ExtractionSession s;
  s.config_ = config;
  s.draft_.story_text = story;
  s.draft_.title = title_from(story);
  s.draft_.characters = extract_characters(gw, story, &s.flags_);
  const LayoutTemplate& layout = select_layout(gw, story, LayoutCatalog::builtin(), &s.flags_);
  const auto labels = label_rooms(gw, layout, story);
  s.draft_.environment = layout.instantiate();
  for (auto& r : s.draft_.environment.rooms)
    if (auto it = labels.find(r.id); it != labels.end()) r.label = it->second;
  refresh_walkable_mask(s.draft_.environment);
  s.stage_ = Stage::rooms_pending;
  return s;
}

std::vector<Flag> ExtractionSession::flags() const {
  std::vector<Flag> out;
  for (const auto& f : flags_)
    if (f.code != "NEEDS_OBJECT") out.push_back(f);
  for (const auto& ev : draft_.key_events)
    for (std::size_t i = 0; i < ev.activities.size(); ++i)
      if (ev.activities[i].object_id.empty())
        out.push_back({"NEEDS_OBJECT",
                       "/key_events/" + std::to_string(ev.index) + "/activities/" + std::to_string(i) + "/object_id",
                       "no object fits '" + ev.activities[i].action + "'; pick one"});
  return out;
}

void ExtractionSession::require_at_least(Stage s, const char* op) const {
  if (stage_ < s) throw StageError(op, stage_);
}

void ExtractionSession::require_exactly(Stage s, const char* op) const {
  if (stage_ != s) throw StageError(op, stage_);
}

void ExtractionSession::commit(VignetteSpec candidate) {
  const auto before = violation_counts(draft_, config_.limits);
  const auto after = violation_counts(candidate, config_.limits);
  ValidationReport rejected;
  ValidationReport full = validate_spec(candidate, config_.limits);
  full.merge(env::validate_environment(candidate));
  for (const auto& [code, n] : after) {
    auto it = before.find(code);
    if (n > (it == before.end() ? 0 : it->second))
      for (const auto& v : full.violations)
        if (v.code == code) rejected.add(v.code, v.path, v.message);
  }
  if (!rejected.ok()) throw EditRejected(rejected);
  draft_ = std::move(candidate);
}

void ExtractionSession::confirm_rooms(const llm::Gateway& gw, const std::map<std::string, std::string>& labels) {
  require_exactly(Stage::rooms_pending, "confirm_rooms");
  Environment env = draft_.environment;
  for (const auto& [id, label] : labels) {
    auto it = std::find_if(env.rooms.begin(), env.rooms.end(), [&](const Room& r) { return r.id == id; });
    if (it == env.rooms.end())
      throw EditRejected(ViolationCode::UNKNOWN_ROOM_REF, "/environment/rooms", "no room '" + id + "'");
    if (label.find_first_not_of(" \t") == std::string::npos)
      throw EditRejected(ViolationCode::ROOM_LABEL_EMPTY, "/environment/rooms/" + id + "/label", "room label is empty");
    it->label = label;
  }
  refresh_walkable_mask(env);

  const AssetCatalog& catalog = AssetCatalog::builtin();
  auto required = extract_event_objects(gw, draft_.story_text, draft_.characters, env, catalog);
  for (auto& need : env::room_necessities(env, catalog)) {
    const AssetSpec* want = catalog.match_name(need.name);
    const bool covered = std::any_of(required.begin(), required.end(), [&](const env::RequiredObject& r) {
      const AssetSpec* have = catalog.match_name(r.name);
      return have && want && have->id == want->id && r.room_hint == need.room_hint;
    });
    if (!covered) required.push_back(need);
  }
  env::ObjectResolver resolver(catalog, &gw);
  auto placed = env::place_objects(env, required, resolver);
  for (const auto& u : placed.unplaceable) {
    std::string why;
    for (const auto& r : u.reasons) why += (why.empty() ? "" : "; ") + r;
    flags_.push_back({"UNPLACEABLE", "/environment/objects", "could not place '" + u.name + "': " + why});
  }
  auto decorated = env::fill_decorative(placed.environment, resolver, config_.decorative_density);
  draft_.environment = std::move(decorated.environment);
  draft_.key_events = extract_events(gw, draft_.story_text, draft_.characters, draft_.environment, &flags_);
  sync_object_kinds(draft_);
  stage_ = Stage::objects_pending;
}

void ExtractionSession::update_environment(const llm::Gateway& gw, const Json& ops) {
  require_at_least(Stage::objects_pending, "update_environment");
  if (!ops.is_array()) throw std::invalid_argument("environment ops must be an array");
  VignetteSpec cand = draft_;
  Environment& env = cand.environment;
  env::ObjectResolver resolver(AssetCatalog::builtin(), &gw);
  for (const auto& op : ops) {
    const std::string kind = op.at("op").get<std::string>();
    if (kind == "add") {
      const std::string name = op.at("name").get<std::string>();
      const std::string room_id = op.value("room_id", "");
      if (op.contains("position")) {
        const Room* room_hint = env.find_room(room_id);
        const auto traits = resolver.resolve(name, room_hint ? room_hint->label : "");
        ObjectInstance obj;
        obj.name = name;
        obj.id = slugify(name).empty() ? "object" : slugify(name);
        for (int n = 2; env.find_object(obj.id); ++n) obj.id = slugify(name) + "_" + std::to_string(n);
        obj.position = tile_from(op["position"]);
        obj.footprint = traits.footprint;
        obj.actions = traits.affordance.actions;
        obj.zone.type = traits.affordance.zone_type;
        obj.kind = ObjectKind::decorative;
        obj.asset_id = traits.asset_id;
        if (op.contains("facing"))
          if (auto f = parse_facing(op["facing"].get<std::string>())) obj.facing = *f;
        const Room* room = room_containing(env, obj.footprint_rect());
        if (!room)
          throw EditRejected(ViolationCode::OBJECT_OUTSIDE_ROOM, "/environment/objects",
                             "'" + name + "' at that position is not inside one room");
        obj.room_id = room->id;
        env.objects.push_back(std::move(obj));
      } else {
        auto res = env::place_objects(env, {{name, room_id, ObjectKind::decorative}}, resolver);
        if (!res.ok()) {
          Json reasons = res.unplaceable.front().reasons;
          throw ExtractionError("UNPLACEABLE", "could not place '" + name + "'", {{"reasons", reasons}});
        }
        env = std::move(res.environment);
      }
    } else if (kind == "move") {
      const std::string id = op.at("object_id").get<std::string>();
      ObjectInstance* obj = env.find_object(id);
      if (!obj) throw EditRejected(ViolationCode::UNKNOWN_OBJECT_REF, "/environment/objects", "no object '" + id + "'");
      obj->position = tile_from(op.at("position"));
      if (op.contains("facing"))
        if (auto f = parse_facing(op["facing"].get<std::string>())) obj->facing = *f;
      const Room* room = room_containing(env, obj->footprint_rect());
      if (!room)
        throw EditRejected(ViolationCode::OBJECT_OUTSIDE_ROOM, "/environment/objects", "'" + id + "' would leave its room");
      obj->room_id = room->id;
    } else if (kind == "remove") {
      const std::string id = op.at("object_id").get<std::string>();
      auto it = std::find_if(env.objects.begin(), env.objects.end(), [&](const ObjectInstance& o) { return o.id == id; });
      if (it == env.objects.end())
        throw EditRejected(ViolationCode::UNKNOWN_OBJECT_REF, "/environment/objects", "no object '" + id + "'");
      env.objects.erase(it);
      unset_object_refs(cand, id);
    } else if (kind == "rename_room") {
      const std::string id = op.at("room_id").get<std::string>();
      auto it = std::find_if(env.rooms.begin(), env.rooms.end(), [&](const Room& r) { return r.id == id; });
      if (it == env.rooms.end()) throw EditRejected(ViolationCode::UNKNOWN_ROOM_REF, "/environment/rooms", "no room '" + id + "'");
      it->label = op.at("label").get<std::string>();
    } else {
      throw std::invalid_argument("unknown environment op '" + kind + "'");
    }
  }
  env::rebuild_zones(env, AssetCatalog::builtin());
  sync_object_kinds(cand);
  commit(std::move(cand));
}

void ExtractionSession::confirm_objects() {
  require_exactly(Stage::objects_pending, "confirm_objects");
  stage_ = Stage::characters_pending;
}

void ExtractionSession::update_character(const std::string& id, const Json& fields) {
  require_at_least(Stage::characters_pending, "update_character");
  VignetteSpec cand = draft_;
  Character* c = cand.find_character(id);
  if (!c) throw EditRejected(ViolationCode::UNKNOWN_CHARACTER_REF, "/characters", "no character '" + id + "'");
  for (const auto& [k, v] : fields.items()) {
    if (k == "name") {
      c->name = v.get<std::string>();
    } else if (k == "sprite_id") {
      c->sprite_id = v.get<std::string>();
    } else if (k == "conversation_snippets") {
      c->conversation_snippets.clear();
      for (const auto& s : v) c->conversation_snippets.push_back({s.at("speaker").get<std::string>(), s.at("utterance").get<std::string>()});
    } else if (auto* f = persona_field(*c, k)) {
      if (v.is_null()) f->reset();
      else *f = v.get<std::string>();
    } else {
      throw std::invalid_argument("unknown character field '" + k + "'");
    }
  }
  commit(std::move(cand));
}

std::map<std::string, std::string> ExtractionSession::suggest_persona(const llm::Gateway& gw, const std::string& id) const {
  require_at_least(Stage::characters_pending, "suggest_persona");
  const Character* c = draft_.find_character(id);
  if (!c) throw EditRejected(ViolationCode::UNKNOWN_CHARACTER_REF, "/characters", "no character '" + id + "'");
  return extract::suggest_persona(gw, *c);
}

void ExtractionSession::accept_suggestion(const std::string& id, const std::string& field, const std::string& value) {
  update_character(id, Json{{field, value}});
}

std::string ExtractionSession::simulate_chat(const llm::Gateway& gw, const std::string& id, const std::string& utterance,
                                             const std::optional<std::string>& edited_reply) {
  require_at_least(Stage::characters_pending, "simulate_chat");
  Character* c = draft_.find_character(id);
  if (!c) throw EditRejected(ViolationCode::UNKNOWN_CHARACTER_REF, "/characters", "no character '" + id + "'");
  std::string reply = extract::simulate_chat(gw, *c, utterance, c->conversation_snippets);
  if (reply == llm::kRefusalLine) return reply;
  if (edited_reply && !edited_reply->empty()) reply = *edited_reply;
  c->conversation_snippets.push_back({"author", utterance});
  c->conversation_snippets.push_back({c->name, reply});
  return reply;
}

void ExtractionSession::confirm_characters() {
  require_exactly(Stage::characters_pending, "confirm_characters");
  stage_ = Stage::events_pending;
}

void ExtractionSession::update_events(const Json& ops) {
  require_at_least(Stage::events_pending, "update_events");
  if (!ops.is_array()) throw std::invalid_argument("event ops must be an array");
  VignetteSpec cand = draft_;
  auto& events = cand.key_events;
  auto find_activity = [&](KeyEvent& ev, const std::string& cid) {
    auto it = std::find_if(ev.activities.begin(), ev.activities.end(), [&](const ActivityTuple& a) { return a.character_id == cid; });
    if (it == ev.activities.end())
      throw EditRejected(ViolationCode::UNKNOWN_CHARACTER_REF, "/key_events/" + std::to_string(ev.index),
                         "'" + cid + "' has no activity in event " + std::to_string(ev.index));
    return it;
  };
  for (const auto& op : ops) {
    const std::string kind = op.at("op").get<std::string>();
    if (kind == "add_activity") {
      auto& ev = events[event_index(op, events)];
      ev.activities.push_back({op.at("character_id").get<std::string>(), op.at("action").get<std::string>(),
                               op.contains("object_id") && op["object_id"].is_string() ? op["object_id"].get<std::string>() : ""});
    } else if (kind == "remove_activity") {
      auto& ev = events[event_index(op, events)];
      ev.activities.erase(find_activity(ev, op.at("character_id").get<std::string>()));
    } else if (kind == "set_activity") {
      auto& ev = events[event_index(op, events)];
      auto it = find_activity(ev, op.at("character_id").get<std::string>());
      if (op.contains("action")) it->action = op["action"].get<std::string>();
      if (op.contains("object_id")) it->object_id = op["object_id"].is_string() ? op["object_id"].get<std::string>() : "";
    } else if (kind == "add_event") {
      KeyEvent ev;
      for (const auto& a : op.value("activities", Json::array()))
        ev.activities.push_back({a.at("character_id").get<std::string>(), a.at("action").get<std::string>(),
                                 a.contains("object_id") && a["object_id"].is_string() ? a["object_id"].get<std::string>() : ""});
      std::size_t at = op.contains("at") ? std::min<std::size_t>(op["at"].get<std::size_t>(), events.size()) : events.size();
      events.insert(events.begin() + static_cast<std::ptrdiff_t>(at), std::move(ev));
    } else if (kind == "remove_event") {
      events.erase(events.begin() + static_cast<std::ptrdiff_t>(event_index(op, events)));
    } else if (kind == "move_event") {
      const auto from = event_index(op, events, "from");
      const auto to = event_index(op, events, "to");
      KeyEvent ev = std::move(events[from]);
      events.erase(events.begin() + static_cast<std::ptrdiff_t>(from));
      events.insert(events.begin() + static_cast<std::ptrdiff_t>(to), std::move(ev));
    } else {
      throw std::invalid_argument("unknown event op '" + kind + "'");
    }
    renumber(events);
  }
  sync_object_kinds(cand);
  commit(std::move(cand));
}

void ExtractionSession::confirm_events() {
  require_exactly(Stage::events_pending, "confirm_events");
  ValidationReport r = validate_spec(draft_, config_.limits);
  r.merge(env::validate_environment(draft_));
  if (draft_.key_events.empty()) r.add(ViolationCode::NO_KEY_EVENTS, "/key_events", "a vignette needs at least one key event");
  if (!r.ok()) throw EditRejected(r);
  stage_ = Stage::complete;
}

Json ExtractionSession::to_json() const {
  Json flags = Json::array();
  for (const auto& f : flags_) flags.push_back(extract::to_json(f));
  return {{"stage", std::string(to_string(stage_))},
          {"draft", spec_to_json(draft_)},
          {"flags", flags},
          {"config",
           {{"max_story_chars", config_.max_story_chars},
            {"decorative_density", config_.decorative_density},
            {"max_events", config_.limits.max_events},
            {"max_objects", config_.limits.max_objects}}}};
}

ExtractionSession ExtractionSession::from_json(const Json& doc) {
  ExtractionSession s;
  auto st = parse_stage(doc.at("stage").get<std::string>());
  if (!st) throw SchemaError("/stage", "unknown stage");
  s.stage_ = *st;
  s.draft_ = spec_from_json(doc.at("draft"));
  for (const auto& f : doc.value("flags", Json::array()))
    s.flags_.push_back({f.at("code").get<std::string>(), f.at("path").get<std::string>(), f.at("message").get<std::string>()});
  const Json c = doc.value("config", Json::object());
  s.config_.max_story_chars = c.value("max_story_chars", s.config_.max_story_chars);
  s.config_.decorative_density = c.value("decorative_density", s.config_.decorative_density);
  s.config_.limits.max_events = c.value("max_events", s.config_.limits.max_events);
  s.config_.limits.max_objects = c.value("max_objects", s.config_.limits.max_objects);
  return s;
}

}  // namespace vignette::extract
