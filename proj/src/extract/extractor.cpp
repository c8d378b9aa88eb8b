#include "vignette/extract/extractor.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "vignette/util.hpp"

namespace vignette::extract {

namespace {

using llm::TemplateId;

std::vector<std::string> words_of(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || c == '\'' || u >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

bool has_any_word(std::string_view text, std::initializer_list<std::string_view> wanted) {
  for (const auto& w : words_of(text))
    for (auto x : wanted)
      if (w == x) return true;
  return false;
}

// A persona value is kept only when the story states it: its words appear in the story in order.
bool stated_in(std::string_view value, std::string_view story) {
  const auto v = words_of(value);
  const auto s = words_of(story);
  if (v.empty() || v.size() > s.size()) return false;
  for (std::size_t i = 0; i + v.size() <= s.size(); ++i)
    if (std::equal(v.begin(), v.end(), s.begin() + static_cast<std::ptrdiff_t>(i))) return true;
  return false;
}

Json complete_or_throw(const llm::Gateway& gw, TemplateId id, Json vars, const std::string& schema = "") {
  auto r = gw.complete({id, std::move(vars), schema});
  if (!r.ok())
    throw ExtractionError("LLM_FAILURE", std::string(llm::to_string(id)) + " failed: " + r.error,
                          {{"template", llm::to_string(id)}, {"error", r.error}});
  return *r.parsed;
}

Json characters_json(const std::vector<Character>& cs) {
  Json out = Json::array();
  for (const auto& c : cs) out.push_back({{"id", c.id}, {"name", c.name}, {"role", to_string(c.role)}});
  return out;
}

Json events_vars(std::string_view story, const std::vector<Character>& characters, const char* phase) {
  Json v = {{"story", std::string(story)},
            {"characters", characters_json(characters)},
            {"phase_objects", false},
            {"phase_actions", false},
            {"phase_group", false},
            {"phase_order", false},
            {"objects", Json::array()},
            {"rooms", Json::array()},
            {"actions", Json::array()},
            {"groups", Json::array()}};
  v[phase] = true;
  return v;
}

const Room* room_for_hint(const Environment& env, std::string_view hint) {
  if (hint.empty()) return nullptr;
  for (const auto& r : env.rooms)
    if (r.id == hint) return &r;
  for (const auto& r : env.rooms)
    if (!r.label.empty() && normalize_name(r.label) == normalize_name(hint)) return &r;
  for (const auto& r : env.rooms)
    if (!r.label.empty() && (label_matches(r.label, hint) || label_matches(hint, r.label))) return &r;
  return nullptr;
}

const Character* match_character(const std::vector<Character>& cs, std::string_view ref) {
  const std::string n = normalize_name(ref);
  for (const auto& c : cs)
    if (c.id == ref || normalize_name(c.name) == n) return &c;
  if (n == "i" || n == "me" || n == "myself" || n == "pc" || n == "narrator")
    for (const auto& c : cs)
      if (c.role == Role::pc) return &c;
  return nullptr;
}

std::string match_object(const Environment& env, const Json& ref) {
  if (!ref.is_string()) return {};
  const std::string r = ref.get<std::string>();
  if (env.find_object(r)) return r;
  const std::string n = normalize_name(r);
  for (const auto& o : env.objects)
    if (normalize_name(o.name) == n) return o.id;
  return {};
}

void add_flag(std::vector<Flag>* flags, Flag f) {
  if (flags && std::find(flags->begin(), flags->end(), f) == flags->end()) flags->push_back(std::move(f));
}

struct RawAction {
  std::string character_id;
  std::string action;
  std::string object_id;
};

// Groups must partition 0..n-1 into runs of consecutive indices with at most one action per character.
bool grouping_ok(const std::vector<std::vector<int>>& groups, const std::vector<RawAction>& actions) {
  std::vector<int> seen(actions.size(), 0);
  for (const auto& g : groups) {
    if (g.empty()) return false;
    std::vector<int> sorted = g;
    std::sort(sorted.begin(), sorted.end());
    std::set<std::string> chars;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      const int idx = sorted[i];
      if (idx < 0 || idx >= static_cast<int>(actions.size())) return false;
      if (seen[static_cast<std::size_t>(idx)]++) return false;
      if (i && sorted[i] != sorted[i - 1] + 1) return false;
      if (!chars.insert(actions[static_cast<std::size_t>(idx)].character_id).second) return false;
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
}

bool is_permutation_of_n(const std::vector<int>& order, std::size_t n) {
  if (order.size() != n) return false;
  std::vector<int> s = order;
  std::sort(s.begin(), s.end());
  for (std::size_t i = 0; i < n; ++i)
    if (s[i] != static_cast<int>(i)) return false;
  return true;
}

std::string snippet_lines(const std::vector<Snippet>& snippets) {
  std::string out;
  for (const auto& s : snippets) out += s.speaker + ": " + s.utterance + "\n";
  return out;
}

}  // namespace

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::layout_pending: return "layout_pending";
    case Stage::rooms_pending: return "rooms_pending";
    case Stage::objects_pending: return "objects_pending";
    case Stage::characters_pending: return "characters_pending";
    case Stage::events_pending: return "events_pending";
    case Stage::complete: return "complete";
  }
  return "?";
}

std::optional<Stage> parse_stage(std::string_view s) {
  for (Stage st : {Stage::layout_pending, Stage::rooms_pending, Stage::objects_pending, Stage::characters_pending,
                   Stage::events_pending, Stage::complete})
    if (to_string(st) == s) return st;
  return std::nullopt;
}

Json to_json(const Flag& f) { return {{"code", f.code}, {"path", f.path}, {"message", f.message}}; }

const std::vector<std::string>& persona_fields() {
  static const std::vector<std::string> f = {"age", "personality", "social_role", "mood", "language_style"};
  return f;
}

std::optional<std::string>* persona_field(Character& c, std::string_view field) {
  if (field == "age") return &c.age;
  if (field == "personality") return &c.personality;
  if (field == "social_role") return &c.social_role;
  if (field == "mood") return &c.mood;
  if (field == "language_style") return &c.language_style;
  return nullptr;
}

std::vector<Character> extract_characters(const llm::Gateway& gw, std::string_view story, std::vector<Flag>* flags) {
  if (words_of(story).empty()) throw ExtractionError("EMPTY_STORY", "story is empty");
  const bool first_person = has_any_word(story, {"i", "me", "my", "mine", "myself", "we", "us", "our", "ours"});
  if (!first_person)
    throw ExtractionError("NO_NARRATOR", "story has no first-person narrator; write it from the player's point of view");
  Json doc = complete_or_throw(gw, TemplateId::EXTRACT_CHARACTERS, {{"story", std::string(story)}});

  std::vector<Character> out;
  std::set<std::string> names;
  bool have_pc = false;
  for (const auto& c : doc["characters"]) {
    Character ch;
    ch.name = c["name"].get<std::string>();
    if (!names.insert(normalize_name(ch.name)).second) continue;
    ch.role = c["role"] == "PC" && !have_pc ? Role::pc : Role::npc;
    have_pc = have_pc || ch.role == Role::pc;
    for (const auto& field : persona_fields()) {
      auto it = c.find(field);
      if (it == c.end() || !it->is_string()) continue;
      // Only what the story states; nothing inferred.
      if (stated_in(it->get<std::string>(), story)) *persona_field(ch, field) = it->get<std::string>();
    }
    out.push_back(std::move(ch));
  }
  if (!have_pc) {
    Character pc;
    pc.name = "me";
    pc.role = Role::pc;
    out.insert(out.begin(), pc);
  }
  std::stable_partition(out.begin(), out.end(), [](const Character& c) { return c.role == Role::pc; });
  std::set<std::string> ids;
  int npc_n = 0;
  for (auto& c : out) {
    std::string base = c.role == Role::pc ? "me" : slugify(c.name);
    if (base.empty()) base = "npc";
    std::string id = base;
    for (int n = 2; !ids.insert(id).second; ++n) id = base + "_" + std::to_string(n);
    c.id = id;
    c.sprite_id = c.role == Role::pc ? "pc_default" : "npc_" + std::to_string(++npc_n);
  }
  if (out.size() > kMaxCharacters) {
    Json list = Json::array();
    for (const auto& c : out) list.push_back({{"name", c.name}, {"role", to_string(c.role)}});
    throw ExtractionError("CAP_EXCEEDED",
                          std::to_string(out.size()) + " characters detected, at most " + std::to_string(kMaxCharacters) +
                              " are supported; merge or drop some",
                          {{"limit", kMaxCharacters}, {"characters", list}});
  }
  if (doc.contains("flags"))
    for (const auto& f : doc["flags"])
      if (f == "NEEDS_REVIEW")
        add_flag(flags, {"NEEDS_REVIEW", "/characters", "plural pronoun could not be resolved to specific characters"});
  const auto npcs = std::count_if(out.begin(), out.end(), [](const Character& c) { return c.role == Role::npc; });
  if (npcs >= 2 && has_any_word(story, {"we", "us", "our"}))
    add_flag(flags, {"NEEDS_REVIEW", "/characters", "'we' could mean several different groups of characters; check who takes part"});
  return out;
}

const LayoutTemplate& select_layout(const llm::Gateway& gw, std::string_view story, const LayoutCatalog& layouts,
                                    std::vector<Flag>* flags) {
  std::string tags;
  for (const auto& t : layouts.tags()) tags += (tags.empty() ? "" : ", ") + t;
  auto r = gw.complete({TemplateId::SELECT_LAYOUT, {{"story", std::string(story)}, {"tags", tags}}, ""});
  if (r.ok()) {
    const std::string tag = normalize_name((*r.parsed)["tag"].get<std::string>());
    if (const auto* l = layouts.find_by_tag(tag)) return *l;
    if (const auto* l = layouts.find(tag)) return *l;
  }
  const LayoutTemplate* fallback = layouts.find_by_tag("residential");
  if (!fallback) fallback = &layouts.layouts().at(0);
  add_flag(flags, {"LAYOUT_FALLBACK", "/environment/layout_id",
                   "layout answer not in catalog; using '" + fallback->id + "'"});
  return *fallback;
}

std::map<std::string, std::string> label_rooms(const llm::Gateway& gw, const LayoutTemplate& layout, std::string_view story) {
  Json rooms = Json::array();
  for (const auto& r : layout.rooms)
    rooms.push_back({{"id", r.id}, {"w", r.rect.w}, {"h", r.rect.h}, {"default_label", r.default_label}});
  std::map<std::string, std::string> out;
  auto res = gw.complete({TemplateId::LABEL_ROOMS, {{"story", std::string(story)}, {"rooms", rooms}}, ""});
  for (const auto& r : layout.rooms) {
    std::string label;
    if (res.ok()) {
      const Json& labels = (*res.parsed)["labels"];
      if (labels.contains(r.id)) label = labels[r.id].get<std::string>();
    }
    out[r.id] = label.empty() ? (r.default_label.empty() ? "room" : r.default_label) : label;
  }
  return out;
}

std::vector<env::RequiredObject> extract_event_objects(const llm::Gateway& gw, std::string_view story,
                                                       const std::vector<Character>& characters, const Environment& env,
                                                       const AssetCatalog& catalog) {
  Json vars = events_vars(story, characters, "phase_objects");
  for (const auto& a : catalog.assets()) vars["objects"].push_back(a.display_name);
  for (const auto& r : env.rooms) vars["rooms"].push_back(r.label);
  Json doc = complete_or_throw(gw, TemplateId::EXTRACT_EVENTS, vars, "event_objects");
  std::vector<env::RequiredObject> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& o : doc["objects"]) {
    const std::string name = o["name"].get<std::string>();
    const Room* room = room_for_hint(env, o["room"].get<std::string>());
    const std::string hint = room ? room->id : std::string();
    if (!seen.insert({normalize_name(name), hint}).second) continue;
    out.push_back({name, hint, ObjectKind::necessary_event});
  }
  return out;
}

std::vector<KeyEvent> extract_events(const llm::Gateway& gw, std::string_view story, const std::vector<Character>& characters,
                                     const Environment& env, std::vector<Flag>* flags) {
  // 1. actions, each matched to an object
  Json vars = events_vars(story, characters, "phase_actions");
  for (const auto& o : env.objects) {
    const Room* room = env.find_room(o.room_id);
    vars["objects"].push_back({{"id", o.id}, {"name", o.name}, {"room", room ? room->label : ""}});
  }
  Json doc = complete_or_throw(gw, TemplateId::EXTRACT_EVENTS, vars, "event_actions");
  std::vector<RawAction> actions;
  for (const auto& a : doc["actions"]) {
    const Character* c = match_character(characters, a["character"].get<std::string>());
    if (!c) {
      add_flag(flags, {"UNKNOWN_CHARACTER", "/key_events",
                       "action '" + a["action"].get<std::string>() + "' names unknown character '" +
                           a["character"].get<std::string>() + "'; dropped"});
      continue;
    }
    actions.push_back({c->id, a["action"].get<std::string>(), match_object(env, a["object"])});
  }
  if (actions.empty()) return {};

  // 2. simultaneity grouping
  Json numbered = Json::array();
  for (std::size_t i = 0; i < actions.size(); ++i)
    numbered.push_back({{"index", i}, {"character", actions[i].character_id}, {"action", actions[i].action},
                        {"object", actions[i].object_id.empty() ? Json(nullptr) : Json(actions[i].object_id)}});
  Json gvars = events_vars(story, characters, "phase_group");
  gvars["actions"] = numbered;
  std::vector<std::vector<int>> groups;
  auto gres = gw.complete({TemplateId::EXTRACT_EVENTS, gvars, "event_groups"});
  if (gres.ok())
    for (const auto& g : (*gres.parsed)["groups"]) groups.push_back(g.get<std::vector<int>>());
  if (!gres.ok() || !grouping_ok(groups, actions)) {
    add_flag(flags, {"GROUPING_REJECTED", "/key_events", "grouping was not a partition of consecutive actions; one event per action"});
    groups.clear();
    for (std::size_t i = 0; i < actions.size(); ++i) groups.push_back({static_cast<int>(i)});
  }
  for (auto& g : groups) std::sort(g.begin(), g.end());
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });

  // 3. total order
  std::vector<int> order;
  if (groups.size() > 1) {
    Json glist = Json::array();
    for (std::size_t i = 0; i < groups.size(); ++i) {
      Json acts = Json::array();
      for (int idx : groups[i]) acts.push_back(numbered[static_cast<std::size_t>(idx)]);
      glist.push_back({{"index", i}, {"actions", acts}});
    }
    Json ovars = events_vars(story, characters, "phase_order");
    ovars["groups"] = glist;
    auto ores = gw.complete({TemplateId::EXTRACT_EVENTS, ovars, "event_order"});
    if (ores.ok()) order = (*ores.parsed)["order"].get<std::vector<int>>();
    if (!is_permutation_of_n(order, groups.size())) {
      if (ores.ok()) add_flag(flags, {"ORDER_REJECTED", "/key_events", "event order was not a permutation; story order kept"});
      order.clear();
    }
  }
  if (order.empty())
    for (std::size_t i = 0; i < groups.size(); ++i) order.push_back(static_cast<int>(i));

  std::vector<KeyEvent> events;
  for (int gi : order) {
    KeyEvent ev;
    ev.index = static_cast<int>(events.size());
    for (int idx : groups[static_cast<std::size_t>(gi)]) {
      const auto& a = actions[static_cast<std::size_t>(idx)];
      ev.activities.push_back({a.character_id, a.action, a.object_id});
    }
    events.push_back(std::move(ev));
  }
  for (const auto& ev : events)
    for (std::size_t i = 0; i < ev.activities.size(); ++i)
      if (ev.activities[i].object_id.empty())
        add_flag(flags, {"NEEDS_OBJECT",
                         "/key_events/" + std::to_string(ev.index) + "/activities/" + std::to_string(i) + "/object_id",
                         "no object fits '" + ev.activities[i].action + "'; pick one"});
  return events;
}

std::map<std::string, std::string> suggest_persona(const llm::Gateway& gw, const Character& character) {
  if (character.conversation_snippets.empty())
    throw std::invalid_argument("persona suggestions need at least one conversation snippet");
  Character copy = character;
  std::vector<std::string> blank;
  for (const auto& f : persona_fields()) {
    auto* v = persona_field(copy, f);
    if (!*v || (*v)->empty()) blank.push_back(f);
  }
  std::map<std::string, std::string> out;
  if (blank.empty()) return out;
  std::string blank_list;
  for (const auto& b : blank) blank_list += (blank_list.empty() ? "" : ", ") + b;
  auto r = gw.complete({TemplateId::PERSONA_SUGGEST,
                        {{"character", character.name}, {"blank_fields", blank_list},
                         {"snippets", snippet_lines(character.conversation_snippets)}},
                        ""});
  if (!r.ok()) return out;
  for (const auto& [k, v] : (*r.parsed)["suggestions"].items()) {
    if (std::find(blank.begin(), blank.end(), k) == blank.end()) continue;  // never overwrite
    const std::string s = v.get<std::string>();
    if (!s.empty()) out[k] = s;
  }
  return out;
}

std::string simulate_chat(const llm::Gateway& gw, const Character& character, const std::string& author_utterance,
                          const std::vector<Snippet>& history) {
  if (!gw.moderate(author_utterance).allowed) return std::string(llm::kRefusalLine);
  auto r = gw.complete({TemplateId::CHAR_CHAT,
                        {{"name", character.name},
                         {"persona", describe_persona(character)},
                         {"snippets", snippet_lines(character.conversation_snippets)},
                         {"context", ""},
                         {"history", snippet_lines(history)},
                         {"speaker", "Author"},
                         {"message", author_utterance}},
                        ""});
  if (!r.ok()) return "...";
  const std::string reply = (*r.parsed)["reply"].get<std::string>();
  if (!gw.moderate(reply).allowed) return std::string(llm::kRefusalLine);
  return reply;
}

void sync_object_kinds(VignetteSpec& spec) {
  std::set<std::string> used;
  for (const auto& ev : spec.key_events)
    for (const auto& a : ev.activities)
      if (!a.object_id.empty()) used.insert(a.object_id);
  for (auto& o : spec.environment.objects) {
    if (used.count(o.id)) o.kind = ObjectKind::necessary_event;
    else if (o.kind == ObjectKind::necessary_event) o.kind = ObjectKind::necessary_room;
  }
}

}  // namespace vignette::extract
