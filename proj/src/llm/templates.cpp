#include "vignette/llm/templates.hpp"

#include <array>
#include <map>

namespace vignette::llm {

namespace {

// Extraction and classification run at temperature 0; dialogue and planning sample.
const std::array<PromptTemplate, 13> kTemplates{{
    {TemplateId::EXTRACT_CHARACTERS,
     "You extract characters from a short first-person everyday story for an interactive vignette.",
     R"(Story:
{{story}}

List every character in the story.
- The narrator (first-person pronoun such as "I" or "me") is the player character: role "PC", name "me".
- Every other named or described person is an NPC with role "NPC".
- Fill age, personality, social_role, mood and language_style ONLY when the story states them explicitly. Otherwise use null. Do not infer.
- If a plural pronoun such as "we" cannot be resolved to specific characters, add "NEEDS_REVIEW" to flags.
Reply with JSON: {"characters": [{"name": str, "role": "PC"|"NPC", "age": str|null, "personality": str|null, "social_role": str|null, "mood": str|null, "language_style": str|null}], "flags": [str]})",
     "characters", 0.0},
    {TemplateId::SELECT_LAYOUT,
     "You classify where an everyday story takes place using an urban space classification.",
     R"(Story:
{{story}}

Available layout tags: {{tags}}
Pick the single tag whose kind of space best matches where the story happens.
Reply with JSON: {"tag": str})",
     "layout", 0.0},
    {TemplateId::LABEL_ROOMS,
     "You label the rooms of a map layout by their function.",
     R"(Story:
{{story}}

Rooms of the layout (id, size in tiles, suggested function):
{{rooms}}

Give every room a short functional label (for example kitchen, bedroom, living room) that suits the story.
Reply with JSON: {"labels": {"<room id>": str}})",
     "room_labels", 0.0},
    {TemplateId::EXTRACT_EVENTS,
     "You turn a short story into (character, action, object) activities for an interactive vignette.",
     R"(Story:
{{story}}

Characters: {{characters}}
{{#phase_objects}}
Catalog object names: {{objects}}
Room labels: {{rooms}}
List the physical objects characters need for the actions in the story, choosing catalog names where possible, and the room each belongs in.
Reply with JSON: {"objects": [{"name": str, "room": str}]}
{{/phase_objects}}
{{#phase_actions}}
Objects in the environment (id: name @ room): {{objects}}
List the actions performed by each character in the order they are mentioned. Match each action to the most appropriate object id; use null when no object fits.
Reply with JSON: {"actions": [{"character": "<character id>", "action": str, "object": "<object id>"|null}]}
{{/phase_actions}}
{{#phase_group}}
Numbered actions:
{{actions}}
Group actions that happen at the same time by different characters into a single key event. Every action index appears in exactly one group.
Reply with JSON: {"groups": [[int]]}
{{/phase_group}}
{{#phase_order}}
Key events (index: actions):
{{groups}}
Order these key events by when they happen in the story.
Reply with JSON: {"order": [int]}
{{/phase_order}})",
     "event_actions", 0.0},
    {TemplateId::AFFORDANCE,
     "You reason about how people typically interact with household and workplace objects.",
     R"(Object: {{object_name}}

List short gerund phrases for what a person typically does with this object, and where the person must stand:
"on" (on top of it, e.g. sleeping on a bed), "partial" (on part of it, e.g. the seat of a sofa),
"around" (anywhere next to it, e.g. sitting around a table), "directional" (in front of one side, e.g. opening a fridge).
Reply with JSON: {"actions": [str], "zone_type": "on"|"partial"|"around"|"directional", "needs_facing": bool})",
     "affordance", 0.0},
    {TemplateId::PLACE_REASONING,
     "You reason about where objects go in a room.",
     R"(Object: {{object_name}}
Room: {{room_label}}
Objects already in the room: {{existing}}

Decide the object's footprint in tiles, whether it must stand against a wall, and which existing objects it should be close to.
Reply with JSON: {"footprint": [int, int], "wall_adjacent": bool, "near": [{"anchor": str, "max_distance": int}]})",
     "placement", 0.0},
    {TemplateId::PERSONA_SUGGEST,
     "You help an author describe a character's persona from sample conversations.",
     R"(Character: {{character}}
Blank persona fields: {{blank_fields}}
Conversation samples:
{{snippets}}

Suggest values only for the blank fields that the conversation supports. Keep each suggestion to a few words.
Reply with JSON: {"suggestions": {"<field>": str}})",
     "persona_suggestions", 0.0},
    {TemplateId::CHAR_CHAT,
     "You role-play a character in an everyday interactive story. Stay in character and keep replies to one or two sentences.",
     R"(You are {{name}}.
Persona: {{persona}}
{{#snippets}}Example lines of this character:
{{snippets}}
{{/snippets}}{{#context}}Current situation: {{context}}
{{/context}}Conversation so far:
{{history}}
{{speaker}} says: "{{message}}"
Reply with JSON: {"reply": str})",
     "chat_reply", 0.7},
    {TemplateId::PLAN_ACTIVITY,
     "You plan the next activity of a non-player character in an interactive vignette.",
     R"(Character: {{npc_name}} (id {{npc_id}})
{{#include_persona}}
## Persona
{{persona}}
{{/include_persona}}
{{#include_storyline}}
## Storyline
{{storyline}}
{{/include_storyline}}
Current activity: {{current_activity}}

Possible activities (object id: actions):
{{candidates}}

Choose the character's next activity for two possible futures:
- plan_A: the player character does the activity of the next key event.
- plan_B: the player character does something else instead.
{{^need_plan_a}}plan_A is fixed by the story as {{authored_plan_a}}; repeat it unchanged.
{{/need_plan_a}}Each plan must use an object id and one of that object's listed actions.
Reply with JSON: {"plan_A": {"object_id": str, "action": str}, "plan_B": {"object_id": str, "action": str}})",
     "activity_plan", 0.7},
    {TemplateId::INNER_VOICE,
     "You write the player character's inner voice: a short, friendly first-person nudge.",
     R"(The player character ({{pc_name}}) should next be {{next_action}} at the {{object_name}}.
Write one short first-person sentence nudging toward that activity without giving orders.
Reply with JSON: {"text": str})",
     "inner_voice", 0.7},
    {TemplateId::GUIDE_REPLY,
     "You role-play a character who gently keeps an interactive story on track. Stay in character.",
     R"(You are {{name}}.
Persona: {{persona}}
Storyline so far:
{{storyline}}
The next thing that should happen: {{next_event}}
The player character says: "{{message}}"
Do not agree to skip or abandon the next event. Reply in character, in one or two sentences, suggesting doing it together.
Reply with JSON: {"reply": str})",
     "chat_reply", 0.7},
    {TemplateId::DIVERGENCE_INTENT,
     "You classify what a player's chat message means for an ongoing story.",
     R"(Next event in the story: {{next_event}}
Player message: "{{message}}"
Classify the message: "follow" (agrees or moves toward the next event), "small_talk" (unrelated or harmless chat),
or "derail" (wants to skip, avoid or abandon the next event).
Reply with JSON: {"intent": "follow"|"small_talk"|"derail"})",
     "divergence_intent", 0.0},
    {TemplateId::BL_ACTIVITY,
     "You assign an activity to a character at an object.",
     R"(Object: {{object_name}}
Possible actions: {{actions}}
Pick one action.
Reply with JSON: {"action": str})",
     "bl_activity", 0.7},
}};

Json parse_schema(std::string_view text) { return Json::parse(text); }

const std::map<std::string, Json, std::less<>>& schemas() {
  static const std::map<std::string, Json, std::less<>> table = [] {
    const Json nullable_string = {{"type", Json::array({"string", "null"})}};
    std::map<std::string, Json, std::less<>> t;
    t["characters"] = {
        {"type", "object"},
        {"required", {"characters"}},
        {"properties",
         {{"characters",
           {{"type", "array"},
            {"items",
             {{"type", "object"},
              {"required", {"name", "role"}},
              {"properties",
               {{"name", {{"type", "string"}, {"minLength", 1}}},
                {"role", {{"type", "string"}, {"enum", {"PC", "NPC"}}}},
                {"age", nullable_string},
                {"personality", nullable_string},
                {"social_role", nullable_string},
                {"mood", nullable_string},
                {"language_style", nullable_string}}}}}}},
          {"flags", {{"type", "array"}, {"items", {{"type", "string"}}}}}}}};
    t["layout"] = parse_schema(R"({"type":"object","required":["tag"],"properties":{"tag":{"type":"string"}}})");
    t["room_labels"] = parse_schema(
        R"({"type":"object","required":["labels"],"properties":{"labels":{"type":"object","additionalProperties":{"type":"string"}}}})");
    t["event_objects"] = parse_schema(R"({"type":"object","required":["objects"],"properties":{"objects":{"type":"array",
        "items":{"type":"object","required":["name","room"],"properties":{"name":{"type":"string","minLength":1},"room":{"type":"string"}}}}}})");
    t["event_actions"] = parse_schema(R"({"type":"object","required":["actions"],"properties":{"actions":{"type":"array",
        "items":{"type":"object","required":["character","action","object"],"properties":{"character":{"type":"string"},
        "action":{"type":"string","minLength":1},"object":{"type":["string","null"]}}}}}})");
    t["event_groups"] = parse_schema(
        R"({"type":"object","required":["groups"],"properties":{"groups":{"type":"array","items":{"type":"array","minItems":1,"items":{"type":"integer"}}}}})");
    t["event_order"] = parse_schema(
        R"({"type":"object","required":["order"],"properties":{"order":{"type":"array","items":{"type":"integer"}}}})");
    t["affordance"] = parse_schema(R"({"type":"object","required":["actions","zone_type","needs_facing"],"properties":{
        "actions":{"type":"array","minItems":1,"items":{"type":"string","minLength":1}},
        "zone_type":{"type":"string","enum":["on","partial","around","directional"]},"needs_facing":{"type":"boolean"}}})");
    t["placement"] = parse_schema(R"({"type":"object","required":["footprint","wall_adjacent","near"],"properties":{
        "footprint":{"type":"array","minItems":2,"items":{"type":"integer"}},"wall_adjacent":{"type":"boolean"},
        "near":{"type":"array","items":{"type":"object","required":["anchor","max_distance"],"properties":{
        "anchor":{"type":"string"},"max_distance":{"type":"integer"}}}}}})");
    t["persona_suggestions"] = parse_schema(
        R"({"type":"object","required":["suggestions"],"properties":{"suggestions":{"type":"object","additionalProperties":{"type":"string"}}}})");
    t["chat_reply"] = parse_schema(
        R"({"type":"object","required":["reply"],"properties":{"reply":{"type":"string","minLength":1}}})");
    t["activity_plan"] = parse_schema(R"({"type":"object","required":["plan_A","plan_B"],"properties":{
        "plan_A":{"type":"object","required":["object_id","action"],"properties":{"object_id":{"type":"string"},"action":{"type":"string"}}},
        "plan_B":{"type":"object","required":["object_id","action"],"properties":{"object_id":{"type":"string"},"action":{"type":"string"}}}}})");
    t["inner_voice"] = parse_schema(
        R"({"type":"object","required":["text"],"properties":{"text":{"type":"string","minLength":1}}})");
    t["divergence_intent"] = parse_schema(
        R"({"type":"object","required":["intent"],"properties":{"intent":{"type":"string","enum":["follow","small_talk","derail"]}}})");
    t["bl_activity"] = parse_schema(
        R"({"type":"object","required":["action"],"properties":{"action":{"type":"string","minLength":1}}})");
    return t;
  }();
  return table;
}

bool type_matches(const Json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "integer") return value.is_number_integer();
  if (type == "number") return value.is_number();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  return false;
}

std::string check_node(const Json& schema, const Json& value, const std::string& path) {
  if (auto t = schema.find("type"); t != schema.end()) {
    bool ok = false;
    if (t->is_array()) {
      for (const auto& alt : *t) ok |= type_matches(value, alt.get<std::string>());
    } else {
      ok = type_matches(value, t->get<std::string>());
    }
    if (!ok) return path + ": expected " + t->dump();
  }
  if (auto e = schema.find("enum"); e != schema.end()) {
    bool found = false;
    for (const auto& alt : *e) found |= (alt == value);
    if (!found) return path + ": value " + value.dump() + " not in " + e->dump();
  }
  if (value.is_string()) {
    if (auto m = schema.find("minLength"); m != schema.end() && value.get<std::string>().size() < m->get<std::size_t>())
      return path + ": string too short";
  }
  if (value.is_object()) {
    if (auto req = schema.find("required"); req != schema.end())
      for (const auto& key : *req)
        if (!value.contains(key.get<std::string>())) return path + "/" + key.get<std::string>() + ": missing";
    const auto props = schema.find("properties");
    const auto extra = schema.find("additionalProperties");
    for (const auto& [k, v] : value.items()) {
      if (props != schema.end() && props->contains(k)) {
        if (auto err = check_node((*props)[k], v, path + "/" + k); !err.empty()) return err;
      } else if (extra != schema.end() && extra->is_object()) {
        if (auto err = check_node(*extra, v, path + "/" + k); !err.empty()) return err;
      }
    }
  }
  if (value.is_array()) {
    if (auto m = schema.find("minItems"); m != schema.end() && value.size() < m->get<std::size_t>())
      return path + ": expected at least " + m->dump() + " items";
    if (auto items = schema.find("items"); items != schema.end())
      for (std::size_t i = 0; i < value.size(); ++i)
        if (auto err = check_node(*items, value[i], path + "/" + std::to_string(i)); !err.empty()) return err;
  }
  return {};
}

bool truthy(const Json& v) {
  if (v.is_null()) return false;
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) return !v.get<std::string>().empty();
  if (v.is_array() || v.is_object()) return !v.empty();
  return true;
}

std::string stringify(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

const Json& lookup(const Json& variables, const std::string& name) {
  auto it = variables.find(name);
  if (it == variables.end()) throw TemplateError("template variable '" + name + "' is not provided");
  return *it;
}

std::string render_range(std::string_view text, const Json& variables) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t open = text.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, open - pos));
    std::size_t close = text.find("}}", open + 2);
    if (close == std::string_view::npos) throw TemplateError("unterminated tag in template");
    std::string tag(text.substr(open + 2, close - open - 2));
    std::size_t after = close + 2;
    if (!tag.empty() && (tag[0] == '#' || tag[0] == '^')) {
      const bool inverted = tag[0] == '^';
      const std::string name = tag.substr(1);
      const std::string end_tag = "{{/" + name + "}}";
      std::size_t end = text.find(end_tag, after);
      if (end == std::string_view::npos) throw TemplateError("section '" + name + "' is not closed");
      const bool show = truthy(lookup(variables, name)) != inverted;
      if (show) out.append(render_range(text.substr(after, end - after), variables));
      pos = end + end_tag.size();
      // a section tag alone on its line does not leave a blank line behind
      if (pos < text.size() && text[pos] == '\n' && (out.empty() || out.back() == '\n')) ++pos;
      continue;
    }
    if (!tag.empty() && tag[0] == '/') throw TemplateError("unexpected closing tag '" + tag + "'");
    out.append(stringify(lookup(variables, tag)));
    pos = after;
  }
  return out;
}

}  // namespace

const PromptTemplate& prompt_template(TemplateId id) {
  for (const auto& t : kTemplates)
    if (t.id == id) return t;
  throw std::out_of_range("no template for id");
}

std::string render_template(std::string_view text, const Json& variables) {
  if (!variables.is_object()) throw TemplateError("template variables must be a JSON object");
  // Placeholders inside hidden sections must still be covered.
  for (std::size_t open = text.find("{{"); open != std::string_view::npos; open = text.find("{{", open + 2)) {
    std::size_t close = text.find("}}", open + 2);
    if (close == std::string_view::npos) throw TemplateError("unterminated tag in template");
    std::string tag(text.substr(open + 2, close - open - 2));
    if (!tag.empty() && (tag[0] == '#' || tag[0] == '^' || tag[0] == '/')) tag.erase(0, 1);
    (void)lookup(variables, tag);
  }
  return render_range(text, variables);
}

RenderedPrompt render_prompt(const PromptRequest& request) {
  const PromptTemplate& t = prompt_template(request.template_id);
  RenderedPrompt p;
  p.template_id = request.template_id;
  p.schema_id = request.output_schema_id.empty() ? std::string(t.default_schema) : request.output_schema_id;
  p.system = render_template(t.system, request.variables);
  p.user = render_template(t.user, request.variables);
  p.variables = request.variables;
  p.variables_key = variables_key(request.template_id, request.variables);
  p.temperature = t.temperature;
  (void)schema_document(p.schema_id);
  return p;
}

const Json& schema_document(std::string_view schema_id) {
  const auto& table = schemas();
  auto it = table.find(schema_id);
  if (it == table.end()) throw std::out_of_range("unknown output schema '" + std::string(schema_id) + "'");
  return it->second;
}

SchemaCheck check_schema(std::string_view schema_id, const Json& value) {
  std::string err = check_node(schema_document(schema_id), value, "");
  return {err.empty(), err};
}

}  // namespace vignette::llm
