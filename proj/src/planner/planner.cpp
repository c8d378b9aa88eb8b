#include "vignette/planner/planner.hpp"

#include <algorithm>
#include <cctype>

namespace vignette::planner {

namespace {

using llm::Json;
using llm::TemplateId;

std::string object_name(const VignetteSpec& spec, const std::string& id) {
  const auto* o = spec.environment.find_object(id);
  return o ? o->name : id;
}

std::string line_for(const ActivityTuple& a, const VignetteSpec& spec) {
  const auto* c = spec.find_character(a.character_id);
  std::string who = c ? c->name : a.character_id;
  if (is_idle(a)) return who + ": idle";
  return who + ": " + a.action + (a.object_id.empty() ? "" : " (" + object_name(spec, a.object_id) + ")");
}

std::optional<ActivityTuple> authored_for(const VignetteSpec& spec, std::optional<int> event, const std::string& id) {
  if (!event || *event < 0 || static_cast<std::size_t>(*event) >= spec.key_events.size()) return std::nullopt;
  if (const auto* a = spec.key_events[static_cast<std::size_t>(*event)].activity_for(id)) return *a;
  return std::nullopt;
}

// A plan is usable when it names a real object and one of its actions.
std::optional<ActivityTuple> checked(const Json& plan, const std::string& npc_id, const VignetteSpec& spec) {
  if (!plan.is_object()) return std::nullopt;
  const std::string oid = plan.value("object_id", "");
  const std::string action = plan.value("action", "");
  const auto* o = spec.environment.find_object(oid);
  if (!o || !o->has_action(action) || o->zone.tiles.empty()) return std::nullopt;
  return ActivityTuple{npc_id, action, oid};
}

PlanPair fallback_pair(const std::string& npc_id, int tick, std::optional<int> event, double latency, std::string flag) {
  PlanPair p;
  p.npc_id = npc_id;
  p.plan_A = idle_activity(npc_id);
  p.plan_B = idle_activity(npc_id);
  p.planned_at = tick;
  p.request_latency_ms = latency;
  p.for_key_event = event;
  p.fallback = true;
  p.flag = std::move(flag);
  return p;
}

}  // namespace

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::CD: return "CD";
    case Mode::PO: return "PO";
    case Mode::SO: return "SO";
    case Mode::BL: return "BL";
  }
  return "?";
}

std::optional<Mode> parse_mode(std::string_view s) {
  std::string up;
  for (char c : s) up += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (Mode m : {Mode::CD, Mode::PO, Mode::SO, Mode::BL})
    if (to_string(m) == up) return m;
  return std::nullopt;
}

std::string_view to_string(Origin o) {
  switch (o) {
    case Origin::authored: return "authored";
    case Origin::viewer: return "viewer";
    case Origin::plan_a: return "plan_A";
    case Origin::plan_b: return "plan_B";
    case Origin::fallback: return "fallback";
  }
  return "?";
}

ActivityTuple idle_activity(const std::string& character_id) { return {character_id, "", ""}; }

bool is_idle(const ActivityTuple& a) { return a.action.empty() && a.object_id.empty(); }

const ActivityTuple& resolve(const PlanPair& plan, bool pc_followed_key_event) {
  return pc_followed_key_event ? plan.plan_A : plan.plan_B;
}

bool detect_divergence(const PcObservation& pc, const KeyEvent& next_key_event, const std::string& pc_id, int idle_threshold) {
  const ActivityTuple* mine = next_key_event.activity_for(pc_id);
  if (pc.activity && !is_idle(*pc.activity)) {
    if (!mine) return false;
    return !(pc.activity->action == mine->action && pc.activity->object_id == mine->object_id);
  }
  return pc.glow_active && pc.idle_ticks >= idle_threshold;
}

std::string Storyline::describe(const VignetteSpec& spec) const {
  std::string out = "Past activities:\n";
  if (past.empty()) out += "- none yet\n";
  for (const auto& p : past) out += "- " + line_for(p.activity, spec) + "\n";
  out += "Ongoing activities:\n";
  if (ongoing.empty()) out += "- none\n";
  for (const auto& c : spec.characters)
    if (auto it = ongoing.find(c.id); it != ongoing.end()) out += "- " + line_for(it->second, spec) + "\n";
  if (next_key_event && static_cast<std::size_t>(*next_key_event) < spec.key_events.size()) {
    const auto& ev = spec.key_events[static_cast<std::size_t>(*next_key_event)];
    out += "Next key event (" + std::to_string(*next_key_event + 1) + " of " + std::to_string(spec.key_events.size()) + "):\n";
    for (const auto& a : ev.activities) out += "- " + line_for(a, spec) + "\n";
  } else {
    out += "Next key event: none, the story is complete\n";
  }
  return out;
}

std::string next_event_phrase(const KeyEvent& ev, const VignetteSpec& spec) {
  if (const Character* pc = spec.player())
    if (const auto* a = ev.activity_for(pc->id)) return a->action;
  return ev.activities.empty() ? std::string() : ev.activities.front().action;
}

Planner::Planner(const llm::Gateway& gateway, PlannerConfig config)
    : gateway_(gateway), config_(config), rng_(config.seed) {}

std::vector<const ObjectInstance*> Planner::candidates(const Environment& env) {
  std::vector<const ObjectInstance*> out;
  for (const auto& o : env.objects)
    if (!o.actions.empty() && !o.zone.tiles.empty()) out.push_back(&o);
  return out;
}

PlanPair Planner::plan_pair(const Character& npc, const Storyline& storyline, const VignetteSpec& spec, int tick,
                            const ActivityTuple& current) {
  const auto authored = authored_for(spec, storyline.next_key_event, npc.id);
  if (config_.mode == Mode::BL) return plan_bl(npc, spec, authored, tick, storyline.next_key_event);

  const auto objects = candidates(spec.environment);
  Json cands = Json::array();
  for (const auto* o : objects) cands.push_back({{"object_id", o->id}, {"name", o->name}, {"actions", o->actions}});
  const bool persona = config_.mode == Mode::CD || config_.mode == Mode::PO;
  const bool story = config_.mode == Mode::CD || config_.mode == Mode::SO;
  Json vars = {{"npc_name", npc.name},
               {"npc_id", npc.id},
               {"include_persona", persona},
               {"persona", persona ? describe_persona(npc) : ""},
               {"include_storyline", story},
               {"storyline", story ? storyline.describe(spec) : ""},
               {"current_activity", is_idle(current) ? std::string("idle") : current.action},
               {"candidates", cands},
               {"need_plan_a", !authored},
               {"authored_plan_a", authored ? authored->action + " at " + authored->object_id : ""},
               // not rendered; lets scripts tell planning moments apart
               {"next_event", storyline.next_key_event ? *storyline.next_key_event : -1}};
  auto r = gateway_.complete({TemplateId::PLAN_ACTIVITY, vars, ""});
  if (!r.ok()) return fallback_pair(npc.id, tick, storyline.next_key_event, r.latency_ms, "PROVIDER_FAILURE: " + r.error);
  auto b = checked((*r.parsed)["plan_B"], npc.id, spec);
  std::optional<ActivityTuple> a = authored;
  if (!a) a = checked((*r.parsed)["plan_A"], npc.id, spec);
  if (!a || !b) return fallback_pair(npc.id, tick, storyline.next_key_event, r.latency_ms, "PLAN_INVALID");
  PlanPair p;
  p.npc_id = npc.id;
  p.plan_A = *a;
  p.plan_B = *b;
  p.planned_at = tick;
  p.request_latency_ms = r.latency_ms;
  p.for_key_event = storyline.next_key_event;
  return p;
}

ActivityTuple Planner::bl_pick(const Character& npc, const std::vector<const ObjectInstance*>& objects, double& latency) {
  const ObjectInstance* o = objects[rng_.uniform_index(objects.size())];
  auto r = gateway_.complete({TemplateId::BL_ACTIVITY, {{"object_name", o->name}, {"actions", o->actions}}, ""});
  latency += r.latency_ms;
  std::string action = o->actions.front();
  if (r.ok() && (*r.parsed)["action"].is_string() && o->has_action((*r.parsed)["action"].get<std::string>()))
    action = (*r.parsed)["action"].get<std::string>();
  return {npc.id, action, o->id};
}

PlanPair Planner::plan_bl(const Character& npc, const VignetteSpec& spec, const std::optional<ActivityTuple>& authored, int tick,
                          std::optional<int> ev) {
  const auto objects = candidates(spec.environment);
  if (objects.empty()) return fallback_pair(npc.id, tick, ev, 0.0, "NO_CANDIDATES");
  PlanPair p;
  p.npc_id = npc.id;
  p.planned_at = tick;
  p.plan_B = bl_pick(npc, objects, p.request_latency_ms);
  p.plan_A = authored ? *authored : bl_pick(npc, objects, p.request_latency_ms);
  p.for_key_event = ev;
  return p;
}

std::string Planner::inner_voice(const ActivityTuple& pc_next, const VignetteSpec& spec) {
  const Character* pc = spec.find_character(pc_next.character_id);
  auto r = gateway_.complete({TemplateId::INNER_VOICE,
                              {{"pc_name", pc ? pc->name : pc_next.character_id},
                               {"next_action", pc_next.action},
                               {"object_name", object_name(spec, pc_next.object_id)}},
                              ""});
  std::string text = r.ok() ? (*r.parsed)["text"].get<std::string>() : std::string();
  if (text.empty() || !gateway_.moderate(text).allowed) text = "Maybe I should be " + pc_next.action + " now.";
  return text;
}

Planner::ChatReply Planner::chat(const Character& npc, const std::string& speaker, const std::string& message,
                                 const Storyline& storyline, const VignetteSpec& spec, const std::vector<Snippet>& history) {
  ChatReply out;
  if (!gateway_.moderate(message).allowed) {
    out.text = std::string(llm::kRefusalLine);
    out.withheld = true;
    out.withheld_side = "viewer";
    return out;
  }
  std::string next;
  if (storyline.next_key_event && static_cast<std::size_t>(*storyline.next_key_event) < spec.key_events.size())
    next = next_event_phrase(spec.key_events[static_cast<std::size_t>(*storyline.next_key_event)], spec);

  if (!next.empty()) {
    auto intent = gateway_.complete({TemplateId::DIVERGENCE_INTENT, {{"next_event", next}, {"message", message}}, ""});
    out.intent = intent.ok() ? (*intent.parsed)["intent"].get<std::string>() : "small_talk";
  }
  std::string history_text;
  for (const auto& s : history) history_text += s.speaker + ": " + s.utterance + "\n";
  std::string snippets;
  for (const auto& s : npc.conversation_snippets) snippets += s.speaker + ": " + s.utterance + "\n";

  llm::ProviderResult r;
  if (out.intent == "derail") {
    out.guided = true;
    r = gateway_.complete({TemplateId::GUIDE_REPLY,
                           {{"name", npc.name},
                            {"persona", describe_persona(npc)},
                            {"storyline", storyline.describe(spec)},
                            {"next_event", next},
                            {"message", message}},
                           ""});
  } else {
    std::string context;
    if (auto it = storyline.ongoing.find(npc.id); it != storyline.ongoing.end() && !is_idle(it->second))
      context = npc.name + " is " + it->second.action + ".";
    r = gateway_.complete({TemplateId::CHAR_CHAT,
                           {{"name", npc.name},
                            {"persona", describe_persona(npc)},
                            {"snippets", snippets},
                            {"context", context},
                            {"history", history_text},
                            {"speaker", speaker},
                            {"message", message}},
                           ""});
  }
  if (!r.ok()) {
    out.text = out.guided ? "Let's do " + next + " first." : "...";
    return out;
  }
  out.text = (*r.parsed)["reply"].get<std::string>();
  if (!gateway_.moderate(out.text).allowed) {
    out.text = std::string(llm::kRefusalLine);
    out.withheld = true;
    out.withheld_side = "npc";
  }
  return out;
}

}  // namespace vignette::planner
