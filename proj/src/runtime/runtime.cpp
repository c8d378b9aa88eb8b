#include "vignette/runtime/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "vignette/env/geometry.hpp"
#include "vignette/env/placement.hpp"

namespace vignette::runtime {

using planner::Origin;

namespace {

Json tile_json(Tile t) { return Json::array({t.x, t.y}); }

Tile offset(Tile t, Direction d) {
  switch (d) {
    case Direction::N: return {t.x, t.y - 1};
    case Direction::E: return {t.x + 1, t.y};
    case Direction::S: return {t.x, t.y + 1};
    case Direction::W: return {t.x - 1, t.y};
  }
  return t;
}

// Walkable tile of `room` nearest its center among `reach`, scan order breaking ties.
std::optional<Tile> anchor_in(const Room& room, const WalkableMask& reach, Tile avoid) {
  const Tile center = room.rect.center();
  std::optional<Tile> best;
  int best_d = std::numeric_limits<int>::max();
  for (Tile t : room.rect.tiles()) {
    if (!reach.walkable(t) || t == avoid) continue;
    const int d = std::abs(t.x - center.x) + std::abs(t.y - center.y);
    if (d < best_d) {
      best_d = d;
      best = t;
    }
  }
  return best;
}

std::shared_future<planner::PlanPair> ready_future(planner::PlanPair p) {
  std::promise<planner::PlanPair> pr;
  pr.set_value(std::move(p));
  return pr.get_future().share();
}

}  // namespace

std::optional<Direction> parse_direction(std::string_view s) {
  if (s == "N" || s == "n" || s == "up") return Direction::N;
  if (s == "E" || s == "e" || s == "right") return Direction::E;
  if (s == "S" || s == "s" || s == "down") return Direction::S;
  if (s == "W" || s == "w" || s == "left") return Direction::W;
  return std::nullopt;
}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::N: return "N";
    case Direction::E: return "E";
    case Direction::S: return "S";
    case Direction::W: return "W";
  }
  return "?";
}

ViewerCommand ViewerCommand::move(int tick, Direction d) {
  ViewerCommand c;
  c.at_tick = tick;
  c.kind = Kind::move;
  c.direction = d;
  return c;
}

ViewerCommand ViewerCommand::interact(int tick, std::string object_id) {
  ViewerCommand c;
  c.at_tick = tick;
  c.kind = Kind::interact;
  c.object_id = std::move(object_id);
  return c;
}

ViewerCommand ViewerCommand::chat(int tick, std::string npc_id, std::string text) {
  ViewerCommand c;
  c.at_tick = tick;
  c.kind = Kind::chat;
  c.npc_id = std::move(npc_id);
  c.text = std::move(text);
  return c;
}

ViewerCommand ViewerCommand::wait(int tick, int n) {
  ViewerCommand c;
  c.at_tick = tick;
  c.kind = Kind::wait;
  c.n = n;
  return c;
}

Json to_json(const ViewerCommand& c) {
  Json j = {{"at_tick", c.at_tick}};
  switch (c.kind) {
    case ViewerCommand::Kind::move:
      j["kind"] = "move";
      j["direction"] = std::string(to_string(c.direction));
      break;
    case ViewerCommand::Kind::interact:
      j["kind"] = "interact";
      j["object_id"] = c.object_id;
      break;
    case ViewerCommand::Kind::chat:
      j["kind"] = "chat";
      j["npc_id"] = c.npc_id;
      j["text"] = c.text;
      break;
    case ViewerCommand::Kind::wait:
      j["kind"] = "wait";
      j["n"] = c.n;
      break;
  }
  return j;
}

ViewerCommand command_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("command must be an object");
  const int tick = j.value("at_tick", 0);
  const std::string kind = j.value("kind", "");
  try {
    if (kind == "move") {
      auto d = parse_direction(j.at("direction").get<std::string>());
      if (!d) throw std::invalid_argument("direction must be one of N, E, S, W");
      return ViewerCommand::move(tick, *d);
    }
    if (kind == "interact") return ViewerCommand::interact(tick, j.at("object_id").get<std::string>());
    if (kind == "chat") return ViewerCommand::chat(tick, j.at("npc_id").get<std::string>(), j.at("text").get<std::string>());
    if (kind == "wait") return ViewerCommand::wait(tick, j.value("n", 1));
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("bad ") + kind + " command: " + e.what());
  }
  throw std::invalid_argument("unknown command kind '" + kind + "'");
}

Json to_json(const LogRecord& r) {
  return {{"seq", r.seq}, {"tick", r.tick}, {"actor", r.actor}, {"kind", r.kind}, {"payload", r.payload}};
}

LogRecord record_from_json(const Json& j) {
  return {j.at("seq").get<std::size_t>(), j.at("tick").get<int>(), j.at("actor").get<std::string>(),
          j.at("kind").get<std::string>(), j.value("payload", Json::object())};
}

std::string to_ndjson(const std::vector<LogRecord>& log) {
  std::string out;
  for (const auto& r : log) {
    out += to_json(r).dump(-1, ' ', false, Json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

std::vector<LogRecord> parse_ndjson(const std::string& text) {
  std::vector<LogRecord> out;
  std::istringstream in(text);
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw std::invalid_argument("log line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

const CharacterState* WorldState::find(std::string_view id) const {
  for (const auto& c : characters)
    if (c.id == id) return &c;
  return nullptr;
}

CharacterState* WorldState::find(std::string_view id) {
  for (auto& c : characters)
    if (c.id == id) return &c;
  return nullptr;
}

std::string_view to_string(WorldState::Status s) { return s == WorldState::Status::running ? "running" : "ended"; }

Json to_json(const WorldState& w) {
  Json chars = Json::array();
  for (const auto& c : w.characters) {
    Json j = {{"id", c.id},
              {"position", tile_json(c.position)},
              {"action", c.activity.action},
              {"object_id", c.activity.object_id},
              {"origin", std::string(planner::to_string(c.origin))},
              {"remaining", c.remaining},
              {"arrived", c.arrived},
              {"paused", c.paused},
              {"holding", c.holding}};
    if (c.key_event >= 0) j["key_event"] = c.key_event;
    chars.push_back(std::move(j));
  }
  Json chat = Json::array();
  for (const auto& l : w.chat_log) chat.push_back({{"tick", l.tick}, {"npc_id", l.npc_id}, {"speaker", l.speaker}, {"text", l.text}});
  Json voice = Json::array();
  for (const auto& [t, text] : w.inner_voice_log) voice.push_back({{"tick", t}, {"text", text}});
  return {{"tick", w.tick},
          {"status", std::string(to_string(w.status))},
          {"characters", chars},
          {"glow", w.glow},
          {"chat_log", chat},
          {"inner_voice_log", voice},
          {"completed_events", w.completed_events}};
}

Runtime::Runtime(VignetteSpec spec, const llm::Gateway& gateway, RuntimeConfig config)
    : spec_(std::move(spec)), gateway_(gateway), config_(config), planner_(gateway, {config.mode, config.seed}) {
  ValidationReport report = validate_spec(spec_);
  report.merge(env::validate_environment(spec_));
  if (spec_.key_events.empty()) report.add(ViolationCode::NO_KEY_EVENTS, "/key_events", "nothing to play");
  if (!report.ok()) throw InitError(report);
  if (config_.activity_ticks < 1) throw std::invalid_argument("activity_ticks must be positive");

  const Tile spawn = *spawn_tile(spec_.environment);
  const WalkableMask reach = env::reachable_from(spec_.environment.walkable_mask, spawn);
  std::vector<const Room*> labelled;
  for (const auto& r : spec_.environment.rooms)
    if (!r.label.empty()) labelled.push_back(&r);

  int npc_index = 0;
  for (const auto& c : spec_.characters) {
    CharacterState s;
    s.id = c.id;
    s.activity = planner::idle_activity(c.id);
    if (c.role == Role::pc) {
      pc_id_ = c.id;
      s.position = spawn;
    } else {
      const Room* room = labelled[static_cast<std::size_t>(npc_index + 1) % labelled.size()];
      auto at = anchor_in(*room, reach, spawn);
      if (!at) at = anchor_in(*labelled.front(), reach, spawn);
      s.position = at.value_or(spawn);
      ++npc_index;
    }
    world_.characters.push_back(std::move(s));
  }

  log("system", "SESSION_START",
      {{"mode", std::string(planner::to_string(config_.mode))},
       {"title", spec_.title},
       {"activity_ticks", config_.activity_ticks},
       {"events", spec_.key_events.size()}});
  for (const auto& c : world_.characters) log(c.id, "SPAWN", {{"position", tile_json(c.position)}});
  refresh_glow();
  for (auto& c : world_.characters)
    if (c.id != pc_id_) {
      log(c.id, "IDLE", {{"reason", "start"}});
      begin_dwell(c);
    }
}

Runtime::~Runtime() = default;

void Runtime::log(std::string actor, std::string kind, Json payload) {
  log_.push_back({log_.size(), world_.tick, std::move(actor), std::move(kind), std::move(payload)});
}

std::optional<int> Runtime::pending_event() const {
  if (static_cast<std::size_t>(world_.completed_events) >= spec_.key_events.size()) return std::nullopt;
  return world_.completed_events;
}

planner::Storyline Runtime::storyline() const {
  planner::Storyline s;
  s.past = past_;
  for (const auto& c : world_.characters)
    if (!planner::is_idle(c.activity)) s.ongoing[c.id] = c.activity;
  s.next_key_event = pending_event();
  return s;
}

void Runtime::enqueue(ViewerCommand cmd) { inbox_.push_back(std::move(cmd)); }

void Runtime::step() {
  if (ended()) {
    while (!inbox_.empty()) {
      log("viewer", "IGNORED", {{"command", to_json(inbox_.front())}, {"reason", "session ended"}});
      inbox_.pop_front();
    }
    return;
  }
  bool moved = false;
  const Tile before = world_.find(pc_id_)->position;
  while (!inbox_.empty() && inbox_.front().at_tick <= world_.tick) {
    if (inbox_.front().kind == ViewerCommand::Kind::move && moved) break;
    const ViewerCommand cmd = inbox_.front();
    inbox_.pop_front();
    moved = moved || cmd.kind == ViewerCommand::Kind::move;
    apply(cmd);
  }
  advance_pc();
  for (auto& c : world_.characters)
    if (c.id != pc_id_) advance_npc(c);
  advance_bottleneck();

  const CharacterState& pc = *world_.find(pc_id_);
  const bool acting = !planner::is_idle(pc.activity) && !pc.paused;
  if (pc.position != before || acting) world_.pc_idle_ticks = 0;
  else ++world_.pc_idle_ticks;
  maybe_inner_voice();
  if (!ended()) ++world_.tick;
}

void Runtime::apply(const ViewerCommand& cmd) {
  switch (cmd.kind) {
    case ViewerCommand::Kind::move: apply_move(cmd.direction); break;
    case ViewerCommand::Kind::interact: apply_interact(cmd.object_id); break;
    case ViewerCommand::Kind::chat: apply_chat(cmd.npc_id, cmd.text); break;
    case ViewerCommand::Kind::wait: break;
  }
}

void Runtime::apply_move(Direction d) {
  CharacterState& pc = *world_.find(pc_id_);
  const Tile to = offset(pc.position, d);
  if (!spec_.environment.walkable_mask.walkable(to)) {
    log(pc_id_, "BLOCKED", {{"from", tile_json(pc.position)}, {"direction", std::string(to_string(d))}});
    return;
  }
  pc.position = to;
  log(pc_id_, "MOVE", {{"to", tile_json(to)}});
}

bool Runtime::in_zone(const CharacterState& c) const {
  const auto* o = spec_.environment.find_object(c.activity.object_id);
  return o && o->zone.contains(c.position);
}

void Runtime::apply_interact(const std::string& object_id) {
  CharacterState& pc = *world_.find(pc_id_);
  const ObjectInstance* obj = spec_.environment.find_object(object_id);
  if (!obj) {
    log(pc_id_, "UNKNOWN_OBJECT", {{"object_id", object_id}});
    return;
  }
  if (!obj->zone.contains(pc.position)) {
    log(pc_id_, "NOT_IN_ZONE", {{"object_id", object_id}, {"position", tile_json(pc.position)}});
    return;
  }
  if (!planner::is_idle(pc.activity)) {
    if (pc.activity.object_id == object_id) return;  // already at it
    log(pc_id_, "ACTIVITY_ABANDONED",
        {{"action", pc.activity.action}, {"object_id", pc.activity.object_id}, {"remaining", pc.remaining}});
    pc.activity = planner::idle_activity(pc_id_);
    pc.paused = false;
  }
  const auto pending = pending_event();
  if (pending && world_.glow.count(object_id) && !world_.done_in_pending.count(pc_id_)) {
    const auto* mine = spec_.key_events[static_cast<std::size_t>(*pending)].activity_for(pc_id_);
    if (mine && mine->object_id == object_id) {
      start_activity(pc, *mine, Origin::authored, *pending);
      return;
    }
  }
  start_activity(pc, {pc_id_, obj->actions.front(), object_id}, Origin::viewer, -1);
}

void Runtime::apply_chat(const std::string& npc_id, const std::string& text) {
  const Character* npc = spec_.find_character(npc_id);
  if (!npc || npc->role != Role::npc) {
    log(pc_id_, "UNKNOWN_CHARACTER", {{"npc_id", npc_id}});
    return;
  }
  std::vector<Snippet> history;
  for (const auto& l : world_.chat_log)
    if (l.npc_id == npc_id) history.push_back({spec_.find_character(l.speaker)->name, l.text});
  const std::string speaker = spec_.find_character(pc_id_)->name;
  planner::Planner::ChatReply reply;
  {
    std::lock_guard lock(planner_mutex_);
    reply = planner_.chat(*npc, speaker, text, storyline(), spec_, history);
  }
  if (reply.withheld && reply.withheld_side == "viewer") {
    world_.chat_log.push_back({world_.tick, npc_id, pc_id_, std::string(llm::kRefusalLine)});
    log(pc_id_, "CHAT_WITHHELD", {{"to", npc_id}, {"side", "viewer"}, {"text", std::string(llm::kRefusalLine)}});
    return;
  }
  world_.chat_log.push_back({world_.tick, npc_id, pc_id_, text});
  log(pc_id_, "CHAT", {{"to", npc_id}, {"text", text}});
  world_.chat_log.push_back({world_.tick, npc_id, npc_id, reply.text});
  Json payload = {{"to", pc_id_}, {"text", reply.text}, {"guided", reply.guided}};
  if (!reply.intent.empty()) payload["intent"] = reply.intent;
  if (reply.withheld) payload["withheld"] = true;
  log(npc_id, "CHAT", std::move(payload));
}

void Runtime::start_activity(CharacterState& c, const ActivityTuple& a, Origin origin, int key_event) {
  c.activity = a;
  c.origin = origin;
  c.key_event = key_event;
  c.holding = false;
  c.paused = false;
  c.path.clear();
  Json payload = {{"action", a.action}, {"object_id", a.object_id}, {"origin", std::string(planner::to_string(origin))}};
  if (key_event >= 0) payload["key_event"] = key_event;
  log(c.id, "ACTIVITY_START", std::move(payload));

  if (c.id == pc_id_) {
    c.arrived = true;
    c.remaining = config_.activity_ticks;
    return;
  }
  const auto* obj = spec_.environment.find_object(a.object_id);
  if (obj->zone.contains(c.position)) {
    c.arrived = true;
    begin_dwell(c);
    return;
  }
  auto path = env::find_path(spec_.environment.walkable_mask, c.position, obj->zone.tiles);
  if (!path) {
    log(c.id, "PATH_FAILED", {{"object_id", a.object_id}});
    c.activity = planner::idle_activity(c.id);
    c.origin = Origin::fallback;
    c.key_event = -1;
    log(c.id, "IDLE", {{"reason", "no path"}});
    begin_dwell(c);
    return;
  }
  c.path.assign(path->begin() + 1, path->end());
  c.arrived = false;
}

void Runtime::begin_dwell(CharacterState& c) {
  c.arrived = true;
  c.remaining = config_.activity_ticks;
  if (!plans_.count(c.id)) issue_plan(c);
}

void Runtime::issue_plan(CharacterState& c) {
  const Character& npc = *spec_.find_character(c.id);
  const int tick = world_.tick;
  planner::Storyline story = storyline();
  // an authored part ends only when its event completes, so look one event ahead
  if (c.origin == Origin::authored && story.next_key_event && c.key_event == *story.next_key_event) {
    const int next = *story.next_key_event + 1;
    story.next_key_event = next < static_cast<int>(spec_.key_events.size()) ? std::optional<int>(next) : std::nullopt;
  }
  const std::optional<int> for_event = story.next_key_event;
  const ActivityTuple current = c.activity;
  log(c.id, "PLAN_ISSUED", {{"next_key_event", story.next_key_event ? Json(*story.next_key_event) : Json(nullptr)}});
  if (config_.async_planning) {
    plans_[c.id] = {std::async(std::launch::async,
                               [this, &npc, story = std::move(story), current, tick] {
                                 std::lock_guard lock(planner_mutex_);
                                 return planner_.plan_pair(npc, story, spec_, tick, current);
                               })
                        .share(),
                    tick, for_event};
  } else {
    std::lock_guard lock(planner_mutex_);
    plans_[c.id] = {ready_future(planner_.plan_pair(npc, story, spec_, tick, current)), tick, for_event};
  }
}

std::optional<int> Runtime::ready_at(const PendingPlan& p) const {
  if (p.result.wait_for(std::chrono::seconds(0)) != std::future_status::ready) return std::nullopt;
  const double ticks = p.result.get().request_latency_ms / config_.ms_per_tick;
  return p.issued_at + static_cast<int>(std::ceil(ticks - 1e-9));
}

void Runtime::finish_activity(CharacterState& c) {
  if (!planner::is_idle(c.activity)) {
    Json payload = {{"action", c.activity.action}, {"object_id", c.activity.object_id},
                    {"origin", std::string(planner::to_string(c.origin))}};
    if (c.key_event >= 0) payload["key_event"] = c.key_event;
    log(c.id, "ACTIVITY_END", std::move(payload));
    past_.push_back({c.activity, c.origin, c.key_event});
  }
  c.activity = planner::idle_activity(c.id);
  c.origin = Origin::fallback;
  c.key_event = -1;
  c.holding = false;
  c.remaining = 0;
}

void Runtime::advance_pc() {
  CharacterState& pc = *world_.find(pc_id_);
  if (planner::is_idle(pc.activity)) return;
  if (!in_zone(pc)) {
    if (!pc.paused) {
      pc.paused = true;
      log(pc_id_, "ACTIVITY_PAUSED", {{"action", pc.activity.action}, {"remaining", pc.remaining}});
    }
    return;
  }
  if (pc.paused) {
    pc.paused = false;
    log(pc_id_, "ACTIVITY_RESUMED", {{"action", pc.activity.action}, {"remaining", pc.remaining}});
  }
  if (--pc.remaining > 0) return;
  const bool part = pc.origin == Origin::authored && pending_event() && pc.key_event == *pending_event();
  finish_activity(pc);
  if (part) {
    world_.done_in_pending.insert(pc_id_);
    log(pc_id_, "PART_DONE", {{"key_event", *pending_event()}});
  }
}

void Runtime::advance_npc(CharacterState& c) {
  if (c.holding) return;
  if (!c.arrived) {
    c.position = c.path.front();
    c.path.erase(c.path.begin());
    if (c.path.empty()) {
      log(c.id, "ARRIVED", {{"object_id", c.activity.object_id}, {"position", tile_json(c.position)}});
      begin_dwell(c);
    }
    return;
  }
  if (--c.remaining > 0) return;
  on_boundary(c);
}

void Runtime::on_boundary(CharacterState& c) {
  const auto pending = pending_event();
  if (c.origin == Origin::authored && pending && c.key_event == *pending) {
    world_.done_in_pending.insert(c.id);
    c.holding = true;
    log(c.id, "PART_DONE", {{"key_event", *pending}});
    return;  // the bottleneck check releases holders
  }
  finish_activity(c);

  auto it = plans_.find(c.id);
  if (it == plans_.end()) {
    issue_plan(c);
    it = plans_.find(c.id);
  }
  planner::PlanPair pair;
  int ready = 0;
  bool stale = false;
  if (auto r = ready_at(it->second); r && world_.tick >= *r) {
    pair = it->second.result.get();
    ready = *r;
    plans_.erase(it);
    stale_plans_.erase(c.id);
  } else if (auto s = stale_plans_.find(c.id); s != stale_plans_.end() && ready_at(s->second) && world_.tick >= *ready_at(s->second)) {
    pair = s->second.result.get();
    ready = *ready_at(s->second);
    stale = true;
    stale_plans_.erase(s);
  } else {
    Json payload = {{"reason", "LATENCY_OVERRUN"}, {"issued_at", it->second.issued_at}};
    if (r) payload["ready_at"] = *r;
    log(c.id, "PLAN_FALLBACK", std::move(payload));
    log(c.id, "IDLE", {{"reason", "plan not ready"}});
    begin_dwell(c);  // outstanding request stays; it is used at the next boundary
    return;
  }
  if (pair.fallback) {
    log(c.id, "PLAN_FALLBACK", {{"reason", pair.flag}, {"issued_at", pair.planned_at}});
    log(c.id, "IDLE", {{"reason", "plan unusable"}});
    begin_dwell(c);
    return;
  }
  const bool followed = pc_followed();
  ActivityTuple next = planner::resolve(pair, followed);
  Origin origin = followed ? Origin::plan_a : Origin::plan_b;
  int key_event = -1;
  if (pending)
    if (const auto* mine = spec_.key_events[static_cast<std::size_t>(*pending)].activity_for(c.id);
        mine && !world_.done_in_pending.count(c.id)) {
      if (followed) next = *mine;  // stale pairs may predate the current event
      if (next == *mine) {
        origin = Origin::authored;
        key_event = *pending;
      }
    }
  Json resolved = {{"followed", followed}, {"choice", followed ? "A" : "B"}, {"issued_at", pair.planned_at}, {"ready_at", ready}};
  if (stale) resolved["stale"] = true;
  log(c.id, "PLAN_RESOLVED", std::move(resolved));
  start_activity(c, next, origin, key_event);
}

bool Runtime::pc_followed() const {
  const auto pending = pending_event();
  if (!pending) return true;
  const KeyEvent& ev = spec_.key_events[static_cast<std::size_t>(*pending)];
  if (!ev.activity_for(pc_id_) || world_.done_in_pending.count(pc_id_)) return true;
  const CharacterState& pc = *world_.find(pc_id_);
  planner::PcObservation obs;
  if (!planner::is_idle(pc.activity)) obs.activity = pc.activity;
  obs.idle_ticks = world_.pc_idle_ticks;
  obs.glow_active = !world_.glow.empty();
  return !planner::detect_divergence(obs, ev, pc_id_, config_.idle_threshold);
}

void Runtime::advance_bottleneck() {
  const auto pending = pending_event();
  if (!pending) return;
  const KeyEvent& ev = spec_.key_events[static_cast<std::size_t>(*pending)];
  for (const auto& a : ev.activities)
    if (!world_.done_in_pending.count(a.character_id)) return;

  log("system", "EVENT_COMPLETE", {{"key_event", *pending}});
  ++world_.completed_events;
  world_.done_in_pending.clear();
  refresh_glow();
  std::vector<CharacterState*> holders;
  for (auto& c : world_.characters)
    if (c.holding) holders.push_back(&c);
  if (pending_event())
    for (auto& c : world_.characters) {
      auto it = plans_.find(c.id);
      if (c.holding || it == plans_.end() || it->second.for_event == pending_event()) continue;
      stale_plans_[c.id] = it->second;
      plans_.erase(it);
      issue_plan(c);
    }
  if (!pending_event()) {
    for (auto* c : holders) finish_activity(*c);
    world_.status = WorldState::Status::ended;
    log("system", "SESSION_END", {{"completed_events", world_.completed_events}});
    return;
  }
  for (auto* c : holders) {
    c->holding = false;
    c->remaining = 0;
    on_boundary(*c);  // key_event now lags the pending one, so this finishes and replans
  }
}

void Runtime::maybe_inner_voice() {
  if (ended()) return;
  const auto pending = pending_event();
  if (!pending || world_.done_in_pending.count(pc_id_)) return;
  const KeyEvent& ev = spec_.key_events[static_cast<std::size_t>(*pending)];
  const auto* mine = ev.activity_for(pc_id_);
  if (!mine) return;
  if (last_inner_voice_ && world_.tick - *last_inner_voice_ < config_.inner_voice_cooldown) return;
  const CharacterState& pc = *world_.find(pc_id_);
  planner::PcObservation obs;
  if (!planner::is_idle(pc.activity)) obs.activity = pc.activity;
  obs.idle_ticks = world_.pc_idle_ticks;
  obs.glow_active = !world_.glow.empty();
  if (!planner::detect_divergence(obs, ev, pc_id_, config_.idle_threshold)) return;
  std::string text;
  {
    std::lock_guard lock(planner_mutex_);
    text = planner_.inner_voice(*mine, spec_);
  }
  last_inner_voice_ = world_.tick;
  world_.inner_voice_log.emplace_back(world_.tick, text);
  log(pc_id_, "INNER_VOICE", {{"text", text}, {"next_action", mine->action}});
}

void Runtime::refresh_glow() {
  world_.glow.clear();
  if (auto p = pending_event())
    for (const auto& a : spec_.key_events[static_cast<std::size_t>(*p)].activities)
      if (!a.object_id.empty()) world_.glow.insert(a.object_id);
  log("system", "GLOW", {{"objects", world_.glow}});
}

ActivityTable export_activity_table(const std::vector<LogRecord>& log, const VignetteSpec& spec, bool flag_generated) {
  ActivityTable t;
  for (const auto& c : spec.characters) t.columns.push_back(c.id);
  const int n = static_cast<int>(spec.key_events.size());
  std::vector<ActivityRow> divergent(static_cast<std::size_t>(n)), events(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    events[static_cast<std::size_t>(k)] = {"E" + std::to_string(k + 1), false, k, {}};
    divergent[static_cast<std::size_t>(k)] = {"before E" + std::to_string(k + 1), true, k, {}};
  }
  int completed = 0;
  std::set<std::string> done;
  for (const auto& r : log) {
    if (r.kind == "EVENT_COMPLETE") {
      ++completed;
      done.clear();
    }
    if (r.kind == "PART_DONE") done.insert(r.actor);
    if (r.kind != "ACTIVITY_START" || completed >= n) continue;
    const std::string origin = r.payload.value("origin", "");
    ActivityCell cell{r.payload.value("action", ""), r.payload.value("object_id", ""),
                      flag_generated && (origin == "plan_A" || origin == "plan_B")};
    const auto k = static_cast<std::size_t>(completed);
    const bool authored = origin == "authored";
    ActivityRow* row = nullptr;
    if (done.count(r.actor)) {
      // finished its part early; what it does next counts against the following event
      const bool next_assigned = k + 1 < events.size() && spec.key_events[k + 1].activity_for(r.actor);
      row = next_assigned ? &divergent[k + 1] : &events[k];
    } else {
      const bool assigned = spec.key_events[k].activity_for(r.actor) != nullptr;
      row = (authored || !assigned) ? &events[k] : &divergent[k];
    }
    auto& cells = row->cells;
    cells[r.actor].push_back(std::move(cell));
  }
  for (int k = 0; k < n; ++k) {
    if (!divergent[static_cast<std::size_t>(k)].cells.empty()) t.rows.push_back(std::move(divergent[static_cast<std::size_t>(k)]));
    t.rows.push_back(std::move(events[static_cast<std::size_t>(k)]));
  }
  return t;
}

Json to_json(const ActivityTable& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    Json cells = Json::object();
    for (const auto& [id, list] : r.cells) {
      Json arr = Json::array();
      for (const auto& c : list) arr.push_back({{"action", c.action}, {"object_id", c.object_id}, {"generated", c.generated}});
      cells[id] = arr;
    }
    rows.push_back({{"label", r.label}, {"divergent", r.divergent}, {"key_event", r.key_event}, {"cells", cells}});
  }
  return {{"columns", t.columns}, {"rows", rows}};
}

std::string to_csv(const ActivityTable& t, const VignetteSpec& spec) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
  };
  std::string out = "row";
  for (const auto& id : t.columns) {
    const auto* c = spec.find_character(id);
    out += "," + quote(c ? c->name : id);
  }
  out += "\n";
  for (const auto& r : t.rows) {
    out += quote(r.label);
    for (const auto& id : t.columns) {
      std::string cell;
      if (auto it = r.cells.find(id); it != r.cells.end())
        for (const auto& c : it->second) {
          if (!cell.empty()) cell += " | ";
          const auto* o = spec.environment.find_object(c.object_id);
          cell += c.action + " @ " + (o ? o->name : c.object_id) + (c.generated ? " [generated]" : "");
        }
      out += "," + quote(cell);
    }
    out += "\n";
  }
  return out;
}

}  // namespace vignette::runtime
