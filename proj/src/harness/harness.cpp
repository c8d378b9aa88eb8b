#include "vignette/harness/harness.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "vignette/catalog.hpp"
#include "vignette/env/geometry.hpp"
#include "vignette/env/placement.hpp"
#include "vignette/extract/extractor.hpp"
#include "vignette/util.hpp"

namespace vignette::harness {

using runtime::Direction;
using runtime::ViewerCommand;

namespace {

std::optional<Direction> direction_to(Tile from, Tile to) {
  if (to.x == from.x && to.y == from.y - 1) return Direction::N;
  if (to.x == from.x + 1 && to.y == from.y) return Direction::E;
  if (to.x == from.x && to.y == from.y + 1) return Direction::S;
  if (to.x == from.x - 1 && to.y == from.y) return Direction::W;
  return std::nullopt;
}

// One step toward the object's zone, or an interact when already inside it.
std::optional<ViewerCommand> approach(const runtime::Runtime& rt, const std::string& object_id) {
  const auto* obj = rt.spec().environment.find_object(object_id);
  const auto* pc = rt.world().find(rt.spec().player()->id);
  if (!obj || !pc) return std::nullopt;
  const int tick = rt.world().tick;
  if (obj->zone.contains(pc->position)) return ViewerCommand::interact(tick, object_id);
  auto path = env::find_path(rt.spec().environment.walkable_mask, pc->position, obj->zone.tiles);
  if (!path || path->size() < 2) return std::nullopt;
  return ViewerCommand::move(tick, *direction_to((*path)[0], (*path)[1]));
}

const std::vector<std::string>& chat_lines() {
  static const std::vector<std::string> lines = {"Hi!", "How much spice should I add?", "I want to skip dinner.",
                                                 "Can I skip this?", "What are you doing?", "Let's do something else."};
  return lines;
}

}  // namespace

Json to_json(const ViewerTrace& t) {
  Json cmds = Json::array();
  for (const auto& c : t.commands) cmds.push_back(runtime::to_json(c));
  return {{"seed", t.seed}, {"description", t.description}, {"autopilot", t.autopilot}, {"commands", cmds}};
}

ViewerTrace trace_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("trace must be a JSON object");
  ViewerTrace t;
  t.seed = j.value("seed", std::uint64_t{0});
  t.description = j.value("description", "");
  t.autopilot = j.value("autopilot", true);
  int last = -1;
  const Json cmds = j.value("commands", Json::array());
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    auto c = runtime::command_from_json(cmds[i]);
    if (c.at_tick <= last)
      throw std::invalid_argument("commands[" + std::to_string(i) + "]: at_tick must be strictly increasing");
    last = c.at_tick;
    t.commands.push_back(std::move(c));
  }
  return t;
}

ViewerTrace load_trace(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("cannot read trace " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return trace_from_json(Json::parse(ss.str()));
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(file.string() + ": " + e.what());
  }
}

std::optional<ViewerCommand> autopilot_command(const runtime::Runtime& rt) {
  const auto pending = rt.pending_event();
  const Character* pc = rt.spec().player();
  if (!pending || !pc || rt.world().done_in_pending.count(pc->id)) return std::nullopt;
  const auto* mine = rt.spec().key_events[static_cast<std::size_t>(*pending)].activity_for(pc->id);
  if (!mine) return std::nullopt;
  const auto* state = rt.world().find(pc->id);
  const auto* obj = rt.spec().environment.find_object(mine->object_id);
  const bool doing = state->origin == planner::Origin::authored && state->activity == *mine;
  if (doing && obj->zone.contains(state->position)) return std::nullopt;
  if (doing) {
    auto path = env::find_path(rt.spec().environment.walkable_mask, state->position, obj->zone.tiles);
    if (!path || path->size() < 2) return std::nullopt;
    return ViewerCommand::move(rt.world().tick, *direction_to((*path)[0], (*path)[1]));
  }
  return approach(rt, mine->object_id);
}

std::vector<std::string> check_bottleneck_safety(const std::vector<runtime::LogRecord>& log, const VignetteSpec& spec) {
  std::vector<std::string> problems;
  int completed = 0;
  bool ended = false;
  int last_tick = 0;
  std::map<std::string, Json> last_start;
  std::set<std::string> started;  // characters whose authored part of the pending event has begun
  for (const auto& r : log) {
    const std::string where = "record " + std::to_string(r.seq) + " (tick " + std::to_string(r.tick) + ")";
    if (r.tick < last_tick) problems.push_back(where + ": tick went backwards");
    last_tick = r.tick;
    if (r.kind == "EVENT_COMPLETE") {
      const int k = r.payload.at("key_event").get<int>();
      if (k != completed) problems.push_back(where + ": event " + std::to_string(k) + " completed while " + std::to_string(completed) + " was pending");
      // every participant's latest activity must be its authored part, so nothing divergent straddles the completion
      if (static_cast<std::size_t>(k) < spec.key_events.size())
        for (const auto& a : spec.key_events[static_cast<std::size_t>(k)].activities) {
          if (!started.count(a.character_id))
            problems.push_back(where + ": " + a.character_id + " never started its part of event " + std::to_string(k));
          auto it = last_start.find(a.character_id);
          const bool npc = !spec.player() || a.character_id != spec.player()->id;
          if (npc && (it == last_start.end() || it->second.value("origin", "") != "authored" || it->second.value("key_event", -1) != k))
            problems.push_back(where + ": " + a.character_id + " was not holding its part when event " + std::to_string(k) + " completed");
        }
      ++completed;
      started.clear();
    } else if (r.kind == "ACTIVITY_START") {
      last_start[r.actor] = r.payload;
      if (ended) problems.push_back(where + ": activity started after the end");
      if (r.payload.value("origin", "") == "authored") {
        const int k = r.payload.at("key_event").get<int>();
        if (k == completed) started.insert(r.actor);
        if (k != completed) problems.push_back(where + ": authored activity of event " + std::to_string(k) + " started while " + std::to_string(completed) + " was pending");
        const auto* a = static_cast<std::size_t>(k) < spec.key_events.size() ? spec.key_events[static_cast<std::size_t>(k)].activity_for(r.actor) : nullptr;
        if (!a || a->action != r.payload.value("action", "") || a->object_id != r.payload.value("object_id", ""))
          problems.push_back(where + ": authored activity does not match the spec");
      }
    } else if (r.kind == "SESSION_END") {
      ended = true;
    }
  }
  if (ended && completed != static_cast<int>(spec.key_events.size()))
    problems.push_back("session ended after " + std::to_string(completed) + " of " + std::to_string(spec.key_events.size()) + " events");
  return problems;
}

RunResult run_trace(const VignetteSpec& spec, const ViewerTrace& trace, const llm::Gateway& gateway, const RunOptions& options) {
  runtime::Runtime rt(spec, gateway, options.config);
  std::size_t next = 0;
  while (!rt.ended() && rt.world().tick < options.max_ticks) {
    const int tick = rt.world().tick;
    while (next < trace.commands.size() && trace.commands[next].at_tick <= tick) rt.enqueue(trace.commands[next++]);
    if (next >= trace.commands.size() && trace.autopilot && rt.queued() == 0)
      if (auto c = autopilot_command(rt)) rt.enqueue(*c);
    rt.step();
    if (options.pace_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(options.pace_ms));
  }
  RunResult out;
  out.log = rt.log();
  out.ended = rt.ended();
  out.final_tick = rt.world().tick;
  out.problems = check_bottleneck_safety(out.log, spec);
  if (!out.ended) out.problems.push_back("did not end within " + std::to_string(options.max_ticks) + " ticks");
  out.table = runtime::export_activity_table(out.log, spec);
  return out;
}

ViewerTrace random_trace(const VignetteSpec& spec, const llm::Gateway& gateway, std::uint64_t seed, const RunOptions& options,
                         int max_commands) {
  ViewerTrace trace;
  trace.seed = seed;
  trace.description = "random viewer, seed " + std::to_string(seed);
  trace.autopilot = true;
  Rng rng(seed);
  runtime::Runtime rt(spec, gateway, options.config);
  const auto objects = planner::Planner::candidates(spec.environment);
  std::vector<std::string> npcs;
  for (const auto& c : spec.characters)
    if (c.role == Role::npc) npcs.push_back(c.id);

  enum class Goal { none, follow, object } goal = Goal::none;
  std::string target;
  int wait_until = 0;
  while (!rt.ended() && rt.world().tick < options.max_ticks && static_cast<int>(trace.commands.size()) < max_commands) {
    const int tick = rt.world().tick;
    std::optional<ViewerCommand> cmd;
    if (tick >= wait_until) {
      if (goal == Goal::none) {
        const double r = rng.uniform01();
        if (r < 0.35) {
          goal = Goal::follow;
        } else if (r < 0.8 && !objects.empty()) {
          goal = Goal::object;
          target = objects[rng.uniform_index(objects.size())]->id;
        } else if (r < 0.9 && !npcs.empty()) {
          cmd = ViewerCommand::chat(tick, npcs[rng.uniform_index(npcs.size())], chat_lines()[rng.uniform_index(chat_lines().size())]);
        } else {
          const int n = 1 + static_cast<int>(rng.uniform_index(60));
          cmd = ViewerCommand::wait(tick, n);
          wait_until = tick + n;
        }
      }
      if (!cmd && goal == Goal::follow) {
        cmd = autopilot_command(rt);
        if (!cmd) {
          goal = Goal::none;
          wait_until = tick + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(options.config.activity_ticks)));
        }
      } else if (!cmd && goal == Goal::object) {
        cmd = approach(rt, target);
        if (!cmd || cmd->kind == ViewerCommand::Kind::interact) {
          goal = Goal::none;
          wait_until = tick + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(options.config.activity_ticks)));
        }
      }
    }
    if (cmd) {
      trace.commands.push_back(*cmd);
      rt.enqueue(*cmd);
    }
    rt.step();
  }
  return trace;
}

std::vector<ScriptStep> script_from_json(const Json& j) {
  static const std::set<std::string> ops = {"goto", "interact", "chat", "wait", "await_idle", "await_event"};
  const Json& arr = j.is_object() ? j.at("steps") : j;
  if (!arr.is_array()) throw std::invalid_argument("script must be an array of steps");
  std::vector<ScriptStep> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "steps[" + std::to_string(i) + "]";
    const Json& s = arr[i];
    if (!s.is_object() || !s.contains("op")) throw std::invalid_argument(where + ": expected an object with op");
    ScriptStep step;
    step.op = s["op"].get<std::string>();
    if (!ops.count(step.op)) throw std::invalid_argument(where + ": unknown op " + step.op);
    step.object_id = s.value("object_id", "");
    step.npc_id = s.value("npc_id", "");
    step.text = s.value("text", "");
    step.n = s.value("n", 0);
    if ((step.op == "goto" || step.op == "interact") && step.object_id.empty()) throw std::invalid_argument(where + ": needs object_id");
    if (step.op == "chat" && step.npc_id.empty()) throw std::invalid_argument(where + ": needs npc_id");
    out.push_back(std::move(step));
  }
  return out;
}

ViewerTrace record_script(const VignetteSpec& spec, const llm::Gateway& gateway, const std::vector<ScriptStep>& steps,
                          const RunOptions& options) {
  ViewerTrace trace;
  trace.description = "scripted viewer";
  runtime::Runtime rt(spec, gateway, options.config);
  auto live = [&] { return !rt.ended() && rt.world().tick < options.max_ticks; };
  auto issue = [&](ViewerCommand c) {
    trace.commands.push_back(c);
    rt.enqueue(std::move(c));
    rt.step();
  };
  const std::string pc = spec.player()->id;
  for (const auto& s : steps) {
    if (!live()) break;
    if (s.op == "goto") {
      while (live()) {
        auto c = approach(rt, s.object_id);
        if (!c) throw std::invalid_argument("no path to " + s.object_id);
        if (c->kind == ViewerCommand::Kind::interact) break;
        issue(*c);
      }
    } else if (s.op == "interact") {
      issue(ViewerCommand::interact(rt.world().tick, s.object_id));
    } else if (s.op == "chat") {
      issue(ViewerCommand::chat(rt.world().tick, s.npc_id, s.text));
    } else if (s.op == "wait") {
      for (int i = 0; i < s.n && live(); ++i) rt.step();
    } else if (s.op == "await_idle") {
      while (live() && !planner::is_idle(rt.world().find(pc)->activity)) rt.step();
    } else if (s.op == "await_event") {
      while (live() && rt.world().completed_events <= s.n) rt.step();
    }
  }
  return trace;
}

VignetteSpec generate_spec(std::uint64_t seed) {
  const AssetCatalog& catalog = AssetCatalog::builtin();
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(seed * 7919 + attempt);
    const auto& layouts = LayoutCatalog::builtin().layouts();
    const LayoutTemplate& layout = layouts[rng.uniform_index(layouts.size())];
    VignetteSpec spec;
    spec.title = "Generated vignette " + std::to_string(seed);
    spec.story_text = "A generated story.";
    Environment env = layout.instantiate();
    refresh_walkable_mask(env);

    std::vector<env::RequiredObject> required = env::room_necessities(env, catalog);
    for (const auto& room : env.rooms) {
      auto extras = catalog.decorative_for(room.label);
      for (std::size_t i = 0; i < extras.size() && i < 2; ++i)
        if (rng.uniform01() < 0.5) required.push_back({extras[rng.uniform_index(extras.size())]->display_name, room.id, ObjectKind::necessary_room});
    }
    env::ObjectResolver resolver(catalog);
    spec.environment = env::place_objects(env, required, resolver).environment;
    const auto objects = planner::Planner::candidates(spec.environment);
    if (objects.empty()) continue;

    const int n_chars = 1 + static_cast<int>(rng.uniform_index(3));
    static const std::vector<std::string> names = {"Ana", "Ben", "Cleo", "Dev"};
    for (int i = 0; i < n_chars; ++i) {
      Character c;
      c.role = i == 0 ? Role::pc : Role::npc;
      c.name = i == 0 ? "Me" : names[static_cast<std::size_t>(i)];
      c.id = i == 0 ? "me" : slugify(c.name);
      c.sprite_id = i == 0 ? "pc_default" : "npc_" + std::to_string(i);
      if (i > 0 && rng.uniform01() < 0.5) c.personality = "easygoing";
      spec.characters.push_back(std::move(c));
    }
    const int n_events = 1 + static_cast<int>(rng.uniform_index(4));
    for (int k = 0; k < n_events; ++k) {
      KeyEvent ev;
      ev.index = k;
      for (const auto& c : spec.characters) {
        if (!ev.activities.empty() && rng.uniform01() < 0.4) continue;
        const ObjectInstance* o = objects[rng.uniform_index(objects.size())];
        ev.activities.push_back({c.id, o->actions[rng.uniform_index(o->actions.size())], o->id});
      }
      spec.key_events.push_back(std::move(ev));
    }
    extract::sync_object_kinds(spec);
    ValidationReport r = validate_spec(spec);
    r.merge(env::validate_environment(spec));
    if (r.ok()) return spec;
  }
}

}  // namespace vignette::harness
