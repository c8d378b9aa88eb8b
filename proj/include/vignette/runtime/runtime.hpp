#pragma once

#include <deque>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vignette/llm/gateway.hpp"
#include "vignette/planner/planner.hpp"
#include "vignette/spec.hpp"
#include "vignette/validation.hpp"

namespace vignette::runtime {

using Json = nlohmann::json;

struct RuntimeConfig {
  int activity_ticks = 80;          // D: dwell per activity
  int idle_threshold = 30;          // G: PC idle ticks under glow that count as diverging
  int inner_voice_cooldown = 120;   // C: minimum ticks between inner-voice cues
  double ms_per_tick = 100.0;       // converts provider latency into ticks
  planner::Mode mode = planner::Mode::CD;
  std::uint64_t seed = 1;
  bool async_planning = false;      // true: plans run on worker threads and late ones are skipped
};

/// Spec does not pass the runnable checks.
class InitError : public std::runtime_error {
 public:
  explicit InitError(ValidationReport report)
      : std::runtime_error("spec is not runnable: " + report.summary()), report_(std::move(report)) {}
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

enum class Direction { N, E, S, W };
std::optional<Direction> parse_direction(std::string_view s);
std::string_view to_string(Direction d);

struct ViewerCommand {
  enum class Kind { move, interact, chat, wait };
  int at_tick = 0;
  Kind kind = Kind::wait;
  Direction direction = Direction::N;
  std::string object_id;
  std::string npc_id;
  std::string text;
  int n = 0;

  static ViewerCommand move(int tick, Direction d);
  static ViewerCommand interact(int tick, std::string object_id);
  static ViewerCommand chat(int tick, std::string npc_id, std::string text);
  static ViewerCommand wait(int tick, int n);
};

Json to_json(const ViewerCommand& c);
ViewerCommand command_from_json(const Json& j);  // throws std::invalid_argument

/// One append-only log entry. `seq` numbers records from 0.
struct LogRecord {
  std::size_t seq = 0;
  int tick = 0;
  std::string actor;
  std::string kind;
  Json payload = Json::object();
};

Json to_json(const LogRecord& r);
LogRecord record_from_json(const Json& j);
/// Newline-delimited JSON, one record per line, keys sorted.
std::string to_ndjson(const std::vector<LogRecord>& log);
std::vector<LogRecord> parse_ndjson(const std::string& text);

struct CharacterState {
  std::string id;
  Tile position;
  ActivityTuple activity;                  // idle when action and object are empty
  planner::Origin origin = planner::Origin::fallback;
  int key_event = -1;                      // authored activities: the event they belong to
  int remaining = 0;                       // dwell ticks left
  bool arrived = true;                     // standing in the activity's trigger zone
  bool paused = false;                     // PC left the zone mid-activity
  bool holding = false;                    // finished its key-event part, waiting for the others
  std::vector<Tile> path;                  // NPC route still to walk, next tile first
};

struct ChatLine {
  int tick = 0;
  std::string npc_id;
  std::string speaker;  // character id
  std::string text;
};

struct WorldState {
  enum class Status { running, ended };
  int tick = 0;
  std::vector<CharacterState> characters;  // spec order, PC included
  std::set<std::string> glow;
  std::vector<ChatLine> chat_log;
  std::vector<std::pair<int, std::string>> inner_voice_log;
  int completed_events = 0;
  std::set<std::string> done_in_pending;   // characters whose part of the pending event is done
  Status status = Status::running;
  int pc_idle_ticks = 0;

  const CharacterState* find(std::string_view id) const;
  CharacterState* find(std::string_view id);
};

std::string_view to_string(WorldState::Status s);
Json to_json(const WorldState& w);

/// Authoritative branch-and-bottleneck simulation. Single writer; not thread-safe by itself.
class Runtime {
 public:
  /// Validates the spec and places the PC at spawn and NPCs at per-room anchors. Throws InitError.
  Runtime(VignetteSpec spec, const llm::Gateway& gateway, RuntimeConfig config = {});
  ~Runtime();
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  const VignetteSpec& spec() const { return spec_; }
  const RuntimeConfig& config() const { return config_; }
  const WorldState& world() const { return world_; }
  const std::vector<LogRecord>& log() const { return log_; }
  planner::Storyline storyline() const;
  bool ended() const { return world_.status == WorldState::Status::ended; }
  /// Pending key event index, nullopt once all completed.
  std::optional<int> pending_event() const;

  /// Queues a command. Commands run in arrival order once their tick is reached, one move per tick.
  void enqueue(ViewerCommand cmd);
  std::size_t queued() const { return inbox_.size(); }
  /// Runs one tick.
  void step();

 private:
  struct PendingPlan {
    std::shared_future<planner::PlanPair> result;
    int issued_at = 0;
    std::optional<int> for_event;
  };

  void log(std::string actor, std::string kind, Json payload = Json::object());
  void apply(const ViewerCommand& cmd);
  void apply_move(Direction d);
  void apply_interact(const std::string& object_id);
  void apply_chat(const std::string& npc_id, const std::string& text);
  void advance_pc();
  void advance_npc(CharacterState& c);
  void start_activity(CharacterState& c, const ActivityTuple& a, planner::Origin origin, int key_event);
  void finish_activity(CharacterState& c);
  void on_boundary(CharacterState& c);
  void begin_dwell(CharacterState& c);
  void issue_plan(CharacterState& c);
  /// Tick at which the plan counts as delivered, or nullopt while it is still being computed.
  std::optional<int> ready_at(const PendingPlan& p) const;
  bool pc_followed() const;
  void advance_bottleneck();
  void maybe_inner_voice();
  void refresh_glow();
  bool in_zone(const CharacterState& c) const;

  VignetteSpec spec_;
  const llm::Gateway& gateway_;
  RuntimeConfig config_;
  planner::Planner planner_;
  std::mutex planner_mutex_;
  WorldState world_;
  std::vector<LogRecord> log_;
  std::deque<ViewerCommand> inbox_;
  std::map<std::string, PendingPlan> plans_;
  std::map<std::string, PendingPlan> stale_plans_;  // superseded by an event completion, kept as a backup
  std::vector<planner::PastActivity> past_;
  std::optional<int> last_inner_voice_;
  std::string pc_id_;
};

/// Table of who did what around each key event. Divergent rows hold activities of characters who
/// were assigned to the pending event but did something else first.
struct ActivityCell {
  std::string action;
  std::string object_id;
  bool generated = false;  // chosen by the planner rather than authored or by the viewer
  bool operator==(const ActivityCell&) const = default;
};

struct ActivityRow {
  std::string label;  // "E1" or "before E1"
  bool divergent = false;
  int key_event = 0;
  std::map<std::string, std::vector<ActivityCell>> cells;  // character_id -> cells
};

struct ActivityTable {
  std::vector<std::string> columns;  // character ids in spec order
  std::vector<ActivityRow> rows;
};

ActivityTable export_activity_table(const std::vector<LogRecord>& log, const VignetteSpec& spec, bool flag_generated = true);
Json to_json(const ActivityTable& t);
/// One line per row; cells "action @ object", generated ones suffixed with " [generated]", joined by " | ".
std::string to_csv(const ActivityTable& t, const VignetteSpec& spec);

}  // namespace vignette::runtime
