#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vignette/llm/gateway.hpp"
#include "vignette/spec.hpp"
#include "vignette/util.hpp"

namespace vignette::planner {

enum class Mode { CD, PO, SO, BL };

std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view s);  // case-insensitive

/// Where an activity came from.
enum class Origin { authored, viewer, plan_a, plan_b, fallback };
std::string_view to_string(Origin o);

struct PastActivity {
  ActivityTuple activity;
  Origin origin = Origin::authored;
  int key_event = -1;  // index when authored, else -1
};

struct Storyline {
  std::vector<PastActivity> past;                 // append-only
  std::map<std::string, ActivityTuple> ongoing;   // character_id -> current activity
  std::optional<int> next_key_event;              // nullopt once every key event completed

  /// Plain-text rendering used in prompts.
  std::string describe(const VignetteSpec& spec) const;
};

struct PlanPair {
  std::string npc_id;
  ActivityTuple plan_A;
  ActivityTuple plan_B;
  int planned_at = 0;
  double request_latency_ms = 0.0;
  std::optional<int> for_key_event;  // next key event when the pair was requested
  bool fallback = false;             // provider failure or unusable answer: both plans idle
  std::string flag;                  // reason when fallback
};

/// Idle placeholder: empty action and object at the NPC's position.
ActivityTuple idle_activity(const std::string& character_id);
bool is_idle(const ActivityTuple& a);

/// plan_A when the viewer followed the key event, plan_B otherwise. Pure.
const ActivityTuple& resolve(const PlanPair& plan, bool pc_followed_key_event);

/// What the runtime knows about the PC at this tick.
struct PcObservation {
  std::optional<ActivityTuple> activity;  // started or ongoing activity, if any
  int idle_ticks = 0;                     // consecutive ticks without moving or acting
  bool glow_active = false;
};

/// True iff the PC is doing something other than its next key-event activity,
/// or has idled at least `idle_threshold` ticks while objects glow.
bool detect_divergence(const PcObservation& pc, const KeyEvent& next_key_event, const std::string& pc_id, int idle_threshold);

struct PlannerConfig {
  Mode mode = Mode::CD;
  std::uint64_t seed = 1;
};

/// Issues PLAN_ACTIVITY / BL_ACTIVITY / INNER_VOICE / DIVERGENCE_INTENT / GUIDE_REPLY / CHAR_CHAT requests.
class Planner {
 public:
  Planner(const llm::Gateway& gateway, PlannerConfig config);

  Mode mode() const { return config_.mode; }

  /// Objects an NPC may plan for: every object with at least one action and a trigger zone.
  static std::vector<const ObjectInstance*> candidates(const Environment& env);

  PlanPair plan_pair(const Character& npc, const Storyline& storyline, const VignetteSpec& spec, int tick,
                     const ActivityTuple& current);

  /// First-person nudge toward the PC's next key activity. Falls back to a template on provider failure.
  std::string inner_voice(const ActivityTuple& pc_next, const VignetteSpec& spec);

  struct ChatReply {
    std::string text;
    std::string intent;        // follow | small_talk | derail, empty when no key event is pending
    bool guided = false;       // GUIDE_REPLY was used
    bool withheld = false;     // moderation replaced a line
    std::string withheld_side; // "viewer" or "npc"
  };
  /// Classifies the message against the next key event; derailing messages get a guiding reply.
  ChatReply chat(const Character& npc, const std::string& speaker, const std::string& message, const Storyline& storyline,
                 const VignetteSpec& spec, const std::vector<Snippet>& history);

 private:
  PlanPair plan_bl(const Character& npc, const VignetteSpec& spec, const std::optional<ActivityTuple>& authored, int tick,
                   std::optional<int> event);
  ActivityTuple bl_pick(const Character& npc, const std::vector<const ObjectInstance*>& objects, double& latency);

  const llm::Gateway& gateway_;
  PlannerConfig config_;
  Rng rng_;
};

/// Phrase describing an event from the PC's point of view ("having dinner").
std::string next_event_phrase(const KeyEvent& ev, const VignetteSpec& spec);

}  // namespace vignette::planner
