#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vignette/llm/gateway.hpp"
#include "vignette/runtime/runtime.hpp"
#include "vignette/spec.hpp"

namespace vignette::harness {

using Json = nlohmann::json;

/// Recorded viewer input. Ticks strictly increase. With `autopilot`, a glow-following
/// viewer takes over once the commands run out.
struct ViewerTrace {
  std::uint64_t seed = 0;
  std::string description;
  bool autopilot = true;
  std::vector<runtime::ViewerCommand> commands;
};

Json to_json(const ViewerTrace& t);
ViewerTrace trace_from_json(const Json& j);  // throws std::invalid_argument
ViewerTrace load_trace(const std::filesystem::path& file);

/// Next command a glow-following viewer would issue at the current tick, if any.
std::optional<runtime::ViewerCommand> autopilot_command(const runtime::Runtime& rt);

struct RunOptions {
  runtime::RuntimeConfig config;
  int max_ticks = 20000;
  int pace_ms = 0;  // wall-clock sleep per tick; gives async planners time to finish
};

struct RunResult {
  std::vector<runtime::LogRecord> log;
  runtime::ActivityTable table;
  bool ended = false;
  int final_tick = 0;
  std::vector<std::string> problems;  // bottleneck-safety findings; empty when safe
  bool ok() const { return ended && problems.empty(); }
};

RunResult run_trace(const VignetteSpec& spec, const ViewerTrace& trace, const llm::Gateway& gateway, const RunOptions& options = {});

/// Checks the log against the spec: key events complete once each and in order, authored
/// activities only start while their event is pending, nothing starts after the end.
std::vector<std::string> check_bottleneck_safety(const std::vector<runtime::LogRecord>& log, const VignetteSpec& spec);

/// Records a trace from a viewer that wanders to random objects, chats, idles, and sometimes follows the glow.
ViewerTrace random_trace(const VignetteSpec& spec, const llm::Gateway& gateway, std::uint64_t seed, const RunOptions& options = {},
                         int max_commands = 400);

/// High-level viewer step used to record traces: goto, interact, chat, wait, await_idle, await_event.
struct ScriptStep {
  std::string op;
  std::string object_id;
  std::string npc_id;
  std::string text;
  int n = 0;  // wait: ticks; await_event: event index
};

std::vector<ScriptStep> script_from_json(const Json& j);  // throws std::invalid_argument
/// Plays the steps against a live runtime and records the low-level commands they produce.
ViewerTrace record_script(const VignetteSpec& spec, const llm::Gateway& gateway, const std::vector<ScriptStep>& steps,
                          const RunOptions& options = {});

/// Random runnable spec on a built-in layout: 1-3 characters, 1-4 key events.
VignetteSpec generate_spec(std::uint64_t seed);

}  // namespace vignette::harness
