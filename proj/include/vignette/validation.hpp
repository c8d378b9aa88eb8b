#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "vignette/spec.hpp"

namespace vignette {

// One code per type invariant. Codes are stable wire identifiers.
enum class ViolationCode {
  // VignetteSpec
  NO_PLAYER_CHARACTER,
  MULTIPLE_PLAYER_CHARACTERS,
  CHAR_CAP_EXCEEDED,
  UNKNOWN_CHARACTER_REF,
  UNKNOWN_OBJECT_REF,
  EVENT_INDEX_INVALID,
  TOO_MANY_EVENTS,
  TOO_MANY_OBJECTS,
  UNSUPPORTED_VERSION,
  DUPLICATE_ID,
  // Environment
  GRID_INVALID,
  ROOM_OUT_OF_GRID,
  ROOM_OVERLAP,
  OVERLAP,
  OBJECT_OUTSIDE_ROOM,
  UNKNOWN_ROOM_REF,
  WALKABLE_MASK_MISMATCH,
  // Room
  ROOM_TOO_SMALL,
  ROOM_LABEL_EMPTY,
  // ObjectInstance
  OBJECT_NO_ACTIONS,
  EVENT_OBJECT_UNUSED,
  // TriggerZone
  ZONE_EMPTY,
  ZONE_OUT_OF_GRID,
  ZONE_NOT_ON_FOOTPRINT,
  ZONE_INTERSECTS_FOOTPRINT,
  // Character
  CHARACTER_NAME_EMPTY,
  // ActivityTuple
  ACTION_EMPTY,
  NEEDS_OBJECT,
  // KeyEvent
  EVENT_EMPTY,
  DUPLICATE_CHARACTER_IN_EVENT,
  // Runnable-only checks (environment validation / runtime preconditions)
  NO_KEY_EVENTS,
  EVENT_OBJECT_MISSING,
  UNREACHABLE,
  NO_SPAWN,
};

std::string_view to_string(ViolationCode code);
std::vector<ViolationCode> all_violation_codes();

struct Violation {
  ViolationCode code;
  std::string path;  // JSON-pointer-like location, e.g. "/key_events/1/activities/0/object_id"
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationCode code) const;
  std::size_t count(ViolationCode code) const;
  void add(ViolationCode code, std::string path, std::string message);
  void merge(const ValidationReport& other);
  std::string summary() const;
};

/// Soft limits; the defaults are configuration, not format rules.
struct ValidationLimits {
  std::size_t max_events = 12;
  std::size_t max_objects = 64;
};

ValidationReport validate_spec(const VignetteSpec& spec, const ValidationLimits& limits = {});

}  // namespace vignette
