#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vignette/catalog.hpp"
#include "vignette/llm/gateway.hpp"
#include "vignette/spec.hpp"
#include "vignette/validation.hpp"

namespace vignette::env {

struct Affordance {
  std::vector<std::string> actions;
  ZoneType zone_type = ZoneType::around;
  bool needs_facing = false;
};

/// Everything placement needs to know about one object name.
struct ObjectTraits {
  std::string name;
  std::string asset_id;  // "generic" when the catalog has no match
  Size footprint;
  Affordance affordance;
  bool wall_adjacent = false;
  std::vector<NearRule> near;
  std::optional<Rect> partial_rect;
  bool from_catalog = false;
};

/// Name -> traits. Catalog first, then the AFFORDANCE / PLACE_REASONING templates when a
/// gateway is attached, then the generic {inspect} / around / 1x1 default. Cached per name.
class ObjectResolver {
 public:
  explicit ObjectResolver(const AssetCatalog& catalog = AssetCatalog::builtin(), const llm::Gateway* gateway = nullptr)
      : catalog_(catalog), gateway_(gateway) {}

  Affordance assign_affordances(std::string_view object_name);
  ObjectTraits resolve(std::string_view object_name, std::string_view room_label = {});
  const AssetCatalog& catalog() const { return catalog_; }

 private:
  const AssetCatalog& catalog_;
  const llm::Gateway* gateway_;
  std::mutex mutex_;
  std::map<std::string, Affordance> affordances_;
  std::map<std::string, ObjectTraits> traits_;
};

struct RequiredObject {
  std::string name;
  std::string room_hint;  // room id or label keyword; empty lets any room take it
  ObjectKind kind = ObjectKind::necessary_event;
};

struct Unplaceable {
  std::string name;
  std::string room_hint;
  std::vector<std::string> reasons;
};

struct PlacementResult {
  Environment environment;                   // input environment plus everything placed
  std::vector<std::string> placed_ids;       // in placement order
  std::vector<Unplaceable> unplaceable;
  bool ok() const { return unplaceable.empty(); }
};

/// Greedy placement: necessary_event before necessary_room, then larger footprint first, then name.
/// Each object takes the best-scoring feasible cell of its room, scanning rows top to bottom.
PlacementResult place_objects(const Environment& base, std::vector<RequiredObject> required, ObjectResolver& resolver);

/// Every room's catalog-necessary objects (bed per bedroom, stove per kitchen, ...).
std::vector<RequiredObject> room_necessities(const Environment& env, const AssetCatalog& catalog);

/// Adds decorative catalog items per room label until `density` of the room's free area is used.
PlacementResult fill_decorative(const Environment& base, ObjectResolver& resolver, double density);

/// Overlap-freeness, event objects present, spawn exists, every trigger zone reachable from spawn.
ValidationReport validate_environment(const Environment& env);
ValidationReport validate_environment(const VignetteSpec& spec);

/// Recomputes every object's trigger tiles against the current mask and refreshes the mask.
/// Objects whose zone comes out empty keep an empty tile list.
void rebuild_zones(Environment& env, const AssetCatalog& catalog = AssetCatalog::builtin());

}  // namespace vignette::env
