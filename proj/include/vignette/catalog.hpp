#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vignette/spec.hpp"

namespace vignette {

struct NearRule {
  std::string anchor;  // asset id
  int max_distance = 1;
};

struct AssetSpec {
  std::string id;
  std::string display_name;
  std::vector<std::string> aliases;
  Size footprint;
  ZoneType zone_type = ZoneType::around;
  bool needs_facing = false;
  std::vector<std::string> actions;
  bool wall_adjacent = false;
  std::vector<NearRule> near;
  std::vector<std::string> necessary_in;   // room label keywords
  std::vector<std::string> decorative_in;  // room label keywords
  std::optional<Rect> partial_rect;        // relative to footprint origin, for partial zones
};

/// Asset catalog: asset_id -> display name, footprint, zone defaults and room tags.
class AssetCatalog {
 public:
  AssetCatalog() = default;
  explicit AssetCatalog(std::vector<AssetSpec> assets) : assets_(std::move(assets)) {}

  static AssetCatalog from_json(const nlohmann::json& doc);  // throws std::invalid_argument
  static const AssetCatalog& builtin();

  const std::vector<AssetSpec>& assets() const { return assets_; }
  const AssetSpec* find(std::string_view id) const;
  /// Resolves a free-text object name through ids, display names and aliases.
  const AssetSpec* match_name(std::string_view name) const;
  std::vector<const AssetSpec*> necessary_for(std::string_view room_label) const;
  std::vector<const AssetSpec*> decorative_for(std::string_view room_label) const;

 private:
  std::vector<AssetSpec> assets_;
};

struct LayoutRoom {
  std::string id;
  Rect rect;
  std::string default_label;
};

struct LayoutTemplate {
  std::string id;
  std::vector<std::string> tags;
  int grid_width = 0;
  int grid_height = 0;
  std::vector<LayoutRoom> rooms;
  std::vector<Tile> doors;

  /// Empty environment carrying this layout's rooms, labelled with the defaults.
  Environment instantiate() const;
};

class LayoutCatalog {
 public:
  LayoutCatalog() = default;
  explicit LayoutCatalog(std::vector<LayoutTemplate> layouts) : layouts_(std::move(layouts)) {}

  static LayoutCatalog from_json(const nlohmann::json& doc);  // throws std::invalid_argument
  static const LayoutCatalog& builtin();

  const std::vector<LayoutTemplate>& layouts() const { return layouts_; }
  const LayoutTemplate* find(std::string_view id) const;
  const LayoutTemplate* find_by_tag(std::string_view tag) const;
  std::vector<std::string> tags() const;

 private:
  std::vector<LayoutTemplate> layouts_;
};

/// Lowercase, trims, drops leading articles and maps '_' / '-' to spaces.
std::string normalize_name(std::string_view name);

/// True when the normalized room label contains the keyword as a whole-word phrase.
bool label_matches(std::string_view room_label, std::string_view keyword);

}  // namespace vignette
