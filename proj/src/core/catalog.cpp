#include "vignette/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "builtin_data.hpp"

namespace vignette {

namespace {

std::vector<std::string> string_list(const nlohmann::json& j, const char* key) {
  std::vector<std::string> out;
  if (auto it = j.find(key); it != j.end()) {
    if (!it->is_array()) throw std::invalid_argument(std::string("catalog field '") + key + "' must be an array");
    for (const auto& v : *it) out.push_back(v.get<std::string>());
  }
  return out;
}

Size size_of(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument(where + ": expected [w, h]");
  Size s{j[0].get<int>(), j[1].get<int>()};
  if (s.w < 1 || s.h < 1) throw std::invalid_argument(where + ": footprint must be positive");
  return s;
}

Rect rect_of(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) throw std::invalid_argument(where + ": expected [x, y, w, h]");
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

}  // namespace

std::string normalize_name(std::string_view name) {
  std::string s;
  for (char c : name) {
    unsigned char u = static_cast<unsigned char>(c);
    if (c == '_' || c == '-') s.push_back(' ');
    else s.push_back(static_cast<char>(std::tolower(u)));
  }
  // collapse whitespace runs, trim, then drop one leading article
  std::string out;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
      continue;
    }
    out.push_back(c);
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  for (std::string_view article : {"the ", "a ", "an ", "my ", "his ", "her ", "their "}) {
    if (out.rfind(article, 0) == 0) {
      out.erase(0, article.size());
      break;
    }
  }
  return out;
}

bool label_matches(std::string_view room_label, std::string_view keyword) {
  const std::string label = " " + normalize_name(room_label) + " ";
  const std::string key = normalize_name(keyword);
  if (key.empty()) return false;
  // whole-word match, tolerant of trailing digits such as "bedroom 2"
  return label.find(" " + key + " ") != std::string::npos;
}

AssetCatalog AssetCatalog::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("assets") || !doc["assets"].is_array())
    throw std::invalid_argument("asset catalog: missing 'assets' array");
  std::vector<AssetSpec> assets;
  for (const auto& a : doc["assets"]) {
    AssetSpec s;
    s.id = a.at("id").get<std::string>();
    const std::string where = "asset '" + s.id + "'";
    s.display_name = a.value("display_name", s.id);
    s.aliases = string_list(a, "aliases");
    s.footprint = size_of(a.at("footprint"), where);
    auto zone = parse_zone_type(a.value("zone_type", std::string("around")));
    if (!zone) throw std::invalid_argument(where + ": unknown zone_type");
    s.zone_type = *zone;
    s.needs_facing = a.value("needs_facing", false);
    s.actions = string_list(a, "actions");
    if (s.actions.empty()) throw std::invalid_argument(where + ": actions must be non-empty");
    s.wall_adjacent = a.value("wall_adjacent", false);
    if (auto it = a.find("near"); it != a.end())
      for (const auto& n : *it) s.near.push_back({n.at("anchor").get<std::string>(), n.value("max_distance", 1)});
    s.necessary_in = string_list(a, "necessary_in");
    s.decorative_in = string_list(a, "decorative_in");
    if (auto it = a.find("partial_rect"); it != a.end()) s.partial_rect = rect_of(*it, where);
    assets.push_back(std::move(s));
  }
  return AssetCatalog(std::move(assets));
}

const AssetCatalog& AssetCatalog::builtin() {
  static const AssetCatalog catalog = from_json(nlohmann::json::parse(detail::kBuiltinAssetCatalog));
  return catalog;
}

const AssetSpec* AssetCatalog::find(std::string_view id) const {
  auto it = std::find_if(assets_.begin(), assets_.end(), [&](const AssetSpec& a) { return a.id == id; });
  return it == assets_.end() ? nullptr : &*it;
}

const AssetSpec* AssetCatalog::match_name(std::string_view name) const {
  const std::string key = normalize_name(name);
  if (key.empty()) return nullptr;
  for (const auto& a : assets_)
    if (normalize_name(a.id) == key || normalize_name(a.display_name) == key) return &a;
  for (const auto& a : assets_)
    for (const auto& alias : a.aliases)
      if (normalize_name(alias) == key) return &a;
  return nullptr;
}

std::vector<const AssetSpec*> AssetCatalog::necessary_for(std::string_view room_label) const {
  std::vector<const AssetSpec*> out;
  for (const auto& a : assets_)
    if (std::any_of(a.necessary_in.begin(), a.necessary_in.end(), [&](const std::string& k) { return label_matches(room_label, k); }))
      out.push_back(&a);
  return out;
}

std::vector<const AssetSpec*> AssetCatalog::decorative_for(std::string_view room_label) const {
  std::vector<const AssetSpec*> out;
  for (const auto& a : assets_)
    if (std::any_of(a.decorative_in.begin(), a.decorative_in.end(), [&](const std::string& k) { return label_matches(room_label, k); }))
      out.push_back(&a);
  return out;
}

Environment LayoutTemplate::instantiate() const {
  Environment env;
  env.layout_id = id;
  env.grid_width = grid_width;
  env.grid_height = grid_height;
  for (const auto& r : rooms) env.rooms.push_back({r.id, r.default_label, r.rect});
  env.doors = doors;
  refresh_walkable_mask(env);
  return env;
}

LayoutCatalog LayoutCatalog::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("layouts") || !doc["layouts"].is_array())
    throw std::invalid_argument("layout catalog: missing 'layouts' array");
  std::vector<LayoutTemplate> layouts;
  for (const auto& l : doc["layouts"]) {
    LayoutTemplate t;
    t.id = l.at("id").get<std::string>();
    const std::string where = "layout '" + t.id + "'";
    t.tags = string_list(l, "tags");
    Size grid = size_of(l.at("grid"), where);
    t.grid_width = grid.w;
    t.grid_height = grid.h;
    for (const auto& r : l.at("rooms"))
      t.rooms.push_back({r.at("id").get<std::string>(), rect_of(r.at("rect"), where), r.value("default_label", std::string())});
    for (const auto& d : l.value("doors", nlohmann::json::array())) t.doors.push_back({d.at(0).get<int>(), d.at(1).get<int>()});
    if (t.rooms.empty()) throw std::invalid_argument(where + ": no rooms");
    layouts.push_back(std::move(t));
  }
  return LayoutCatalog(std::move(layouts));
}

const LayoutCatalog& LayoutCatalog::builtin() {
  static const LayoutCatalog catalog = from_json(nlohmann::json::parse(detail::kBuiltinLayouts));
  return catalog;
}

const LayoutTemplate* LayoutCatalog::find(std::string_view id) const {
  auto it = std::find_if(layouts_.begin(), layouts_.end(), [&](const LayoutTemplate& l) { return l.id == id; });
  return it == layouts_.end() ? nullptr : &*it;
}

const LayoutTemplate* LayoutCatalog::find_by_tag(std::string_view tag) const {
  const std::string key = normalize_name(tag);
  for (const auto& l : layouts_)
    for (const auto& t : l.tags)
      if (normalize_name(t) == key) return &l;
  return nullptr;
}

std::vector<std::string> LayoutCatalog::tags() const {
  std::vector<std::string> out;
  for (const auto& l : layouts_)
    for (const auto& t : l.tags)
      if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  return out;
}

}  // namespace vignette
