#include "vignette/env/geometry.hpp"

#include <algorithm>
#include <deque>

namespace vignette::env {

namespace {

constexpr Tile kSteps[4] = {{0, -1}, {1, 0}, {0, 1}, {-1, 0}};

Rect partial_default(Size fp, Facing facing) {
  switch (facing) {
    case Facing::south: {
      int rows = (fp.h + 1) / 2;
      return {0, fp.h - rows, fp.w, rows};
    }
    case Facing::north: return {0, 0, fp.w, (fp.h + 1) / 2};
    case Facing::east: {
      int cols = (fp.w + 1) / 2;
      return {fp.w - cols, 0, cols, fp.h};
    }
    case Facing::west: return {0, 0, (fp.w + 1) / 2, fp.h};
  }
  return {0, 0, fp.w, fp.h};
}

}  // namespace

std::vector<Tile> compute_trigger_tiles(Tile pos, Size fp, ZoneType type, Facing facing, const WalkableMask& mask,
                                        const std::optional<Rect>& partial_rect) {
  std::vector<Tile> raw;
  const Rect body{pos.x, pos.y, fp.w, fp.h};
  switch (type) {
    case ZoneType::on:
      raw = body.tiles();
      break;
    case ZoneType::partial: {
      Rect rel = partial_rect.value_or(partial_default(fp, facing));
      Rect abs{pos.x + rel.x, pos.y + rel.y, rel.w, rel.h};
      for (Tile t : abs.tiles())
        if (body.contains(t)) raw.push_back(t);
      break;
    }
    case ZoneType::around:
      for (Tile t : Rect{pos.x - 1, pos.y - 1, fp.w + 2, fp.h + 2}.tiles())
        if (!body.contains(t)) raw.push_back(t);
      break;
    case ZoneType::directional:
      switch (facing) {
        case Facing::north: raw = Rect{pos.x, pos.y - 1, fp.w, 1}.tiles(); break;
        case Facing::south: raw = Rect{pos.x, pos.y + fp.h, fp.w, 1}.tiles(); break;
        case Facing::west: raw = Rect{pos.x - 1, pos.y, 1, fp.h}.tiles(); break;
        case Facing::east: raw = Rect{pos.x + fp.w, pos.y, 1, fp.h}.tiles(); break;
      }
      break;
  }
  const bool inside = type == ZoneType::on || type == ZoneType::partial;
  std::vector<Tile> out;
  for (Tile t : raw) {
    if (!mask.in_bounds(t)) continue;
    if (!inside && !mask.walkable(t)) continue;
    out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw ZoneUnreachableError("ZONE_UNREACHABLE: no usable trigger tile");
  return out;
}

std::optional<std::vector<Tile>> find_path(const WalkableMask& mask, Tile from, const std::vector<Tile>& targets) {
  if (!mask.walkable(from) || targets.empty()) return std::nullopt;
  const int w = mask.width();
  const int h = mask.height();
  auto idx = [w](Tile t) { return static_cast<std::size_t>(t.y * w + t.x); };
  std::vector<char> goal(static_cast<std::size_t>(w * h), 0);
  for (Tile t : targets)
    if (mask.in_bounds(t)) goal[idx(t)] = 1;
  std::vector<int> parent(static_cast<std::size_t>(w * h), -2);
  std::deque<Tile> queue{from};
  parent[idx(from)] = -1;
  while (!queue.empty()) {
    Tile cur = queue.front();
    queue.pop_front();
    if (goal[idx(cur)]) {
      std::vector<Tile> path;
      for (int i = static_cast<int>(idx(cur)); i != -1; i = parent[static_cast<std::size_t>(i)]) path.push_back({i % w, i / w});
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (Tile step : kSteps) {
      Tile next{cur.x + step.x, cur.y + step.y};
      if (!mask.walkable(next) || parent[idx(next)] != -2) continue;
      parent[idx(next)] = static_cast<int>(idx(cur));
      queue.push_back(next);
    }
  }
  return std::nullopt;
}

WalkableMask reachable_from(const WalkableMask& mask, Tile from) {
  WalkableMask seen(mask.width(), mask.height());
  if (!mask.walkable(from)) return seen;
  std::deque<Tile> queue{from};
  seen.set(from, true);
  while (!queue.empty()) {
    Tile cur = queue.front();
    queue.pop_front();
    for (Tile step : kSteps) {
      Tile next{cur.x + step.x, cur.y + step.y};
      if (!mask.walkable(next) || seen.walkable(next)) continue;
      seen.set(next, true);
      queue.push_back(next);
    }
  }
  return seen;
}

int rect_distance(const Rect& a, const Rect& b) {
  int dx = std::max({0, a.x - (b.x + b.w - 1), b.x - (a.x + a.w - 1)});
  int dy = std::max({0, a.y - (b.y + b.h - 1), b.y - (a.y + a.h - 1)});
  return std::max(dx, dy);
}

}  // namespace vignette::env
