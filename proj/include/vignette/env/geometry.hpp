#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "vignette/spec.hpp"

namespace vignette::env {

/// The zone has no tile a character could stand on.
class ZoneUnreachableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Trigger tiles for an object, sorted.
///  on          footprint tiles
///  partial     `partial_rect` (relative to the footprint) or the half of the footprint on the facing side
///  around      the 1-tile ring around the footprint, corners included
///  directional the 1-tile row adjacent to the facing side
/// Tiles outside `mask` bounds are dropped; around/directional tiles must also be walkable in `mask`.
/// Throws ZoneUnreachableError when nothing is left.
std::vector<Tile> compute_trigger_tiles(Tile position, Size footprint, ZoneType type, Facing facing,
                                        const WalkableMask& mask, const std::optional<Rect>& partial_rect = std::nullopt);

/// Shortest 4-connected path from `from` to any tile of `targets`, both ends included.
/// Neighbour order is north, east, south, west, which fixes ties.
std::optional<std::vector<Tile>> find_path(const WalkableMask& mask, Tile from, const std::vector<Tile>& targets);

/// Every tile reachable from `from` (including it when walkable).
WalkableMask reachable_from(const WalkableMask& mask, Tile from);

/// Chebyshev distance between the closest tiles of two rectangles (touching rectangles are 1 apart).
int rect_distance(const Rect& a, const Rect& b);

}  // namespace vignette::env
