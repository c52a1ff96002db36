#pragma once

#include <array>
#include <vector>

#include "cevas/geometry.hpp"
#include "cevas/scene.hpp"

namespace cevas {

enum class RegionLabel : std::uint8_t {
  Background = 0,
  Incoming = 1,
  Leaving = 2,
  Overlapping = 3,
};

const char* to_string(RegionLabel label);

/// Static per-camera partition of the block grid. Immutable once built;
/// safe to share across threads.
struct RegionMap {
  BlockGrid grid;
  std::vector<RegionLabel> labels;  // one per block, row-major

  RegionLabel at(int k) const;  // throws std::out_of_range on bad index
  std::array<int, 4> histogram() const;
};

/// Labels every block by where its center pixel's world-plane preimage
/// falls: overlap polygon, then incoming strips, then leaving strips,
/// else background. Block centers (not majority area) keep this O(1)
/// per block and deterministic.
RegionMap partition(const CameraModel& camera, const Polygon& world_overlap,
                    const std::vector<LaneStrip>& lane_spec,
                    const BlockGrid& grid);

RegionLabel region_of_block(const RegionMap& map, int k);

/// True when any block of bbox_blocks(p) carries `label`.
bool bbox_intersects_region(const BBox& p, const RegionMap& map,
                            RegionLabel label);

}  // namespace cevas
