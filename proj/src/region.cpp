#include "cevas/region.hpp"

#include <stdexcept>
#include <string>

namespace cevas {

const char* to_string(RegionLabel label) {
  switch (label) {
    case RegionLabel::Background: return "background";
    case RegionLabel::Incoming: return "incoming";
    case RegionLabel::Leaving: return "leaving";
    case RegionLabel::Overlapping: return "overlapping";
  }
  return "unknown";
}

RegionLabel RegionMap::at(int k) const {
  if (k < 0 || static_cast<std::size_t>(k) >= labels.size())
    throw std::out_of_range("block index " + std::to_string(k) +
                            " outside region map of size " +
                            std::to_string(labels.size()));
  return labels[static_cast<std::size_t>(k)];
}

std::array<int, 4> RegionMap::histogram() const {
  std::array<int, 4> h{0, 0, 0, 0};
  for (const RegionLabel l : labels) ++h[static_cast<std::size_t>(l)];
  return h;
}

RegionMap partition(const CameraModel& camera, const Polygon& world_overlap,
                    const std::vector<LaneStrip>& lane_spec,
                    const BlockGrid& grid) {
  if (std::abs(camera.world_to_image.linear().determinant()) < 1e-12)
    throw ConfigError("camera " + std::to_string(camera.id),
                      "degenerate view transform");
  RegionMap map;
  map.grid = grid;
  map.labels.resize(static_cast<std::size_t>(grid.block_count()),
                    RegionLabel::Background);
  for (int k = 0; k < grid.block_count(); ++k) {
    const auto rect = grid.block_rect(k);
    const Eigen::Vector2d center_norm(
        0.5 * (rect.x0 + rect.x1) / grid.frame_width,
        0.5 * (rect.y0 + rect.y1) / grid.frame_height);
    const Eigen::Vector2d world = camera.to_world(center_norm);
    RegionLabel label = RegionLabel::Background;
    if (world_overlap.contains(world)) {
      label = RegionLabel::Overlapping;
    } else {
      for (const auto& strip : lane_spec) {
        if (!strip.applies_to(camera.id) || !strip.contains(world)) continue;
        if (strip.kind == LaneKind::Incoming) {
          label = RegionLabel::Incoming;
          break;  // incoming wins over leaving
        }
        label = RegionLabel::Leaving;
      }
    }
    map.labels[static_cast<std::size_t>(k)] = label;
  }
  return map;
}

RegionLabel region_of_block(const RegionMap& map, int k) { return map.at(k); }

bool bbox_intersects_region(const BBox& p, const RegionMap& map,
                            RegionLabel label) {
  for (const int k : bbox_blocks(p, map.grid))
    if (map.labels[static_cast<std::size_t>(k)] == label) return true;
  return false;
}

}  // namespace cevas
