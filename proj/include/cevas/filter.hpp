#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cevas/region.hpp"
#include "cevas/scene.hpp"

namespace cevas {

/// Camera-side filtering thresholds. t_new is a pixel count per block;
/// t_dis is a normalized distance (fraction of the frame side), matching
/// the normalized coordinate convention used throughout.
struct FilterThresholds {
  double t_new = 0.0;
  double t_dis = 0.1;

  /// t_new defaults to a quarter of the pixels in a full block.
  static FilterThresholds defaults(const BlockGrid& grid) {
    FilterThresholds th;
    th.t_new = 0.25 * grid.block_size * grid.block_size;
    return th;
  }
};

struct FilterOptions {
  double flow_epsilon = 1e-6;  // pixels; flow below this counts as zero
  double compression = 1.0;    // linear payload scale (codec proxy)
};

/// Outcome of filtering one frame. Every previous box lands in exactly
/// one of reused_results, offload_boxes, or the dropped count.
struct FilterOutput {
  std::vector<int> offload_blocks;   // ascending, unique
  std::vector<BBox> reused_results;  // shifted boxes kept without re-detection
  std::vector<BBox> offload_boxes;   // shifted boxes whose blocks were offloaded
  int dropped_boxes = 0;             // shifted out of frame entirely
  std::uint64_t filtered_payload_bytes = 0;
  std::uint64_t filter_compute_cost = 0;  // blocks examined + boxes processed
};

/// Number of pixels in block k whose flow magnitude exceeds the
/// zero-flow epsilon.
int count_active_flow(const FlowField& flow, int k, const BlockGrid& grid,
                      double epsilon = 1e-6);

/// Mean flow over the box's pixel footprint, converted to normalized
/// units. Zero when the footprint is empty or carries no flow.
MotionOffset mean_flow_over_box(const BBox& p, const FlowField& flow,
                                int frame_width, int frame_height);

/// Input filtering policy:
///   (a) blocks in the incoming/leaving regions with more than t_new
///       moving pixels are offloaded (new-object discovery);
///   (b) each previous box is shifted by its mean flow; it is offloaded
///       when it moved more than t_dis or touches the overlapping
///       region, and reused otherwise;
///   (c) payload bytes are proportional to the offloaded pixel count.
FilterOutput filter_frame(const Frame& frame, const FlowField& flow,
                          std::span<const BBox> prev_results,
                          const RegionMap& map, const FilterThresholds& th,
                          const FilterOptions& opts = {});

/// Payload bytes for a set of offloaded blocks (3 bytes per pixel,
/// scaled by the compression factor).
std::uint64_t payload_bytes(const std::vector<int>& blocks,
                            const BlockGrid& grid, const FilterOptions& opts);

/// Bytes of a full frame under the same payload model, so data size
/// ratios are invariant to the compression factor.
std::uint64_t full_frame_bytes(const BlockGrid& grid, const FilterOptions& opts);

/// The filtered frame: the offloaded blocks' pixels plus their index
/// manifest. Round-trips losslessly for those blocks.
struct FilteredFrame {
  int camera_id = 0;
  std::int64_t tick = 0;
  BlockGrid grid;
  std::vector<int> blocks;              // ascending, unique
  std::vector<std::uint8_t> pixels;     // concatenated block RGB, row-major
  std::uint64_t payload_bytes = 0;      // modeled offloaded size
};

FilteredFrame assemble_filtered(const Frame& frame, const FilterOutput& out,
                                const BlockGrid& grid);

/// Copies the filtered blocks back over `base` (typically a background
/// image); the inverse of assemble_filtered for offloaded content.
void paste_filtered(const FilteredFrame& filtered, Image& base);

/// Binary serialization, little-endian. Layout:
///   "CVFF" | u32 version | i32 camera_id | i64 tick |
///   i32 frame_w | i32 frame_h | i32 block_size | u32 n_blocks |
///   u32 block index * n | per block: RGB bytes of its clipped rect
std::vector<std::uint8_t> serialize_filtered(const FilteredFrame& f);
FilteredFrame parse_filtered(std::span<const std::uint8_t> bytes);

/// Fraction of the box's area covered by the given offloaded blocks.
double offload_coverage(const BBox& p, const std::vector<int>& blocks,
                        const BlockGrid& grid);

}  // namespace cevas
