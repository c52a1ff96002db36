#include "cevas/filter.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <stdexcept>

namespace cevas {

int count_active_flow(const FlowField& flow, int k, const BlockGrid& grid,
                      double epsilon) {
  const auto rect = grid.block_rect(k);
  const float eps2 = static_cast<float>(epsilon * epsilon);
  int n = 0;
  for (int py = rect.y0; py < rect.y1; ++py)
    for (int px = rect.x0; px < rect.x1; ++px) {
      const float fx = flow.dx(py, px);
      const float fy = flow.dy(py, px);
      if (fx * fx + fy * fy > eps2) ++n;
    }
  return n;
}

MotionOffset mean_flow_over_box(const BBox& p, const FlowField& flow,
                                int frame_width, int frame_height) {
  const auto fp = pixel_footprint(p, frame_width, frame_height);
  const long count = static_cast<long>(fp.width()) * fp.height();
  if (count <= 0) return {};
  double sx = 0.0, sy = 0.0;
  for (int py = fp.y0; py < fp.y1; ++py)
    for (int px = fp.x0; px < fp.x1; ++px) {
      sx += flow.dx(py, px);
      sy += flow.dy(py, px);
    }
  // Pixel displacement to normalized units.
  return {sx / count / frame_width, sy / count / frame_height};
}

FilterOutput filter_frame(const Frame& frame, const FlowField& flow,
                          std::span<const BBox> prev_results,
                          const RegionMap& map, const FilterThresholds& th,
                          const FilterOptions& opts) {
  const BlockGrid& grid = map.grid;
  if (frame.pixels.width != grid.frame_width ||
      frame.pixels.height != grid.frame_height)
    throw std::invalid_argument("filter_frame: frame does not match region map");
  FilterOutput out;
  std::set<int> offload;

  // (a) new-object discovery, incoming and leaving regions only
  for (int k = 0; k < grid.block_count(); ++k) {
    const RegionLabel label = map.labels[static_cast<std::size_t>(k)];
    if (label != RegionLabel::Incoming && label != RegionLabel::Leaving)
      continue;
    ++out.filter_compute_cost;
    if (count_active_flow(flow, k, grid, opts.flow_epsilon) > th.t_new)
      offload.insert(k);
  }

  // (b) carry previous results forward through the flow
  for (const BBox& prev : prev_results) {
    ++out.filter_compute_cost;
    const MotionOffset o =
        mean_flow_over_box(prev, flow, grid.frame_width, grid.frame_height);
    const ShiftedBox shifted = shift_bbox(prev, o);
    if (shifted.degenerate) {
      ++out.dropped_boxes;
      continue;
    }
    if (shifted.distance > th.t_dis ||
        bbox_intersects_region(shifted.box, map, RegionLabel::Overlapping)) {
      for (const int k : bbox_blocks(shifted.box, grid)) offload.insert(k);
      out.offload_boxes.push_back(shifted.box);
    } else {
      out.reused_results.push_back(shifted.box);
    }
  }

  out.offload_blocks.assign(offload.begin(), offload.end());
  out.filtered_payload_bytes = payload_bytes(out.offload_blocks, grid, opts);
  return out;
}

std::uint64_t payload_bytes(const std::vector<int>& blocks,
                            const BlockGrid& grid, const FilterOptions& opts) {
  std::uint64_t pixels = 0;
  for (const int k : blocks) pixels += grid.block_rect(k).pixel_count();
  return static_cast<std::uint64_t>(
      std::llround(static_cast<double>(pixels) * 3.0 * opts.compression));
}

std::uint64_t full_frame_bytes(const BlockGrid& grid,
                               const FilterOptions& opts) {
  const std::uint64_t pixels =
      static_cast<std::uint64_t>(grid.frame_width) * grid.frame_height;
  return static_cast<std::uint64_t>(
      std::llround(static_cast<double>(pixels) * 3.0 * opts.compression));
}

FilteredFrame assemble_filtered(const Frame& frame, const FilterOutput& out,
                                const BlockGrid& grid) {
  FilteredFrame f;
  f.camera_id = frame.camera_id;
  f.tick = frame.tick;
  f.grid = grid;
  f.blocks = out.offload_blocks;
  f.payload_bytes = out.filtered_payload_bytes;
  std::uint64_t pixel_count = 0;
  for (const int k : f.blocks) pixel_count += grid.block_rect(k).pixel_count();
  f.pixels.reserve(pixel_count * 3);
  for (const int k : f.blocks) {
    const auto rect = grid.block_rect(k);
    for (int py = rect.y0; py < rect.y1; ++py) {
      const std::uint8_t* row = frame.pixels.at(rect.x0, py);
      f.pixels.insert(f.pixels.end(), row, row + rect.width() * 3);
    }
  }
  return f;
}

void paste_filtered(const FilteredFrame& filtered, Image& base) {
  if (base.width != filtered.grid.frame_width ||
      base.height != filtered.grid.frame_height)
    throw std::invalid_argument("paste_filtered: image size mismatch");
  std::size_t cursor = 0;
  for (const int k : filtered.blocks) {
    const auto rect = filtered.grid.block_rect(k);
    for (int py = rect.y0; py < rect.y1; ++py) {
      std::memcpy(base.at(rect.x0, py), filtered.pixels.data() + cursor,
                  static_cast<std::size_t>(rect.width()) * 3);
      cursor += static_cast<std::size_t>(rect.width()) * 3;
    }
  }
}

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  using U = std::make_unsigned_t<T>;
  U v = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t& cursor) {
  if (cursor + sizeof(T) > in.size())
    throw std::invalid_argument("filtered-frame payload truncated");
  using U = std::make_unsigned_t<T>;
  U v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<U>(in[cursor + i]) << (8 * i);
  cursor += sizeof(T);
  return static_cast<T>(v);
}

constexpr std::uint32_t kMagic = 0x46465643u;  // "CVFF"
constexpr std::uint32_t kFormatVersion = 1;

}  // namespace

std::vector<std::uint8_t> serialize_filtered(const FilteredFrame& f) {
  std::vector<std::uint8_t> out;
  put_le<std::uint32_t>(out, kMagic);
  put_le<std::uint32_t>(out, kFormatVersion);
  put_le<std::int32_t>(out, f.camera_id);
  put_le<std::int64_t>(out, f.tick);
  put_le<std::int32_t>(out, f.grid.frame_width);
  put_le<std::int32_t>(out, f.grid.frame_height);
  put_le<std::int32_t>(out, f.grid.block_size);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(f.blocks.size()));
  for (const int k : f.blocks) put_le<std::uint32_t>(out, k);
  out.insert(out.end(), f.pixels.begin(), f.pixels.end());
  return out;
}

FilteredFrame parse_filtered(std::span<const std::uint8_t> bytes) {
  std::size_t cur = 0;
  if (get_le<std::uint32_t>(bytes, cur) != kMagic)
    throw std::invalid_argument("filtered-frame payload: bad magic");
  if (get_le<std::uint32_t>(bytes, cur) != kFormatVersion)
    throw std::invalid_argument("filtered-frame payload: unsupported version");
  FilteredFrame f;
  f.camera_id = get_le<std::int32_t>(bytes, cur);
  f.tick = get_le<std::int64_t>(bytes, cur);
  f.grid.frame_width = get_le<std::int32_t>(bytes, cur);
  f.grid.frame_height = get_le<std::int32_t>(bytes, cur);
  f.grid.block_size = get_le<std::int32_t>(bytes, cur);
  if (f.grid.frame_width <= 0 || f.grid.frame_height <= 0 ||
      f.grid.block_size <= 0)
    throw std::invalid_argument("filtered-frame payload: bad dimensions");
  const std::uint32_t n = get_le<std::uint32_t>(bytes, cur);
  std::uint64_t pixel_count = 0;
  f.blocks.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const int k = get_le<std::uint32_t>(bytes, cur);
    if (k < 0 || k >= f.grid.block_count())
      throw std::invalid_argument("filtered-frame payload: block out of range");
    f.blocks.push_back(k);
    pixel_count += f.grid.block_rect(k).pixel_count();
  }
  if (bytes.size() - cur != pixel_count * 3)
    throw std::invalid_argument("filtered-frame payload: pixel data size mismatch");
  f.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(cur), bytes.end());
  f.payload_bytes = pixel_count * 3;
  return f;
}

double offload_coverage(const BBox& p, const std::vector<int>& blocks,
                        const BlockGrid& grid) {
  if (p.area() <= 0.0) return 0.0;
  // Blocks are disjoint, so summing per-block intersections is exact.
  double covered = 0.0;
  for (const int k : blocks) {
    const auto rect = grid.block_rect(k);
    const double bx0 = static_cast<double>(rect.x0) / grid.frame_width;
    const double bx1 = static_cast<double>(rect.x1) / grid.frame_width;
    const double by0 = static_cast<double>(rect.y0) / grid.frame_height;
    const double by1 = static_cast<double>(rect.y1) / grid.frame_height;
    const double iw = std::min(p.x_max, bx1) - std::max(p.x_min, bx0);
    const double ih = std::min(p.y_max, by1) - std::max(p.y_min, by0);
    if (iw > 0.0 && ih > 0.0) covered += iw * ih;
  }
  return covered / p.area();
}

}  // namespace cevas
