#include "cevas/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace cevas {

double iou(const BBox& a, const BBox& b) {
  const double ix0 = std::max(a.x_min, b.x_min);
  const double iy0 = std::max(a.y_min, b.y_min);
  const double ix1 = std::min(a.x_max, b.x_max);
  const double iy1 = std::min(a.y_max, b.y_max);
  const double iw = ix1 - ix0;
  const double ih = iy1 - iy0;
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double motion_distance(const MotionOffset& o) {
  return std::sqrt(o.x * o.x + o.y * o.y);
}

ShiftedBox shift_bbox(const BBox& p, const MotionOffset& o) {
  ShiftedBox out;
  out.distance = motion_distance(o);
  out.box = p;
  out.box.x_min = clamp01(p.x_min + o.x);
  out.box.x_max = clamp01(p.x_max + o.x);
  out.box.y_min = clamp01(p.y_min + o.y);
  out.box.y_max = clamp01(p.y_max + o.y);
  out.degenerate =
      out.box.x_max - out.box.x_min <= 0.0 || out.box.y_max - out.box.y_min <= 0.0;
  return out;
}

BlockGrid::PixelRect pixel_footprint(const BBox& p, int frame_width,
                                     int frame_height) {
  BlockGrid::PixelRect r;
  r.x0 = std::max(0, static_cast<int>(std::floor(p.x_min * frame_width)));
  r.y0 = std::max(0, static_cast<int>(std::floor(p.y_min * frame_height)));
  r.x1 = std::min(frame_width, static_cast<int>(std::ceil(p.x_max * frame_width)));
  r.y1 =
      std::min(frame_height, static_cast<int>(std::ceil(p.y_max * frame_height)));
  if (r.x1 < r.x0) r.x1 = r.x0;
  if (r.y1 < r.y0) r.y1 = r.y0;
  return r;
}

std::vector<int> bbox_blocks(const BBox& p, const BlockGrid& g) {
  const auto fp = pixel_footprint(p, g.frame_width, g.frame_height);
  std::vector<int> out;
  if (fp.width() <= 0 || fp.height() <= 0) return out;
  const int bx0 = fp.x0 / g.block_size;
  const int bx1 = (fp.x1 - 1) / g.block_size;
  const int by0 = fp.y0 / g.block_size;
  const int by1 = (fp.y1 - 1) / g.block_size;
  out.reserve(static_cast<std::size_t>(bx1 - bx0 + 1) * (by1 - by0 + 1));
  for (int by = by0; by <= by1; ++by)
    for (int bx = bx0; bx <= bx1; ++bx) out.push_back(by * g.cols() + bx);
  return out;
}

BBox bbox_union(const BBox& a, const BBox& b) {
  BBox u = a;
  u.x_min = std::min(a.x_min, b.x_min);
  u.y_min = std::min(a.y_min, b.y_min);
  u.x_max = std::max(a.x_max, b.x_max);
  u.y_max = std::max(a.y_max, b.y_max);
  return u;
}

}  // namespace cevas
