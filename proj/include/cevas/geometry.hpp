#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "cevas/common.hpp"

namespace cevas {

/// Axis-aligned bounding box in normalized image coordinates.
/// All coordinates live in [0, 1]; distances derived from boxes are in
/// normalized units as well (fractions of the frame side), not pixels.
struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  std::optional<std::int64_t> object_id;  // opaque; carried for bookkeeping
  double confidence = 1.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  Eigen::Vector2d center() const {
    return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)};
  }
  bool valid() const {
    return x_min < x_max && y_min < y_max && x_min >= 0.0 && y_min >= 0.0 &&
           x_max <= 1.0 && y_max <= 1.0;
  }
};

/// Square-block tiling of a pixel grid. Blocks are numbered row-major;
/// partial blocks at the right/bottom edge are allowed.
struct BlockGrid {
  int frame_width = 0;   // pixels
  int frame_height = 0;  // pixels
  int block_size = 32;   // pixels, square

  int cols() const { return (frame_width + block_size - 1) / block_size; }
  int rows() const { return (frame_height + block_size - 1) / block_size; }
  int block_count() const { return cols() * rows(); }

  int block_of_pixel(int px, int py) const {
    return (py / block_size) * cols() + (px / block_size);
  }

  /// Pixel rectangle of block k, half-open: [x0,x1) x [y0,y1), clipped
  /// to the frame.
  struct PixelRect {
    int x0, y0, x1, y1;
    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    int pixel_count() const { return width() * height(); }
  };

  PixelRect block_rect(int k) const {
    const int c = k % cols();
    const int r = k / cols();
    PixelRect rect;
    rect.x0 = c * block_size;
    rect.y0 = r * block_size;
    rect.x1 = rect.x0 + block_size;
    rect.y1 = rect.y0 + block_size;
    if (rect.x1 > frame_width) rect.x1 = frame_width;
    if (rect.y1 > frame_height) rect.y1 = frame_height;
    return rect;
  }
};

/// Displacement in normalized units: x is a fraction of frame width,
/// y a fraction of frame height.
struct MotionOffset {
  double x = 0.0;
  double y = 0.0;
};

/// Intersection over union of two boxes; 0 when disjoint.
double iou(const BBox& a, const BBox& b);

/// Euclidean norm of a motion offset.
double motion_distance(const MotionOffset& o);

/// Result of translating a box by a motion offset. `degenerate` is set
/// when clamping to [0,1] collapsed the box to zero area (it left the
/// frame entirely); such boxes must not be used further.
struct ShiftedBox {
  BBox box;
  double distance = 0.0;
  bool degenerate = false;
};

ShiftedBox shift_bbox(const BBox& p, const MotionOffset& o);

/// Pixel footprint of a normalized box, half-open pixel semantics:
/// pixel px is covered when [px, px+1) intersects [x_min*W, x_max*W).
/// Returns {x0, y0, x1, y1} with x in [0, W], y in [0, H].
BlockGrid::PixelRect pixel_footprint(const BBox& p, int frame_width,
                                     int frame_height);

/// Indices (ascending) of every block whose pixel rectangle intersects
/// the box's pixel footprint.
std::vector<int> bbox_blocks(const BBox& p, const BlockGrid& g);

/// Smallest box containing both inputs. Identity metadata comes from `a`.
BBox bbox_union(const BBox& a, const BBox& b);

}  // namespace cevas
