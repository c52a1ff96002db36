#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "cevas/geometry.hpp"

#include <nlohmann/json_fwd.hpp>

namespace cevas {

/// Time-stamped position on the world ground plane. Consecutive
/// waypoints with equal positions encode a stop interval.
struct Waypoint {
  double t = 0.0;            // seconds
  Eigen::Vector2d pos{0, 0};  // world units
};

struct Vehicle {
  std::int64_t id = 0;
  Eigen::Vector2d extent{1, 1};   // world-plane width (x) and height (y)
  Eigen::Vector3d color{1, 1, 1};  // intrinsic color, [0,1] per channel
  std::vector<Waypoint> waypoints;  // strictly increasing t

  /// Piecewise-linear position, clamped at both trajectory ends.
  Eigen::Vector2d position(double t) const;
};

/// Affine view of the world plane. world_to_image maps world units to
/// normalized image coordinates; the visible area is the preimage of
/// the unit square.
struct CameraModel {
  int id = 0;
  int width = 0;    // pixels
  int height = 0;   // pixels
  double frame_rate_hz = 10.0;
  Eigen::Affine2d world_to_image = Eigen::Affine2d::Identity();
  Eigen::Affine2d image_to_world = Eigen::Affine2d::Identity();

  Eigen::Vector2d to_image(const Eigen::Vector2d& world) const {
    return world_to_image * world;
  }
  Eigen::Vector2d to_world(const Eigen::Vector2d& image_norm) const {
    return image_to_world * image_norm;
  }
};

/// Interleaved RGB image; channel values are quantized to k/255 at
/// render time so byte serialization is lossless.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // size width*height*3, row-major

  void resize(int w, int h) {
    width = w;
    height = h;
    data.assign(static_cast<std::size_t>(w) * h * 3, 0);
  }
  std::uint8_t* at(int x, int y) {
    return data.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  const std::uint8_t* at(int x, int y) const {
    return data.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
};

struct Frame {
  int camera_id = 0;
  std::int64_t tick = 0;
  Image pixels;
  std::vector<BBox> ground_truth;  // object_id set to the vehicle id
};

/// Per-pixel screen-space displacement (in pixels) since the previous
/// processed frame; zero on background.
struct FlowField {
  int camera_id = 0;
  std::int64_t tick = 0;
  Eigen::ArrayXXf dx;  // (height, width)
  Eigen::ArrayXXf dy;

  static FlowField zero(int camera_id, std::int64_t tick, int w, int h) {
    FlowField f;
    f.camera_id = camera_id;
    f.tick = tick;
    f.dx = Eigen::ArrayXXf::Zero(h, w);
    f.dy = Eigen::ArrayXXf::Zero(h, w);
    return f;
  }
};

/// Simple polygon on the world plane; point containment by even-odd rule.
struct Polygon {
  std::vector<Eigen::Vector2d> points;
  bool empty() const { return points.size() < 3; }
  bool contains(const Eigen::Vector2d& p) const;
};

enum class LaneKind { Incoming, Leaving };

/// Axis-aligned world-plane strip declaring an entrance or exit lane.
/// An empty `cameras` list applies the strip to every camera.
struct LaneStrip {
  LaneKind kind = LaneKind::Incoming;
  Eigen::Vector2d lo{0, 0};
  Eigen::Vector2d hi{0, 0};
  std::vector<int> cameras;

  bool contains(const Eigen::Vector2d& p) const {
    return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() &&
           p.y() <= hi.y();
  }
  bool applies_to(int camera_id) const;
};

/// Immutable synthetic intersection world. Everything downstream is a
/// pure function of (scene, tick), so per-camera pipelines may call
/// render/flow_field concurrently.
struct Scene {
  std::string name;
  std::uint64_t seed = 0;
  std::int64_t horizon_ticks = 0;  // valid ticks are [0, horizon_ticks)
  int block_size = 32;
  double visibility_area = 0.0005;  // min normalized box area for ground truth
  Eigen::Vector3d background{0.5, 0.5, 0.5};
  Polygon world_overlap;
  std::vector<LaneStrip> lanes;
  std::vector<CameraModel> cameras;
  std::vector<Vehicle> vehicles;

  double tick_seconds(const CameraModel& cam) const {
    return 1.0 / cam.frame_rate_hz;
  }
  BlockGrid grid(const CameraModel& cam) const {
    return BlockGrid{cam.width, cam.height, block_size};
  }
};

/// Builds a scene from a parsed config. Throws ConfigError with the
/// path of the offending field on malformed input.
Scene build_scene(const nlohmann::json& config);
Scene load_scene(const std::string& path);

/// Rasterizes every vehicle visible at `tick` as a filled rectangle of
/// its intrinsic color over the background, painter's order by vehicle
/// id. Ground truth lists each vehicle whose clamped projected box has
/// normalized area >= the scene visibility threshold.
Frame render(const Scene& scene, const CameraModel& camera, std::int64_t tick);

/// Ground-truth optical flow: pixels covered by a vehicle at tick_now
/// carry that vehicle's screen displacement (pixels) since tick_prev;
/// everything else is zero. Occlusions follow render's painter order.
FlowField flow_field(const Scene& scene, const CameraModel& camera,
                     std::int64_t tick_prev, std::int64_t tick_now);

/// Order-independent digest of rendered content at a few spread ticks;
/// used as a regression anchor for scene determinism.
std::uint64_t scene_digest(const Scene& scene);

}  // namespace cevas
