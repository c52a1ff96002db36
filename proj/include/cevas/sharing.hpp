#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cevas/detector.hpp"
#include "cevas/region.hpp"
#include "cevas/scene.hpp"

namespace cevas {

/// Per-channel mean color inside a box, [0,1]^3.
struct ColorFeature {
  Eigen::Vector3d v{0, 0, 0};
};

/// Box crop pooled to channels x height x width by area-weighted
/// averaging, flattened channel-major. Pooled values are scaled by
/// 1/sqrt(element count) so the flattened Euclidean norm is bounded by 1
/// regardless of patch resolution and stays commensurate with the color
/// term of feature_distance.
struct PatchFeature {
  int channels = 3;
  int height = 8;
  int width = 8;
  Eigen::VectorXf values;  // size channels*height*width
};

struct Features {
  ColorFeature color;
  PatchFeature patch;
};

/// Extracts (color, patch) features for a box. Throws
/// std::invalid_argument when the box covers no pixels.
Features extract_features(const BBox& p, const Frame& frame, int patch_height = 8,
                          int patch_width = 8);

/// Euclidean color distance plus Euclidean flattened-patch distance.
/// Throws std::invalid_argument on mismatched patch dimensions.
double feature_distance(const Features& a, const Features& b);

/// Globally tracked object inside the overlapping region.
struct SharingObject {
  std::int64_t sharing_id = 0;
  Features features;
  Eigen::Vector2d world_position{0, 0};
  Eigen::Vector2d world_lo{0, 0};  // ground-plane AABB of the last observation
  Eigen::Vector2d world_hi{0, 0};
  struct Observation {
    BBox box;
    std::int64_t tick = -1;
  };
  std::map<int, Observation> last_bbox_per_camera;
  std::int64_t last_update_tick = -1;
  int owner_camera_of_last_update = -1;
};

/// The only shared mutable state in the system. Updates must be
/// serialized (single writer); reads may run concurrently between
/// updates. The orchestrator finishes every update for tick t before
/// answering shared_results_for at tick t.
struct SharingList {
  std::vector<SharingObject> objects;
  std::int64_t staleness_horizon = 10;  // ticks without update before eviction
  double blend = 0.5;                   // feature update weight for new data
  std::int64_t next_id = 0;

  std::size_t size() const { return objects.size(); }
};

/// One row per processed box; consumed by tests and trace dumps.
struct MatchEvent {
  int camera_id = 0;
  std::int64_t tick = 0;
  BBox box;
  bool matched = false;   // matched an existing object (else created one)
  bool replay = false;    // identical same-tick update, ignored
  std::int64_t sharing_id = -1;
  double s_min = -1.0;    // distance to the nearest object before update
};

/// Runs the sharing-object update for one camera's detection results:
/// boxes that do not touch the camera's overlapping region are skipped;
/// the rest are feature-matched against the list (nearest neighbour,
/// strict threshold t_s) and either merged into the match or appended
/// as new objects. Entries unseen for longer than the staleness horizon
/// are evicted first. Repeating an identical (result, frame) pair at the
/// same tick is a no-op.
std::vector<MatchEvent> update_sharing(const DetectionResult& result,
                                       const Frame& frame, const RegionMap& map,
                                       SharingList& list, double t_s,
                                       const CameraModel& camera);

/// Boxes to hand this camera at `tick`: one per live object the camera
/// has not itself reported this tick, projected through the camera's
/// view transform, and only when the projected center falls inside this
/// camera's overlapping region.
std::vector<BBox> shared_results_for(const CameraModel& camera,
                                     const RegionMap& map,
                                     const SharingList& list,
                                     std::int64_t tick);

/// One text line per live object, for trace dumps and debugging.
std::vector<std::string> dump_sharing_list(const SharingList& list);

}  // namespace cevas
