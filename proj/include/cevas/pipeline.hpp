#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cevas/detector.hpp"
#include "cevas/filter.hpp"
#include "cevas/netmodel.hpp"
#include "cevas/region.hpp"
#include "cevas/scene.hpp"
#include "cevas/sharing.hpp"

namespace cevas {

enum class Scheme : std::uint8_t {
  CEVAS = 0,       // filtering + model selection + sharing
  EAROLike = 1,    // motion-tracking offload baseline, fixed middle tier
  NoShare = 2,     // CEVAS without the sharing manager
  NoSelect = 3,    // CEVAS with a fixed detector tier
  FullOffload = 4  // every block offloaded, fixed middle tier
};

const char* to_string(Scheme s);
std::optional<Scheme> scheme_from_string(const std::string& name);

struct SchemeConfig {
  Scheme scheme = Scheme::CEVAS;
  double t_dis = 0.1;
  std::optional<double> t_new;  // defaults to a quarter block per camera grid
  double t_iou = 0.2;
  double t_s = 0.05;
  int frame_interval = 1;  // process one tick in every n
  std::optional<std::string> fixed_tier;  // NoSelect only
  bool include_shared_in_prev = true;  // feed shared boxes into next-tick filtering
  std::int64_t staleness_horizon = 10;
  double feature_blend = 0.5;

  void validate() const;  // throws ConfigError
};

struct RunParams {
  DetectorBank bank = DetectorBank::defaults();
  LinkModel link;
  double filter_unit_seconds = 1e-5;  // seconds per filter work unit
  FilterOptions filter_opts;
  std::uint64_t seed = 0;
  std::optional<int> camera_count;  // use only the first k cameras

  /// Adapter slot for external detection backends; the default wraps
  /// each tier profile in the synthetic model.
  std::function<std::unique_ptr<Detector>(const DetectorProfile&)>
      detector_factory;

  /// Optional trace sinks. record_filtered_dir receives one serialized
  /// filtered frame per camera and tick; sharing_log_path gets one line
  /// per live sharing object per tick.
  std::string record_filtered_dir;
  std::string sharing_log_path;
};

/// Everything observable about one camera at one processed tick.
struct CameraTickTrace {
  int camera_id = 0;
  FilterOutput filter;
  std::string detector_used;
  std::vector<Detection> merged;  // detected + reused + shared
  LatencyBreakdown latency;
  double frame_iou = 1.0;
  std::uint64_t full_bytes = 0;
  double data_ratio = 0.0;
  int truth_count = 0;
};

struct TickTrace {
  std::int64_t tick = 0;
  std::vector<CameraTickTrace> cameras;
  std::vector<MatchEvent> match_events;
  std::size_t live_sharing_objects = 0;
};

struct MetricsRecord {
  std::int64_t processed_ticks = 0;
  std::int64_t camera_frames = 0;
  double mean_iou = 0.0;          // over camera frames with ground truth
  double mean_data_ratio = 0.0;   // over all camera frames
  double mean_frame_latency = 0.0;  // per camera frame
  double mean_tick_latency = 0.0;   // per tick, summed across cameras
  std::int64_t shared_box_count = 0;
  std::int64_t dropped_box_count = 0;
};

struct ScenarioResult {
  std::vector<TickTrace> traces;
  MetricsRecord metrics;
};

/// Greedy one-to-one matching of predictions to ground truth by
/// descending IoU; the score is the mean matched IoU over truth boxes
/// (unmatched truth scores 0). Defined as 1 when there is no truth.
double frame_iou(const std::vector<Detection>& predictions,
                 const std::vector<BBox>& truth);

/// Closed-loop orchestrator for one scheme over one scene. Per tick and
/// camera: render -> flow -> filter -> select tier -> detect ->
/// sharing update (serialized across cameras) -> distribute shared
/// results -> merge. Per-camera stages are independent; the sharing
/// list is the single serialization point.
class Pipeline {
 public:
  Pipeline(const Scene& scene, const SchemeConfig& scheme, const RunParams& params);

  TickTrace run_tick(std::int64_t tick);
  const SharingList& sharing_list() const { return sharing_; }
  const RegionMap& region_map(std::size_t camera_index) const {
    return maps_[camera_index];
  }
  int camera_count() const { return static_cast<int>(cameras_.size()); }

 private:
  struct CameraState {
    std::vector<BBox> prev_boxes;  // D_{t-1}, merged
    std::vector<Detection> prev_merged;
    std::int64_t last_processed_tick = -1;
  };

  FilterOutput run_filter(std::size_t cam_index, const Frame& frame,
                          const FlowField& flow, std::span<const BBox> prev);
  std::size_t pick_tier(const CameraState& state) const;

  const Scene& scene_;
  SchemeConfig scheme_;
  RunParams params_;
  std::vector<CameraModel> cameras_;
  std::vector<RegionMap> maps_;
  std::vector<FilterThresholds> thresholds_;
  std::vector<CameraState> states_;
  std::vector<std::unique_ptr<Detector>> detectors_;  // one per bank tier
  SharingList sharing_;
  bool sharing_enabled_ = true;
};

/// Runs a whole scenario: processes ticks 0, n, 2n, ... within the
/// horizon and aggregates the metrics. Deterministic for a fixed seed.
ScenarioResult run_scenario(const Scene& scene, const SchemeConfig& scheme,
                            const RunParams& params);

}  // namespace cevas
