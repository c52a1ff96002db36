#include "cevas/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

namespace cevas {

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::CEVAS: return "cevas";
    case Scheme::EAROLike: return "earo";
    case Scheme::NoShare: return "noshare";
    case Scheme::NoSelect: return "noselect";
    case Scheme::FullOffload: return "fulloffload";
  }
  return "unknown";
}

std::optional<Scheme> scheme_from_string(const std::string& name) {
  if (name == "cevas") return Scheme::CEVAS;
  if (name == "earo") return Scheme::EAROLike;
  if (name == "noshare") return Scheme::NoShare;
  if (name == "noselect") return Scheme::NoSelect;
  if (name == "fulloffload") return Scheme::FullOffload;
  return std::nullopt;
}

void SchemeConfig::validate() const {
  if (frame_interval < 1)
    throw ConfigError("scheme.frame_interval", "must be >= 1");
  if (t_dis < 0.0) throw ConfigError("scheme.t_dis", "must be >= 0");
  if (t_new && *t_new < 0.0) throw ConfigError("scheme.t_new", "must be >= 0");
  if (t_iou < 0.0 || t_iou > 1.0)
    throw ConfigError("scheme.t_iou", "must be in [0, 1]");
  if (t_s < 0.0) throw ConfigError("scheme.t_s", "must be >= 0");
  if (fixed_tier && scheme != Scheme::NoSelect)
    throw ConfigError("scheme.fixed_tier",
                      "only valid for the noselect scheme");
  if (staleness_horizon < 0)
    throw ConfigError("scheme.staleness_horizon", "must be >= 0");
  if (feature_blend < 0.0 || feature_blend > 1.0)
    throw ConfigError("scheme.feature_blend", "must be in [0, 1]");
}

double frame_iou(const std::vector<Detection>& predictions,
                 const std::vector<BBox>& truth) {
  if (truth.empty()) return 1.0;
  struct Pair {
    double iou;
    std::size_t t, p;
  };
  std::vector<Pair> pairs;
  for (std::size_t t = 0; t < truth.size(); ++t)
    for (std::size_t p = 0; p < predictions.size(); ++p) {
      const double v = iou(truth[t], predictions[p].box);
      if (v > 0.0) pairs.push_back({v, t, p});
    }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.t != b.t) return a.t < b.t;
    return a.p < b.p;
  });
  std::vector<bool> t_used(truth.size(), false);
  std::vector<bool> p_used(predictions.size(), false);
  double sum = 0.0;
  for (const Pair& pr : pairs) {
    if (t_used[pr.t] || p_used[pr.p]) continue;
    t_used[pr.t] = true;
    p_used[pr.p] = true;
    sum += pr.iou;
  }
  return sum / static_cast<double>(truth.size());
}

Pipeline::Pipeline(const Scene& scene, const SchemeConfig& scheme,
                   const RunParams& params)
    : scene_(scene), scheme_(scheme), params_(params) {
  scheme_.validate();
  int n_cams = static_cast<int>(scene.cameras.size());
  if (params.camera_count) {
    if (*params.camera_count < 1 || *params.camera_count > n_cams)
      throw ConfigError("camera_count", "outside [1, cameras in scenario]");
    n_cams = *params.camera_count;
  }
  cameras_.assign(scene.cameras.begin(), scene.cameras.begin() + n_cams);

  sharing_enabled_ =
      scheme_.scheme == Scheme::CEVAS || scheme_.scheme == Scheme::NoSelect;
  sharing_.staleness_horizon = scheme_.staleness_horizon;
  sharing_.blend = scheme_.feature_blend;

  for (const auto& cam : cameras_) {
    const BlockGrid grid = scene.grid(cam);
    maps_.push_back(partition(cam, scene.world_overlap, scene.lanes, grid));
    FilterThresholds th = FilterThresholds::defaults(grid);
    th.t_dis = scheme_.t_dis;
    if (scheme_.t_new) th.t_new = *scheme_.t_new;
    thresholds_.push_back(th);
  }
  states_.resize(cameras_.size());

  const auto factory =
      params_.detector_factory
          ? params_.detector_factory
          : [](const DetectorProfile& p) -> std::unique_ptr<Detector> {
              return std::make_unique<SyntheticDetector>(p);
            };
  for (const DetectorProfile& tier : params_.bank.tiers)
    detectors_.push_back(factory(tier));

  if (!params_.record_filtered_dir.empty())
    std::filesystem::create_directories(params_.record_filtered_dir);
  if (!params_.sharing_log_path.empty()) {
    const auto parent =
        std::filesystem::path(params_.sharing_log_path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream truncate(params_.sharing_log_path, std::ios::trunc);
  }
}

std::size_t Pipeline::pick_tier(const CameraState& state) const {
  const auto index_of = [&](const DetectorProfile& p) -> std::size_t {
    for (std::size_t i = 0; i < params_.bank.tiers.size(); ++i)
      if (params_.bank.tiers[i].name == p.name) return i;
    return params_.bank.tiers.size() / 2;
  };
  switch (scheme_.scheme) {
    case Scheme::CEVAS:
    case Scheme::NoShare: {
      DetectionResult prev;
      prev.boxes = state.prev_merged;
      return index_of(
          select_model(mean_pairwise_iou(prev), scheme_.t_iou, params_.bank));
    }
    case Scheme::NoSelect:
      return index_of(scheme_.fixed_tier
                          ? params_.bank.by_name(*scheme_.fixed_tier)
                          : params_.bank.most_accurate());
    case Scheme::EAROLike:
    case Scheme::FullOffload:
      return params_.bank.tiers.size() / 2;
  }
  return params_.bank.tiers.size() / 2;
}

FilterOutput Pipeline::run_filter(std::size_t cam_index, const Frame& frame,
                                  const FlowField& flow,
                                  std::span<const BBox> prev) {
  const RegionMap& map = maps_[cam_index];
  const BlockGrid& grid = map.grid;

  switch (scheme_.scheme) {
    case Scheme::CEVAS:
    case Scheme::NoShare:
    case Scheme::NoSelect:
      return filter_frame(frame, flow, prev, map, thresholds_[cam_index],
                          params_.filter_opts);
    case Scheme::FullOffload: {
      FilterOutput out;
      out.offload_blocks.resize(static_cast<std::size_t>(grid.block_count()));
      for (int k = 0; k < grid.block_count(); ++k)
        out.offload_blocks[static_cast<std::size_t>(k)] = k;
      out.filtered_payload_bytes =
          payload_bytes(out.offload_blocks, grid, params_.filter_opts);
      return out;
    }
    case Scheme::EAROLike: {
      // Motion-tracking baseline: offload the blocks of every previous
      // box inflated by its motion offset, plus every block anywhere in
      // the frame with more moving pixels than t_new. No result reuse.
      FilterOutput out;
      std::set<int> offload;
      const FilterThresholds& th = thresholds_[cam_index];
      for (int k = 0; k < grid.block_count(); ++k) {
        ++out.filter_compute_cost;
        if (count_active_flow(flow, k, grid, params_.filter_opts.flow_epsilon) >
            th.t_new)
          offload.insert(k);
      }
      for (const BBox& p : prev) {
        ++out.filter_compute_cost;
        const MotionOffset o =
            mean_flow_over_box(p, flow, grid.frame_width, grid.frame_height);
        const ShiftedBox shifted = shift_bbox(p, o);
        const BBox inflated =
            shifted.degenerate ? p : bbox_union(p, shifted.box);
        for (const int k : bbox_blocks(inflated, grid)) offload.insert(k);
        out.offload_boxes.push_back(inflated);
      }
      out.offload_blocks.assign(offload.begin(), offload.end());
      out.filtered_payload_bytes =
          payload_bytes(out.offload_blocks, grid, params_.filter_opts);
      return out;
    }
  }
  throw std::logic_error("unreachable scheme");
}

TickTrace Pipeline::run_tick(std::int64_t tick) {
  TickTrace trace;
  trace.tick = tick;
  trace.cameras.resize(cameras_.size());

  struct Stage {
    Frame frame;
    FilterOutput filter;
    FilteredFrame filtered;
    DetectionResult detection;
  };
  std::vector<Stage> stages(cameras_.size());

  const auto camera_stage = [&](std::size_t ci) {
    const CameraModel& cam = cameras_[ci];
    CameraState& state = states_[ci];
    Stage& st = stages[ci];

    st.frame = render(scene_, cam, tick);
    const FlowField flow =
        state.last_processed_tick < 0
            ? FlowField::zero(cam.id, tick, cam.width, cam.height)
            : flow_field(scene_, cam, state.last_processed_tick, tick);

    const std::size_t tier = pick_tier(state);
    st.filter = run_filter(ci, st.frame, flow, state.prev_boxes);
    st.filtered = assemble_filtered(st.frame, st.filter, maps_[ci].grid);
    if (!params_.record_filtered_dir.empty()) {
      const auto bytes = serialize_filtered(st.filtered);
      const std::string name = "c" + std::to_string(cam.id) + "-t" +
                               std::to_string(tick) + ".cvff";
      std::ofstream out(
          std::filesystem::path(params_.record_filtered_dir) / name,
          std::ios::binary);
      out.write(reinterpret_cast<const char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
    }

    // Only content that was actually offloaded is detectable.
    std::vector<BBox> detectable;
    for (const BBox& gt : st.frame.ground_truth)
      if (offload_coverage(gt, st.filter.offload_blocks, maps_[ci].grid) >= 0.5)
        detectable.push_back(gt);

    RandomStream rng = RandomStream::for_tick(params_.seed, cam.id, tick);
    st.detection = detectors_[tier]->run(st.filtered, detectable, rng);
  };

  // Camera-side stages plus detection; independent per camera.
  for (std::size_t ci = 0; ci < cameras_.size(); ++ci) {
    try {
      camera_stage(ci);
    } catch (const std::exception& e) {
      throw std::runtime_error("camera " + std::to_string(cameras_[ci].id) +
                               ", tick " + std::to_string(tick) + ": " +
                               e.what());
    }
  }

  // Sharing updates are the serialization point: all updates for this
  // tick complete (in camera order) before any shared result goes out.
  if (sharing_enabled_) {
    for (std::size_t ci = 0; ci < cameras_.size(); ++ci) {
      auto events = update_sharing(stages[ci].detection, stages[ci].frame,
                                   maps_[ci], sharing_, scheme_.t_s,
                                   cameras_[ci]);
      trace.match_events.insert(trace.match_events.end(), events.begin(),
                                events.end());
    }
  }
  trace.live_sharing_objects = sharing_.size();
  if (!params_.sharing_log_path.empty()) {
    std::ofstream log(params_.sharing_log_path, std::ios::app);
    for (const std::string& line : dump_sharing_list(sharing_))
      log << "tick " << tick << ": " << line << '\n';
  }

  // Distribute shared results, merge, and account.
  for (std::size_t ci = 0; ci < cameras_.size(); ++ci) {
    const CameraModel& cam = cameras_[ci];
    CameraState& state = states_[ci];
    Stage& st = stages[ci];
    CameraTickTrace& ct = trace.cameras[ci];
    ct.camera_id = cam.id;
    ct.filter = st.filter;
    ct.detector_used = st.detection.detector_used;

    std::vector<Detection> merged = st.detection.boxes;
    for (const BBox& reused : st.filter.reused_results)
      merged.push_back({reused, BoxSource::Reused});
    if (sharing_enabled_) {
      for (const BBox& shared : shared_results_for(cam, maps_[ci], sharing_, tick))
        merged.push_back({shared, BoxSource::Shared});
    }
    ct.merged = merged;

    const double filter_time = filter_latency(
        static_cast<double>(st.filter.filter_compute_cost),
        params_.filter_unit_seconds);
    const double tx_time =
        tx_latency(st.filter.filtered_payload_bytes, params_.link);
    ct.latency =
        response_latency(filter_time, tx_time, st.detection.inference_latency);
    ct.full_bytes = full_frame_bytes(maps_[ci].grid, params_.filter_opts);
    ct.data_ratio =
        data_size_ratio(st.filter.filtered_payload_bytes, ct.full_bytes);
    ct.frame_iou = frame_iou(merged, st.frame.ground_truth);
    ct.truth_count = static_cast<int>(st.frame.ground_truth.size());

    // Close the loop: the merged result is the next tick's D_{t-1}.
    state.prev_merged = merged;
    state.prev_boxes.clear();
    for (const Detection& d : merged) {
      if (d.source == BoxSource::Shared && !scheme_.include_shared_in_prev)
        continue;
      state.prev_boxes.push_back(d.box);
    }
    state.last_processed_tick = tick;
  }
  return trace;
}

ScenarioResult run_scenario(const Scene& scene, const SchemeConfig& scheme,
                            const RunParams& params) {
  Pipeline pipeline(scene, scheme, params);
  ScenarioResult result;

  double iou_sum = 0.0;
  std::int64_t iou_frames = 0;
  double ratio_sum = 0.0;
  double latency_sum = 0.0;
  double tick_latency_sum = 0.0;
  std::int64_t camera_frames = 0;

  for (std::int64_t tick = 0; tick < scene.horizon_ticks;
       tick += scheme.frame_interval) {
    TickTrace trace = pipeline.run_tick(tick);
    double tick_total = 0.0;
    for (const CameraTickTrace& ct : trace.cameras) {
      ++camera_frames;
      if (ct.truth_count > 0) {
        iou_sum += ct.frame_iou;
        ++iou_frames;
      }
      ratio_sum += ct.data_ratio;
      latency_sum += ct.latency.total;
      tick_total += ct.latency.total;
      result.metrics.dropped_box_count += ct.filter.dropped_boxes;
      for (const Detection& d : ct.merged)
        if (d.source == BoxSource::Shared) ++result.metrics.shared_box_count;
    }
    tick_latency_sum += tick_total;
    ++result.metrics.processed_ticks;
    result.traces.push_back(std::move(trace));
  }

  result.metrics.camera_frames = camera_frames;
  if (iou_frames > 0) result.metrics.mean_iou = iou_sum / iou_frames;
  if (camera_frames > 0) {
    result.metrics.mean_data_ratio = ratio_sum / camera_frames;
    result.metrics.mean_frame_latency = latency_sum / camera_frames;
  }
  if (result.metrics.processed_ticks > 0)
    result.metrics.mean_tick_latency =
        tick_latency_sum / result.metrics.processed_ticks;
  return result;
}

}  // namespace cevas
