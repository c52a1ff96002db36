// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the process exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "cevas/harness.hpp"
#include "oracles.hpp"

using namespace cevas;
namespace fs = std::filesystem;

namespace {

const char* kFixtureDir = CEVAS_FIXTURE_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool cond, const std::string& msg) {
    if (!cond && pass) {
      pass = false;
      detail = msg;
    }
  }
};

std::string fixture(const std::string& name) {
  return std::string(kFixtureDir) + "/" + name;
}

MetricsRecord mean_over_seeds(const Scene& scene, const SchemeConfig& scheme,
                              RunParams params,
                              const std::vector<std::uint64_t>& seeds) {
  MetricsRecord mean;
  for (const std::uint64_t seed : seeds) {
    params.seed = seed;
    const MetricsRecord m = run_scenario(scene, scheme, params).metrics;
    mean.mean_iou += m.mean_iou;
    mean.mean_data_ratio += m.mean_data_ratio;
    mean.mean_frame_latency += m.mean_frame_latency;
    mean.mean_tick_latency += m.mean_tick_latency;
    mean.shared_box_count += m.shared_box_count;
  }
  const double n = static_cast<double>(seeds.size());
  mean.mean_iou /= n;
  mean.mean_data_ratio /= n;
  mean.mean_frame_latency /= n;
  mean.mean_tick_latency /= n;
  return mean;
}

// ---------------------------------------------------------------- 1
Outcome criterion_filter_oracle_equivalence() {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  RandomStream rng(20240901);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    auto scene = oracle::random_filter_scene(rng);
    FilterThresholds th;
    th.t_new = scene.t_new;
    th.t_dis = scene.t_dis;
    Frame frame;
    frame.pixels.resize(scene.grid.frame_width, scene.grid.frame_height);
    const FilterOutput got =
        filter_frame(frame, scene.flow, scene.prev, scene.map, th);
    const auto ref = oracle::alg1_reference(scene.flow, scene.map, scene.prev,
                                            th.t_new, th.t_dis);
    const std::set<int> got_blocks(got.offload_blocks.begin(),
                                   got.offload_blocks.end());
    out.require(got_blocks == ref.offload_blocks,
                "offload set diverged on scene " + std::to_string(i));
    out.require(got.reused_results.size() == ref.reused.size() &&
                    got.dropped_boxes == ref.dropped,
                "reuse/drop partition diverged on scene " + std::to_string(i));
    for (std::size_t b = 0; b < got.reused_results.size() && out.pass; ++b)
      out.require(got.reused_results[b].x_min == ref.reused[b].x_min &&
                      got.reused_results[b].y_min == ref.reused[b].y_min &&
                      got.reused_results[b].x_max == ref.reused[b].x_max &&
                      got.reused_results[b].y_max == ref.reused[b].y_max,
                  "reused box differs on scene " + std::to_string(i));
    ++checked;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  out.require(checked == 1000, "expected 1000 scenes");
  out.require(seconds < 30.0,
              "runtime " + std::to_string(seconds) + "s exceeds 30s");
  if (out.pass) {
    std::ostringstream os;
    os << "1000 randomized scenes, " << std::fixed << seconds << "s";
    out.detail = os.str();
  }
  return out;
}

// ---------------------------------------------------------------- 2
Outcome criterion_sharing_dedup() {
  Outcome out;
  const Scene scene = load_scene(fixture("crossing.json"));
  SchemeConfig scheme;
  scheme.scheme = Scheme::CEVAS;
  RunParams params;
  params.seed = scene.seed;
  const ScenarioResult res = run_scenario(scene, scheme, params);

  std::vector<RegionMap> maps;
  for (const auto& cam : scene.cameras)
    maps.push_back(partition(cam, scene.world_overlap, scene.lanes,
                             scene.grid(cam)));

  // Ground truth: vehicles whose true box touches some camera's
  // overlapping region at this tick.
  for (const TickTrace& trace : res.traces) {
    if (trace.tick < 2) continue;
    std::set<std::int64_t> expected;
    for (std::size_t ci = 0; ci < scene.cameras.size(); ++ci) {
      const Frame f = render(scene, scene.cameras[ci], trace.tick);
      for (const BBox& gt : f.ground_truth)
        if (bbox_intersects_region(gt, maps[ci], RegionLabel::Overlapping))
          expected.insert(*gt.object_id);
    }
    out.require(trace.live_sharing_objects == expected.size(),
                "tick " + std::to_string(trace.tick) + ": " +
                    std::to_string(trace.live_sharing_objects) +
                    " tracked objects vs " + std::to_string(expected.size()) +
                    " vehicles in the shared region");
  }

  // Match precision/recall against vehicle identities.
  std::map<std::int64_t, std::int64_t> first_gt;  // sharing_id -> vehicle id
  std::set<std::int64_t> live_ids;                // vehicle ids with an entry
  int tp = 0, fp = 0, fn = 0;
  for (const TickTrace& trace : res.traces) {
    for (const MatchEvent& ev : trace.match_events) {
      if (ev.replay) continue;
      if (!ev.box.object_id) continue;
      const std::int64_t veh = *ev.box.object_id;
      if (ev.matched) {
        if (first_gt.count(ev.sharing_id) && first_gt[ev.sharing_id] == veh)
          ++tp;
        else
          ++fp;
      } else {
        first_gt[ev.sharing_id] = veh;
        if (live_ids.count(veh))
          ++fn;  // duplicate entry for an already-tracked vehicle
        else
          live_ids.insert(veh);
      }
    }
  }
  const double precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 1.0;
  const double recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 1.0;
  out.require(precision >= 0.95,
              "match precision " + std::to_string(precision));
  out.require(recall >= 0.95, "match recall " + std::to_string(recall));
  if (out.pass) {
    std::ostringstream os;
    os << "count matches every tick; precision " << precision << ", recall "
       << recall;
    out.detail = os.str();
  }
  return out;
}

// ---------------------------------------------------------------- 3
Outcome criterion_threshold_semantics() {
  Outcome out;
  const Scene scene = load_scene(fixture("stationary.json"));
  SchemeConfig scheme;
  scheme.scheme = Scheme::CEVAS;
  RunParams params;
  params.seed = scene.seed;
  params.bank = DetectorBank::ideal();  // isolate the filtering policy
  const ScenarioResult res = run_scenario(scene, scheme, params);
  const BlockGrid grid = scene.grid(scene.cameras[0]);

  bool saw_window = false;
  for (const TickTrace& trace : res.traces) {
    if (trace.tick < 24) continue;  // both vehicles parked and settled
    saw_window = true;
    const CameraTickTrace& ct = trace.cameras[0];

    // The vehicle parked outside the overlap is carried in the reuse
    // queue; it contributes zero offloaded blocks.
    bool reused_out = false;
    for (const Detection& d : ct.merged)
      if (d.source == BoxSource::Reused && d.box.object_id == 0)
        reused_out = true;
    out.require(reused_out, "tick " + std::to_string(trace.tick) +
                                ": parked vehicle 0 not in the reuse queue");

    // The vehicle parked inside the overlap is re-offloaded every tick:
    // the offload set is exactly its box's blocks.
    const BBox* in_box = nullptr;
    for (const Detection& d : ct.merged)
      if (d.source == BoxSource::Detected && d.box.object_id == 1)
        in_box = &d.box;
    out.require(in_box != nullptr, "tick " + std::to_string(trace.tick) +
                                       ": overlap vehicle not re-detected");
    if (!in_box) break;
    out.require(!ct.filter.offload_blocks.empty(),
                "tick " + std::to_string(trace.tick) + ": nothing offloaded");
    out.require(ct.filter.offload_blocks == bbox_blocks(*in_box, grid),
                "tick " + std::to_string(trace.tick) +
                    ": offload set is not exactly the overlap vehicle's blocks");
  }
  out.require(saw_window, "scenario never reached the stationary window");
  if (out.pass)
    out.detail = "stationary-outside reused with zero offload; "
                 "stationary-inside offloaded every tick";
  return out;
}

// ---------------------------------------------------------------- 4
Outcome criterion_model_selection_branches() {
  Outcome out;
  const DetectorBank bank = DetectorBank::defaults();
  const double eps = 1e-9;
  const std::vector<std::pair<double, std::string>> cases = {
      {0.0, "fast"},          {0.05, "balanced"}, {0.2 - eps, "balanced"},
      {0.2, "balanced"},      {0.2 + eps, "accurate"}, {1.0, "accurate"},
  };
  for (const auto& [m, expect] : cases)
    out.require(select_model(m, 0.2, bank).name == expect,
                "m=" + std::to_string(m) + " selected " +
                    select_model(m, 0.2, bank).name + ", expected " + expect);
  if (out.pass) out.detail = "all branches at m in {0, 0.05, 0.2-eps, 0.2, 0.2+eps, 1}";
  return out;
}

// ---------------------------------------------------------------- 5
Outcome criterion_frame_interval_trends() {
  Outcome out;
  const Scene scene = load_scene(fixture("crossing.json"));
  const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::ostringstream detail;
  for (const int interval : {1, 2, 5, 10}) {
    SchemeConfig base;
    base.frame_interval = interval;
    RunParams params;

    SchemeConfig cevas_cfg = base;
    cevas_cfg.scheme = Scheme::CEVAS;
    SchemeConfig earo_cfg = base;
    earo_cfg.scheme = Scheme::EAROLike;
    SchemeConfig noshare_cfg = base;
    noshare_cfg.scheme = Scheme::NoShare;
    SchemeConfig noselect_cfg = base;
    noselect_cfg.scheme = Scheme::NoSelect;
    noselect_cfg.fixed_tier = "accurate";

    const MetricsRecord cevas_m = mean_over_seeds(scene, cevas_cfg, params, seeds);
    const MetricsRecord earo_m = mean_over_seeds(scene, earo_cfg, params, seeds);
    const MetricsRecord noshare_m =
        mean_over_seeds(scene, noshare_cfg, params, seeds);
    const MetricsRecord noselect_m =
        mean_over_seeds(scene, noselect_cfg, params, seeds);

    out.require(cevas_m.shared_box_count > 0,
                "interval " + std::to_string(interval) +
                    ": overlap never populated (no shared results)");
    out.require(cevas_m.mean_data_ratio < earo_m.mean_data_ratio,
                "interval " + std::to_string(interval) + ": data ratio " +
                    std::to_string(cevas_m.mean_data_ratio) + " !< " +
                    std::to_string(earo_m.mean_data_ratio));
    out.require(cevas_m.mean_frame_latency < noselect_m.mean_frame_latency,
                "interval " + std::to_string(interval) + ": latency " +
                    std::to_string(cevas_m.mean_frame_latency) + " !< " +
                    std::to_string(noselect_m.mean_frame_latency));
    out.require(cevas_m.mean_iou > noshare_m.mean_iou,
                "interval " + std::to_string(interval) + ": iou " +
                    std::to_string(cevas_m.mean_iou) + " !> " +
                    std::to_string(noshare_m.mean_iou));
    detail << "n=" << interval << " ratio " << std::fixed
           << cevas_m.mean_data_ratio << "<" << earo_m.mean_data_ratio << "; ";
  }
  if (out.pass) out.detail = detail.str();
  return out;
}

// ---------------------------------------------------------------- 6
Outcome criterion_camera_count_trends() {
  Outcome out;
  const Scene scene = load_scene(fixture("crossing.json"));
  const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  const std::vector<int> counts = {1, 2, 3, 4};

  std::vector<double> cevas_iou, earo_latency, noselect_latency;
  for (const int k : counts) {
    RunParams params;
    params.camera_count = k;
    SchemeConfig cevas_cfg;
    cevas_cfg.scheme = Scheme::CEVAS;
    SchemeConfig earo_cfg;
    earo_cfg.scheme = Scheme::EAROLike;
    SchemeConfig noselect_cfg;
    noselect_cfg.scheme = Scheme::NoSelect;
    noselect_cfg.fixed_tier = "accurate";
    cevas_iou.push_back(mean_over_seeds(scene, cevas_cfg, params, seeds).mean_iou);
    earo_latency.push_back(
        mean_over_seeds(scene, earo_cfg, params, seeds).mean_tick_latency);
    noselect_latency.push_back(
        mean_over_seeds(scene, noselect_cfg, params, seeds).mean_tick_latency);
  }

  for (std::size_t i = 1; i < cevas_iou.size(); ++i)
    out.require(cevas_iou[i] >= cevas_iou[i - 1] - 1e-9,
                "cevas IoU decreased from " + std::to_string(cevas_iou[i - 1]) +
                    " to " + std::to_string(cevas_iou[i]) + " at " +
                    std::to_string(counts[i]) + " cameras");

  const auto linear_r2 = [&](const std::vector<double>& y) {
    const std::size_t n = y.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sx += counts[i];
      sy += y[i];
      sxx += counts[i] * counts[i];
      sxy += counts[i] * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double mean = sy / n;
    for (std::size_t i = 0; i < n; ++i) {
      const double fit = intercept + slope * counts[i];
      ss_res += (y[i] - fit) * (y[i] - fit);
      ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    return std::make_pair(slope, ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0);
  };

  const auto [earo_slope, earo_r2] = linear_r2(earo_latency);
  const auto [nosel_slope, nosel_r2] = linear_r2(noselect_latency);
  for (std::size_t i = 1; i < counts.size(); ++i) {
    out.require(earo_latency[i] > earo_latency[i - 1],
                "earo latency not increasing in camera count");
    out.require(noselect_latency[i] > noselect_latency[i - 1],
                "noselect latency not increasing in camera count");
  }
  out.require(earo_slope > 0 && earo_r2 >= 0.9,
              "earo latency linear fit R2 " + std::to_string(earo_r2));
  out.require(nosel_slope > 0 && nosel_r2 >= 0.9,
              "noselect latency linear fit R2 " + std::to_string(nosel_r2));
  if (out.pass) {
    std::ostringstream os;
    os << "iou " << cevas_iou[0] << "->" << cevas_iou[3] << "; R2 earo "
       << earo_r2 << ", noselect " << nosel_r2;
    out.detail = os.str();
  }
  return out;
}

// ---------------------------------------------------------------- 7
Outcome criterion_calibrated_rate_trend() {
  Outcome out;
  const Scene scene = load_scene(fixture("crossing.json"));
  SchemeConfig earo_cfg;
  earo_cfg.scheme = Scheme::EAROLike;
  SchemeConfig cevas_cfg;
  cevas_cfg.scheme = Scheme::CEVAS;
  RunParams params;
  params.seed = 1;

  const CalibrationTargets targets;
  const CalibrationResult fit =
      calibrate_link(scene, earo_cfg, params, targets);
  out.require(fit.max_error <= 0.05,
              "calibration error " + std::to_string(fit.max_error));

  RunParams fitted = params;
  fitted.link.fixed_overhead = fit.fixed_overhead;
  fitted.filter_opts.compression = fit.compression;
  std::ostringstream detail;
  detail << "fit err " << std::fixed << fit.max_error << ";";
  for (std::size_t i = 0; i < targets.rates_mbps.size(); ++i) {
    fitted.link.rate_mbps = targets.rates_mbps[i];
    const double earo_lat =
        run_scenario(scene, earo_cfg, fitted).metrics.mean_frame_latency;
    const double cevas_lat =
        run_scenario(scene, cevas_cfg, fitted).metrics.mean_frame_latency;
    const double cell_err =
        std::abs(earo_lat - targets.latencies_s[i]) / targets.latencies_s[i];
    out.require(cell_err <= 0.05,
                "rate " + std::to_string(targets.rates_mbps[i]) +
                    ": simulated reference latency off by " +
                    std::to_string(cell_err));
    out.require(cevas_lat < earo_lat,
                "rate " + std::to_string(targets.rates_mbps[i]) + ": cevas " +
                    std::to_string(cevas_lat) + " !< earo " +
                    std::to_string(earo_lat));
    detail << " " << targets.rates_mbps[i] << ":" << cevas_lat << "<" << earo_lat;
  }
  if (out.pass) out.detail = detail.str();
  return out;
}

// ---------------------------------------------------------------- 8
Outcome criterion_numerical_primitives() {
  Outcome out;
  BBox a;
  a.x_min = 0.2;
  a.y_min = 0.3;
  a.x_max = 0.6;
  a.y_max = 0.9;
  BBox b = a;
  b.x_min = 0.65;
  b.x_max = 0.9;
  out.require(iou(a, a) == 1.0, "iou(a,a) != 1");
  out.require(iou(a, b) == 0.0, "disjoint iou != 0");
  out.require(motion_distance({0, 0}) == 0.0, "f_d(0,0) != 0");
  out.require(std::abs(motion_distance({0.3, 0.4}) - 0.5) < 1e-15,
              "f_d(0.3,0.4) != 0.5");
  out.require(std::abs(motion_distance({-0.1, 0.0}) - 0.1) < 1e-15,
              "f_d(-0.1,0) != 0.1");

  RandomStream rng(777);
  const auto random_features = [&]() {
    Features f;
    f.color.v = Eigen::Vector3d(rng.uniform01(), rng.uniform01(), rng.uniform01());
    f.patch.values = Eigen::VectorXf::Zero(3 * 8 * 8);
    for (int i = 0; i < f.patch.values.size(); ++i)
      f.patch.values[i] = static_cast<float>(rng.uniform01() / 13.8564);
    return f;
  };
  for (int i = 0; i < 10000 && out.pass; ++i) {
    const Features fa = random_features();
    const Features fb = random_features();
    const double ab = feature_distance(fa, fb);
    out.require(ab >= 0.0, "distance negative");
    out.require(ab == feature_distance(fb, fa), "distance asymmetric");
    out.require(feature_distance(fa, fa) == 0.0, "self-distance nonzero");
  }
  Features fa = random_features();
  Features fb = fa;
  fb.color.v += Eigen::Vector3d(0.3, 0.4, 0.0);
  out.require(std::abs(feature_distance(fa, fb) - 0.5) < 1e-12,
              "color-only distance != 0.5");
  if (out.pass) out.detail = "trivial cases exact; pseudometric on 10000 pairs";
  return out;
}

// ---------------------------------------------------------------- 9
Outcome criterion_run_determinism() {
  Outcome out;
  ExperimentSpec spec;
  spec.scenario_path = fixture("crossing.json");
  spec.schemes = {Scheme::CEVAS, Scheme::EAROLike};
  spec.axis = SweepAxis::FrameInterval;
  spec.values = {5};
  spec.seeds = {1, 2};

  const fs::path dir_a = fs::temp_directory_path() / "cevas_accept_a";
  const fs::path dir_b = fs::temp_directory_path() / "cevas_accept_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  spec.out_dir = dir_a.string();
  run_experiment_to_dir(spec);
  spec.out_dir = dir_b.string();
  run_experiment_to_dir(spec);
  out.require(slurp(dir_a / "results.csv") == slurp(dir_b / "results.csv"),
              "results.csv differs between identical runs");
  out.require(slurp(dir_a / "manifest.json") == slurp(dir_b / "manifest.json"),
              "manifest.json differs between identical runs");
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  if (out.pass) out.detail = "byte-identical results.csv and manifest.json";
  return out;
}

// ---------------------------------------------------------------- 10
Outcome criterion_golden_replay() {
  Outcome out;
  const ReplayReport report = replay_golden(
      fixture("crossing.json"), fixture("golden/crossing_tick5.json"), false);
  out.require(report.ok, report.message);
  if (out.pass) out.detail = report.message;
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"filter policy matches the literal reference on 1000 scenes",
       criterion_filter_oracle_equivalence},
      {"sharing manager dedups and matches with precision/recall >= 0.95",
       criterion_sharing_dedup},
      {"threshold semantics for stationary objects in and out of the overlap",
       criterion_threshold_semantics},
      {"model selection branch coverage", criterion_model_selection_branches},
      {"frame-interval sweep directional trends", criterion_frame_interval_trends},
      {"camera-count sweep directional trends", criterion_camera_count_trends},
      {"calibrated transmission-rate table and ordering",
       criterion_calibrated_rate_trend},
      {"numerical primitives exact and pseudometric", criterion_numerical_primitives},
      {"repeated runs are byte-identical", criterion_run_determinism},
      {"golden trace replays bit-exactly", criterion_golden_replay},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %2zu: %s%s%s\n", out.pass ? "PASS" : "FAIL",
                i + 1, criteria[i].first.c_str(),
                out.detail.empty() ? "" : ": ", out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  if (failures > 0)
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  else
    std::printf("all %zu criteria passed\n", criteria.size());
  return failures == 0 ? 0 : 1;
}
