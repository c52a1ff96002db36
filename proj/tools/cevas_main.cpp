// Command-line front end: experiment runner, golden-trace replay, link
// calibration, and scenario linting.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cevas/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitCheckFailed = 2;

struct RunOptions {
  std::string spec_path;
  std::string scenario;
  std::vector<std::string> schemes;
  std::string sweep_axis;
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;
  std::string out_dir;
  int block_size = 0;
  double t_new = -1.0;
  double t_dis = -1.0;
  double t_iou = -1.0;
  double t_s = -1.0;
  double rate = -1.0;
  double overhead = -1.0;
  double compression = -1.0;
  int frame_interval = 0;
  std::string detectors;
  std::string fixed_tier;
  bool print_summary = false;
  bool record_filtered = false;
  bool dump_sharing = false;
};

cevas::ExperimentSpec build_spec(const RunOptions& opt) {
  cevas::ExperimentSpec spec;
  if (!opt.spec_path.empty()) spec = cevas::ExperimentSpec::load(opt.spec_path);

  if (!opt.scenario.empty()) spec.scenario_path = opt.scenario;
  if (!opt.schemes.empty()) {
    spec.schemes.clear();
    for (const auto& name : opt.schemes) {
      const auto s = cevas::scheme_from_string(name);
      if (!s) throw cevas::ConfigError("--scheme", "unknown scheme \"" + name + "\"");
      spec.schemes.push_back(*s);
    }
  }
  if (!opt.sweep_axis.empty()) {
    const auto axis = cevas::sweep_axis_from_string(opt.sweep_axis);
    if (!axis)
      throw cevas::ConfigError("--sweep", "unknown axis \"" + opt.sweep_axis + "\"");
    spec.axis = *axis;
  }
  if (!opt.values.empty()) spec.values = opt.values;
  if (spec.values.empty()) spec.values = {1};  // single-point run
  if (spec.schemes.empty()) spec.schemes = {cevas::Scheme::CEVAS};
  if (!opt.seeds.empty()) spec.seeds = opt.seeds;
  if (!opt.out_dir.empty()) spec.out_dir = opt.out_dir;
  if (opt.block_size > 0) spec.block_size = opt.block_size;
  if (opt.t_new >= 0.0) spec.base_scheme.t_new = opt.t_new;
  if (opt.t_dis >= 0.0) spec.base_scheme.t_dis = opt.t_dis;
  if (opt.t_iou >= 0.0) spec.base_scheme.t_iou = opt.t_iou;
  if (opt.t_s >= 0.0) spec.base_scheme.t_s = opt.t_s;
  if (opt.rate > 0.0) spec.base_params.link.rate_mbps = opt.rate;
  if (opt.overhead >= 0.0) spec.base_params.link.fixed_overhead = opt.overhead;
  if (opt.compression > 0.0)
    spec.base_params.filter_opts.compression = opt.compression;
  if (opt.frame_interval > 0) spec.base_scheme.frame_interval = opt.frame_interval;
  if (!opt.detectors.empty()) spec.detectors_path = opt.detectors;
  if (!opt.fixed_tier.empty()) spec.base_scheme.fixed_tier = opt.fixed_tier;
  if (opt.record_filtered) spec.record_filtered = true;
  if (opt.dump_sharing) spec.dump_sharing = true;
  spec.validate();
  return spec;
}

int cmd_run(const RunOptions& opt) {
  const cevas::ExperimentSpec spec = build_spec(opt);
  const cevas::ResultsTable table = cevas::run_experiment_to_dir(spec);
  std::string out_dir = spec.out_dir;
  if (out_dir.empty()) {
    const char* env = std::getenv("CEVAS_OUT_DIR");
    out_dir = env ? env : "results";
  }
  std::cout << table.rows.size() << " rows written to " << out_dir
            << "/results.csv\n";
  if (opt.print_summary) std::cout << cevas::summarize(table);
  return kExitOk;
}

int cmd_replay(const std::string& scenario, const std::string& golden,
               bool update) {
  const cevas::ReplayReport report = cevas::replay_golden(scenario, golden, update);
  std::cout << report.message << "\n";
  return report.ok ? kExitOk : kExitCheckFailed;
}

int cmd_calibrate(const std::string& scenario, std::vector<double> rates,
                  std::vector<double> targets, const std::string& out_path) {
  cevas::CalibrationTargets t;
  if (!rates.empty() || !targets.empty()) {
    if (rates.size() != targets.size())
      throw cevas::ConfigError("--rates/--targets", "lengths differ");
    t.rates_mbps = rates;
    t.latencies_s = targets;
  }
  const cevas::Scene scene = cevas::load_scene(scenario);
  cevas::SchemeConfig reference;
  reference.scheme = cevas::Scheme::EAROLike;
  cevas::RunParams params;
  params.seed = scene.seed;
  const cevas::CalibrationResult result =
      cevas::calibrate_link(scene, reference, params, t);

  nlohmann::json j;
  j["fixed_overhead"] = result.fixed_overhead;
  j["compression"] = result.compression;
  j["max_error"] = result.max_error;
  j["per_cell_error"] = result.per_cell_error;
  j["predicted"] = result.predicted;
  j["overhead_clamped"] = result.overhead_clamped;
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << j.dump(2) << '\n';
  }
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_validate(const std::string& scenario) {
  const cevas::Scene scene = cevas::load_scene(scenario);
  int warnings = 0;
  for (const auto& cam : scene.cameras) {
    const auto map =
        cevas::partition(cam, scene.world_overlap, scene.lanes, scene.grid(cam));
    const auto hist = map.histogram();
    if (!scene.world_overlap.empty() && hist[3] == 0) {
      std::cout << "warning: camera " << cam.id
                << " sees no overlapping region\n";
      ++warnings;
    }
  }
  for (const auto& v : scene.vehicles) {
    bool visible = false;
    for (const auto& cam : scene.cameras) {
      for (std::int64_t tick = 0; tick < scene.horizon_ticks && !visible; ++tick) {
        const double t = tick * scene.tick_seconds(cam);
        const auto img = cam.to_image(v.position(t));
        if (img.x() > -0.2 && img.x() < 1.2 && img.y() > -0.2 && img.y() < 1.2)
          visible = true;
      }
      if (visible) break;
    }
    if (!visible) {
      std::cout << "warning: vehicle " << v.id
                << " never comes near any camera's view\n";
      ++warnings;
    }
  }
  std::cout << "scenario \"" << scene.name << "\": " << scene.cameras.size()
            << " cameras, " << scene.vehicles.size() << " vehicles, "
            << scene.horizon_ticks << " ticks, " << warnings << " warning(s)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cooperative multi-camera perception simulator"};
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "run an experiment sweep");
  run->add_option("--spec", run_opt.spec_path, "experiment spec JSON file");
  run->add_option("--scenario", run_opt.scenario, "scenario config file");
  run->add_option("--scheme", run_opt.schemes, "schemes to run")
      ->delimiter(',');
  run->add_option("--sweep", run_opt.sweep_axis,
                  "sweep axis: frame_interval|camera_count|transmission_rate");
  run->add_option("--values", run_opt.values, "sweep values")->delimiter(',');
  run->add_option("--seeds", run_opt.seeds, "seeds")->delimiter(',');
  run->add_option("--out", run_opt.out_dir,
                  "output directory (default $CEVAS_OUT_DIR or ./results)");
  run->add_option("--block-size", run_opt.block_size, "block size in pixels");
  run->add_option("--t-new", run_opt.t_new, "new-object pixel threshold");
  run->add_option("--t-dis", run_opt.t_dis, "motion distance threshold");
  run->add_option("--t-iou", run_opt.t_iou, "model selection threshold");
  run->add_option("--t-s", run_opt.t_s, "feature distance threshold");
  run->add_option("--rate", run_opt.rate, "link rate, Mbit/s");
  run->add_option("--overhead", run_opt.overhead, "fixed link overhead, s");
  run->add_option("--compression", run_opt.compression, "payload scale factor");
  run->add_option("--frame-interval", run_opt.frame_interval,
                  "process one tick in every n");
  run->add_option("--detectors", run_opt.detectors, "detector calibration file");
  run->add_option("--fixed-tier", run_opt.fixed_tier,
                  "detector tier for the noselect scheme");
  run->add_flag("--summary", run_opt.print_summary, "print comparison summary");
  run->add_flag("--record-filtered", run_opt.record_filtered,
                "dump serialized filtered frames under <out>/trace");
  run->add_flag("--dump-sharing", run_opt.dump_sharing,
                "dump the sharing list per tick under <out>/trace");

  std::string replay_scenario, replay_golden_path;
  bool replay_update = false;
  auto* replay = app.add_subcommand("replay", "check a golden trace");
  replay->add_option("--scenario", replay_scenario, "scenario config file")
      ->required();
  replay->add_option("--golden", replay_golden_path, "golden trace file")
      ->required();
  replay->add_flag("--update", replay_update, "rewrite the golden file");

  std::string cal_scenario, cal_out;
  std::vector<double> cal_rates, cal_targets;
  auto* calibrate = app.add_subcommand("calibrate", "fit link constants");
  calibrate->add_option("--scenario", cal_scenario, "scenario config file")
      ->required();
  calibrate->add_option("--rates", cal_rates, "target rates, Mbit/s")
      ->delimiter(',');
  calibrate->add_option("--targets", cal_targets, "target latencies, s")
      ->delimiter(',');
  calibrate->add_option("--out", cal_out, "write fitted constants to file");

  std::string validate_scenario;
  auto* validate = app.add_subcommand("validate", "lint a scenario config");
  validate->add_option("--scenario", validate_scenario, "scenario config file")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opt);
    if (replay->parsed())
      return cmd_replay(replay_scenario, replay_golden_path, replay_update);
    if (calibrate->parsed())
      return cmd_calibrate(cal_scenario, cal_rates, cal_targets, cal_out);
    if (validate->parsed()) return cmd_validate(validate_scenario);
  } catch (const cevas::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitOk;
}
