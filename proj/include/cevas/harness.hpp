#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cevas/pipeline.hpp"

#include <nlohmann/json_fwd.hpp>

namespace cevas {

enum class SweepAxis : std::uint8_t {
  FrameInterval = 0,
  CameraCount = 1,
  TransmissionRate = 2,
};

const char* to_string(SweepAxis axis);
std::optional<SweepAxis> sweep_axis_from_string(const std::string& name);

struct ExperimentSpec {
  std::string scenario_path;
  std::vector<Scheme> schemes;
  SweepAxis axis = SweepAxis::FrameInterval;
  std::vector<double> values;  // strictly increasing
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string out_dir;
  SchemeConfig base_scheme;  // thresholds shared by every scheme
  RunParams base_params;     // link, detector bank, compression, ...
  std::optional<int> block_size;  // scenario override
  std::optional<std::string> detectors_path;
  bool record_filtered = false;  // dump serialized filtered frames per run
  bool dump_sharing = false;     // dump the sharing list per tick per run

  void validate() const;  // throws ConfigError

  static ExperimentSpec from_json(const nlohmann::json& j);
  static ExperimentSpec load(const std::string& path);
  nlohmann::json to_json() const;  // canonical form, hashed into the manifest
};

struct ResultsRow {
  std::string scheme;
  std::string sweep_axis;
  double sweep_value = 0.0;
  std::uint64_t seed = 0;
  std::int64_t camera_frames = 0;
  double mean_iou = 0.0;
  double mean_data_ratio = 0.0;
  double mean_frame_latency = 0.0;
  double mean_tick_latency = 0.0;

  bool operator==(const ResultsRow&) const = default;
};

struct ResultsTable {
  std::vector<ResultsRow> rows;

  bool operator==(const ResultsTable&) const = default;
};

/// Runs every (scheme, sweep value, seed) combination. Sweep points are
/// independent and run on a small worker pool; rows come back in spec
/// order regardless of completion order.
ResultsTable run_experiment(const ExperimentSpec& spec);

/// run_experiment plus artifacts: writes results.csv and manifest.json
/// under spec.out_dir. The manifest is written first marked partial and
/// rewritten complete after the results land, so a crash can never leave
/// unmarked partial output. Reruns with the same spec are byte-identical.
ResultsTable run_experiment_to_dir(const ExperimentSpec& spec);

std::string emit_results_csv(const ResultsTable& table);
ResultsTable parse_results_csv(const std::string& text);

/// Per sweep value, the percentage change of the cevas scheme against
/// every other scheme present, for all three metrics; seeds are
/// aggregated as mean +/- sample standard deviation.
std::string summarize(const ResultsTable& table);

struct CalibrationTargets {
  std::vector<double> rates_mbps = {80, 100, 120, 140, 160};
  std::vector<double> latencies_s = {0.269, 0.263, 0.254, 0.242, 0.227};
};

struct CalibrationResult {
  double fixed_overhead = 0.0;
  double compression = 1.0;
  std::vector<double> predicted;
  std::vector<double> per_cell_error;  // relative, per rate
  double max_error = 0.0;
  bool overhead_clamped = false;
};

/// Fits the link constants so the reference scheme's mean per-frame
/// latency tracks the target (rate, latency) cells: least squares on
/// latency = K + B / rate, with K split into measured compute time plus
/// fixed overhead and B realized through the payload compression factor.
CalibrationResult calibrate_link(const Scene& scene,
                                 const SchemeConfig& reference_scheme,
                                 const RunParams& base_params,
                                 const CalibrationTargets& targets);

/// Stable JSON form of a tick trace; the golden-regression anchor.
nlohmann::json trace_to_json(const TickTrace& trace);

struct ReplayReport {
  bool ok = false;
  bool updated = false;
  std::string message;
};

/// Re-runs the run recorded in a golden trace file and compares the
/// serialized tick trace byte-for-byte. With `update` set, rewrites the
/// golden file from the current implementation instead.
ReplayReport replay_golden(const std::string& scenario_path,
                           const std::string& golden_path, bool update);

/// Writes a golden trace file for `tick` of the given scheme and seed.
void write_golden(const std::string& scenario_path,
                  const std::string& golden_path, Scheme scheme,
                  std::int64_t tick, std::uint64_t seed);

}  // namespace cevas
