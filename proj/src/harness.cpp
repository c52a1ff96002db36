#include "cevas/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace cevas {

using nlohmann::json;

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::FrameInterval: return "frame_interval";
    case SweepAxis::CameraCount: return "camera_count";
    case SweepAxis::TransmissionRate: return "transmission_rate";
  }
  return "unknown";
}

std::optional<SweepAxis> sweep_axis_from_string(const std::string& name) {
  if (name == "frame_interval") return SweepAxis::FrameInterval;
  if (name == "camera_count") return SweepAxis::CameraCount;
  if (name == "transmission_rate") return SweepAxis::TransmissionRate;
  return std::nullopt;
}

void ExperimentSpec::validate() const {
  if (scenario_path.empty()) throw ConfigError("scenario", "required");
  if (schemes.empty()) throw ConfigError("schemes", "at least one scheme");
  if (values.empty()) throw ConfigError("sweep.values", "at least one value");
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] <= values[i - 1])
      throw ConfigError("sweep.values", "must be strictly increasing");
  if (seeds.empty()) throw ConfigError("seeds", "at least one seed");
  if (axis != SweepAxis::FrameInterval && base_scheme.frame_interval < 1)
    throw ConfigError("frame_interval", "must be >= 1");
  base_scheme.validate();
  if (block_size && *block_size <= 0)
    throw ConfigError("block_size", "must be positive");
}

ExperimentSpec ExperimentSpec::from_json(const json& j) {
  ExperimentSpec spec;
  if (!j.is_object()) throw ConfigError("", "experiment spec must be an object");
  spec.scenario_path = j.value("scenario", std::string());
  if (j.contains("schemes")) {
    for (const auto& s : j["schemes"]) {
      const auto scheme = scheme_from_string(s.get<std::string>());
      if (!scheme)
        throw ConfigError("schemes", "unknown scheme \"" + s.get<std::string>() + "\"");
      spec.schemes.push_back(*scheme);
    }
  }
  if (j.contains("sweep")) {
    const auto& sw = j["sweep"];
    const std::string axis_name = sw.value("axis", std::string("frame_interval"));
    const auto axis = sweep_axis_from_string(axis_name);
    if (!axis) throw ConfigError("sweep.axis", "unknown axis \"" + axis_name + "\"");
    spec.axis = *axis;
    if (sw.contains("values"))
      for (const auto& v : sw["values"]) spec.values.push_back(v.get<double>());
  }
  if (j.contains("seeds")) {
    spec.seeds.clear();
    for (const auto& s : j["seeds"]) spec.seeds.push_back(s.get<std::uint64_t>());
  }
  spec.out_dir = j.value("out_dir", std::string());
  if (j.contains("thresholds")) {
    const auto& th = j["thresholds"];
    spec.base_scheme.t_dis = th.value("t_dis", spec.base_scheme.t_dis);
    if (th.contains("t_new") && !th["t_new"].is_null())
      spec.base_scheme.t_new = th["t_new"].get<double>();
    spec.base_scheme.t_iou = th.value("t_iou", spec.base_scheme.t_iou);
    spec.base_scheme.t_s = th.value("t_s", spec.base_scheme.t_s);
  }
  spec.base_scheme.frame_interval = j.value("frame_interval", 1);
  if (j.contains("fixed_tier"))
    spec.base_scheme.fixed_tier = j["fixed_tier"].get<std::string>();
  spec.base_scheme.include_shared_in_prev =
      j.value("include_shared_in_prev", true);
  spec.base_scheme.staleness_horizon =
      j.value("staleness_horizon", spec.base_scheme.staleness_horizon);
  if (j.contains("link")) {
    spec.base_params.link.rate_mbps =
        j["link"].value("rate_mbps", spec.base_params.link.rate_mbps);
    spec.base_params.link.fixed_overhead =
        j["link"].value("fixed_overhead", spec.base_params.link.fixed_overhead);
  }
  spec.base_params.filter_opts.compression =
      j.value("compression", spec.base_params.filter_opts.compression);
  spec.base_params.filter_unit_seconds =
      j.value("filter_unit_seconds", spec.base_params.filter_unit_seconds);
  if (j.contains("block_size")) spec.block_size = j["block_size"].get<int>();
  if (j.contains("detectors"))
    spec.detectors_path = j["detectors"].get<std::string>();
  spec.record_filtered = j.value("record_filtered", false);
  spec.dump_sharing = j.value("dump_sharing", false);
  spec.validate();
  return spec;
}

ExperimentSpec ExperimentSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open experiment spec");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(path, std::string("JSON parse error: ") + e.what());
  }
  return from_json(j);
}

json ExperimentSpec::to_json() const {
  json j;
  j["scenario"] = scenario_path;
  json schemes_j = json::array();
  for (const Scheme s : schemes) schemes_j.push_back(to_string(s));
  j["schemes"] = schemes_j;
  j["sweep"] = {{"axis", to_string(axis)}, {"values", values}};
  j["seeds"] = seeds;
  j["thresholds"] = {{"t_dis", base_scheme.t_dis},
                     {"t_iou", base_scheme.t_iou},
                     {"t_s", base_scheme.t_s}};
  if (base_scheme.t_new) j["thresholds"]["t_new"] = *base_scheme.t_new;
  j["frame_interval"] = base_scheme.frame_interval;
  if (base_scheme.fixed_tier) j["fixed_tier"] = *base_scheme.fixed_tier;
  j["include_shared_in_prev"] = base_scheme.include_shared_in_prev;
  j["staleness_horizon"] = base_scheme.staleness_horizon;
  j["link"] = {{"rate_mbps", base_params.link.rate_mbps},
               {"fixed_overhead", base_params.link.fixed_overhead}};
  j["compression"] = base_params.filter_opts.compression;
  j["filter_unit_seconds"] = base_params.filter_unit_seconds;
  if (block_size) j["block_size"] = *block_size;
  if (detectors_path) j["detectors"] = *detectors_path;
  if (record_filtered) j["record_filtered"] = true;
  if (dump_sharing) j["dump_sharing"] = true;
  return j;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError(what, "not a number: \"" + s + "\"");
  return v;
}

struct RunPoint {
  Scheme scheme;
  double value;
  std::uint64_t seed;
};

std::string resolved_out_dir(const ExperimentSpec& spec) {
  if (!spec.out_dir.empty()) return spec.out_dir;
  const char* env = std::getenv("CEVAS_OUT_DIR");
  return env ? env : "results";
}

}  // namespace

ResultsTable run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  Scene scene = load_scene(spec.scenario_path);
  if (spec.block_size) scene.block_size = *spec.block_size;

  for (const double v : spec.values) {
    if ((spec.axis == SweepAxis::FrameInterval ||
         spec.axis == SweepAxis::CameraCount) &&
        (v != std::floor(v) || v < 1))
      throw ConfigError("sweep.values", "expected positive integers");
    if (spec.axis == SweepAxis::CameraCount &&
        v > static_cast<double>(scene.cameras.size()))
      throw ConfigError("sweep.values",
                        "camera count exceeds cameras in the scenario");
  }

  DetectorBank bank = spec.detectors_path ? DetectorBank::load(*spec.detectors_path)
                                          : spec.base_params.bank;

  std::vector<RunPoint> points;
  for (const Scheme scheme : spec.schemes)
    for (const double value : spec.values)
      for (const std::uint64_t seed : spec.seeds)
        points.push_back({scheme, value, seed});

  std::vector<ResultsRow> rows(points.size());

  const auto run_point = [&](std::size_t i) {
    const RunPoint& pt = points[i];
    SchemeConfig scheme = spec.base_scheme;
    scheme.scheme = pt.scheme;
    if (pt.scheme == Scheme::NoSelect && !scheme.fixed_tier)
      scheme.fixed_tier = bank.most_accurate().name;
    if (pt.scheme != Scheme::NoSelect) scheme.fixed_tier.reset();
    RunParams params = spec.base_params;
    params.bank = bank;
    params.seed = pt.seed;
    if (spec.record_filtered || spec.dump_sharing) {
      const std::string tag = std::string(to_string(pt.scheme)) + "-" +
                              format_double(pt.value) + "-" +
                              std::to_string(pt.seed);
      const auto trace_dir =
          std::filesystem::path(resolved_out_dir(spec)) / "trace";
      if (spec.record_filtered)
        params.record_filtered_dir = (trace_dir / tag).string();
      if (spec.dump_sharing)
        params.sharing_log_path = (trace_dir / (tag + "-sharing.log")).string();
    }
    switch (spec.axis) {
      case SweepAxis::FrameInterval:
        scheme.frame_interval = static_cast<int>(pt.value);
        break;
      case SweepAxis::CameraCount:
        params.camera_count = static_cast<int>(pt.value);
        break;
      case SweepAxis::TransmissionRate:
        params.link.rate_mbps = pt.value;
        break;
    }

    const ScenarioResult res = run_scenario(scene, scheme, params);
    ResultsRow& row = rows[i];
    row.scheme = to_string(pt.scheme);
    row.sweep_axis = to_string(spec.axis);
    row.sweep_value = pt.value;
    row.seed = pt.seed;
    row.camera_frames = res.metrics.camera_frames;
    row.mean_iou = res.metrics.mean_iou;
    row.mean_data_ratio = res.metrics.mean_data_ratio;
    row.mean_frame_latency = res.metrics.mean_frame_latency;
    row.mean_tick_latency = res.metrics.mean_tick_latency;
  };

  // Sweep points are independent; rows land in slot order no matter
  // which worker finishes first.
  std::atomic<std::size_t> cursor{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= points.size()) return;
      try {
        run_point(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_workers = std::min<std::size_t>(hw, points.size());
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i + 1 < n_workers; ++i) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);

  ResultsTable table;
  table.rows = std::move(rows);  // already in spec order
  return table;
}

std::string emit_results_csv(const ResultsTable& table) {
  std::ostringstream os;
  os << "scheme,sweep_axis,sweep_value,seed,camera_frames,mean_iou,"
        "mean_data_ratio,mean_frame_latency_s,mean_tick_latency_s\n";
  for (const ResultsRow& r : table.rows) {
    os << r.scheme << ',' << r.sweep_axis << ',' << format_double(r.sweep_value)
       << ',' << r.seed << ',' << r.camera_frames << ','
       << format_double(r.mean_iou) << ',' << format_double(r.mean_data_ratio)
       << ',' << format_double(r.mean_frame_latency) << ','
       << format_double(r.mean_tick_latency) << '\n';
  }
  return os.str();
}

ResultsTable parse_results_csv(const std::string& text) {
  ResultsTable table;
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("results", "empty file");
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9)
      throw ConfigError("results:" + std::to_string(line_no),
                        "expected 9 columns");
    ResultsRow r;
    r.scheme = cells[0];
    r.sweep_axis = cells[1];
    r.sweep_value = parse_double(cells[2], "sweep_value");
    r.seed = static_cast<std::uint64_t>(
        parse_double(cells[3], "seed"));
    r.camera_frames =
        static_cast<std::int64_t>(parse_double(cells[4], "camera_frames"));
    r.mean_iou = parse_double(cells[5], "mean_iou");
    r.mean_data_ratio = parse_double(cells[6], "mean_data_ratio");
    r.mean_frame_latency = parse_double(cells[7], "mean_frame_latency_s");
    r.mean_tick_latency = parse_double(cells[8], "mean_tick_latency_s");
    table.rows.push_back(r);
  }
  return table;
}

ResultsTable run_experiment_to_dir(const ExperimentSpec& spec) {
  spec.validate();
  namespace fs = std::filesystem;
  const std::string out_dir = resolved_out_dir(spec);
  fs::create_directories(out_dir);

  const json spec_json = spec.to_json();
  const std::uint64_t spec_hash = fnv1a(spec_json.dump());

  json manifest;
  manifest["version"] = kVersion;
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(spec_hash));
  manifest["spec_hash"] = hash_hex;
  manifest["seeds"] = spec.seeds;
  manifest["complete"] = false;
  const auto manifest_path = fs::path(out_dir) / "manifest.json";
  {
    std::ofstream out(manifest_path);
    out << manifest.dump(2) << '\n';
  }

  const ResultsTable table = run_experiment(spec);
  {
    std::ofstream out(fs::path(out_dir) / "results.csv", std::ios::binary);
    out << emit_results_csv(table);
  }
  manifest["complete"] = true;
  manifest["rows"] = table.rows.size();
  {
    std::ofstream out(manifest_path);
    out << manifest.dump(2) << '\n';
  }
  return table;
}

namespace {

struct Aggregate {
  double iou = 0, ratio = 0, latency = 0, tick_latency = 0;
  double iou_sq = 0;
  int n = 0;

  void add(const ResultsRow& r) {
    iou += r.mean_iou;
    iou_sq += r.mean_iou * r.mean_iou;
    ratio += r.mean_data_ratio;
    latency += r.mean_frame_latency;
    tick_latency += r.mean_tick_latency;
    ++n;
  }
  double mean_iou() const { return iou / n; }
  double mean_ratio() const { return ratio / n; }
  double mean_latency() const { return latency / n; }
  double iou_std() const {
    if (n < 2) return 0.0;
    const double m = mean_iou();
    return std::sqrt(std::max(0.0, (iou_sq - n * m * m) / (n - 1)));
  }
};

double delta_pct(double ours, double base) {
  if (base == 0.0) return 0.0;
  return (ours - base) / base * 100.0;
}

}  // namespace

std::string summarize(const ResultsTable& table) {
  if (table.rows.empty()) throw ConfigError("results", "empty table");
  // (scheme, value) -> aggregate over seeds
  std::map<std::pair<std::string, double>, Aggregate> agg;
  std::vector<double> values;
  std::vector<std::string> schemes;
  for (const ResultsRow& r : table.rows) {
    agg[{r.scheme, r.sweep_value}].add(r);
    if (std::find(values.begin(), values.end(), r.sweep_value) == values.end())
      values.push_back(r.sweep_value);
    if (std::find(schemes.begin(), schemes.end(), r.scheme) == schemes.end())
      schemes.push_back(r.scheme);
  }
  if (std::find(schemes.begin(), schemes.end(), "cevas") == schemes.end())
    throw ConfigError("results", "no cevas rows to compare against");
  if (schemes.size() < 2)
    throw ConfigError("results", "no baseline rows to compare against");

  std::ostringstream os;
  os << "axis: " << table.rows.front().sweep_axis << "\n";
  for (const double v : values) {
    const Aggregate& ours = agg.at({"cevas", v});
    os << "value " << format_double(v) << ": cevas iou "
       << format_double(ours.mean_iou()) << " +/- "
       << format_double(ours.iou_std()) << ", ratio "
       << format_double(ours.mean_ratio()) << ", latency "
       << format_double(ours.mean_latency()) << "s\n";
    for (const std::string& s : schemes) {
      if (s == "cevas") continue;
      const auto it = agg.find({s, v});
      if (it == agg.end())
        throw ConfigError("results", "missing rows for scheme \"" + s +
                                         "\" at value " + format_double(v));
      const Aggregate& base = it->second;
      char line[256];
      std::snprintf(line, sizeof(line),
                    "  vs %-11s iou %+7.2f%%  data %+7.2f%%  latency %+7.2f%%\n",
                    s.c_str(), delta_pct(ours.mean_iou(), base.mean_iou()),
                    delta_pct(ours.mean_ratio(), base.mean_ratio()),
                    delta_pct(ours.mean_latency(), base.mean_latency()));
      os << line;
    }
  }
  return os.str();
}

CalibrationResult calibrate_link(const Scene& scene,
                                 const SchemeConfig& reference_scheme,
                                 const RunParams& base_params,
                                 const CalibrationTargets& targets) {
  if (targets.rates_mbps.size() != targets.latencies_s.size() ||
      targets.rates_mbps.size() < 2)
    throw ConfigError("calibrate", "need >= 2 (rate, latency) target cells");

  // Reference run with a neutral link to measure compute time and payload.
  RunParams probe = base_params;
  probe.link = LinkModel{1.0, 0.0};
  probe.filter_opts.compression = 1.0;
  const ScenarioResult res = run_scenario(scene, reference_scheme, probe);

  double payload_sum = 0.0, compute_sum = 0.0;
  std::int64_t frames = 0;
  for (const TickTrace& t : res.traces)
    for (const CameraTickTrace& ct : t.cameras) {
      payload_sum += static_cast<double>(ct.filter.filtered_payload_bytes);
      compute_sum += ct.latency.filter_time + ct.latency.inference_time;
      ++frames;
    }
  if (frames == 0 || payload_sum <= 0.0)
    throw ConfigError("calibrate", "reference run produced no payload");
  const double mean_payload = payload_sum / frames;
  const double mean_compute = compute_sum / frames;

  // Least squares for latency(r) = K + B/r.
  const std::size_t n = targets.rates_mbps.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = 1.0 / targets.rates_mbps[i];
    const double y = targets.latencies_s[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-30)
    throw ConfigError("calibrate", "degenerate rate targets");
  const double slope = (n * sxy - sx * sy) / denom;  // B, seconds * Mbit/s
  const double intercept = (sy - slope * sx) / n;    // K, seconds

  CalibrationResult out;
  out.compression = slope * 1e6 / (8.0 * mean_payload);
  out.fixed_overhead = intercept - mean_compute;
  if (out.fixed_overhead < 0.0) {
    out.fixed_overhead = 0.0;
    out.overhead_clamped = true;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double pred = mean_compute + out.fixed_overhead +
                        8.0 * mean_payload * out.compression /
                            (targets.rates_mbps[i] * 1e6);
    out.predicted.push_back(pred);
    const double err =
        std::abs(pred - targets.latencies_s[i]) / targets.latencies_s[i];
    out.per_cell_error.push_back(err);
    out.max_error = std::max(out.max_error, err);
  }
  return out;
}

namespace {

json box_to_json(const BBox& b) {
  json j;
  j["rect"] = {b.x_min, b.y_min, b.x_max, b.y_max};
  j["confidence"] = b.confidence;
  if (b.object_id) j["object_id"] = *b.object_id;
  return j;
}

json boxes_to_json(const std::vector<BBox>& boxes) {
  json arr = json::array();
  for (const BBox& b : boxes) arr.push_back(box_to_json(b));
  return arr;
}

}  // namespace

json trace_to_json(const TickTrace& trace) {
  json j;
  j["tick"] = trace.tick;
  j["live_sharing_objects"] = trace.live_sharing_objects;
  json cams = json::array();
  for (const CameraTickTrace& ct : trace.cameras) {
    json c;
    c["camera_id"] = ct.camera_id;
    c["detector"] = ct.detector_used;
    c["offload_blocks"] = ct.filter.offload_blocks;
    c["reused"] = boxes_to_json(ct.filter.reused_results);
    c["offload_boxes"] = boxes_to_json(ct.filter.offload_boxes);
    c["dropped_boxes"] = ct.filter.dropped_boxes;
    c["payload_bytes"] = ct.filter.filtered_payload_bytes;
    c["filter_cost"] = ct.filter.filter_compute_cost;
    json merged = json::array();
    for (const Detection& d : ct.merged) {
      json m = box_to_json(d.box);
      m["source"] = to_string(d.source);
      merged.push_back(m);
    }
    c["merged"] = merged;
    c["latency"] = {{"filter", ct.latency.filter_time},
                    {"tx", ct.latency.tx_time},
                    {"inference", ct.latency.inference_time},
                    {"total", ct.latency.total}};
    c["frame_iou"] = ct.frame_iou;
    c["data_ratio"] = ct.data_ratio;
    c["truth_count"] = ct.truth_count;
    cams.push_back(c);
  }
  j["cameras"] = cams;
  json events = json::array();
  for (const MatchEvent& ev : trace.match_events) {
    json e;
    e["camera_id"] = ev.camera_id;
    e["box"] = box_to_json(ev.box);
    e["matched"] = ev.matched;
    e["replay"] = ev.replay;
    e["sharing_id"] = ev.sharing_id;
    e["s_min"] = ev.s_min;
    events.push_back(e);
  }
  j["match_events"] = events;
  return j;
}

namespace {

json golden_document(const Scene& scene, const std::string& scenario_name,
                     Scheme scheme, std::int64_t tick, std::uint64_t seed) {
  SchemeConfig config;
  config.scheme = scheme;
  RunParams params;
  params.seed = seed;
  Pipeline pipeline(scene, config, params);
  TickTrace trace;
  for (std::int64_t t = 0; t <= tick; ++t) trace = pipeline.run_tick(t);

  json doc;
  doc["scenario"] = scenario_name;
  doc["scheme"] = to_string(scheme);
  doc["seed"] = seed;
  doc["tick"] = tick;
  doc["trace"] = trace_to_json(trace);
  return doc;
}

}  // namespace

void write_golden(const std::string& scenario_path,
                  const std::string& golden_path, Scheme scheme,
                  std::int64_t tick, std::uint64_t seed) {
  const Scene scene = load_scene(scenario_path);
  const json doc = golden_document(scene, scene.name, scheme, tick, seed);
  std::ofstream out(golden_path, std::ios::binary);
  if (!out) throw ConfigError(golden_path, "cannot write golden file");
  out << doc.dump(1) << '\n';
}

ReplayReport replay_golden(const std::string& scenario_path,
                           const std::string& golden_path, bool update) {
  ReplayReport report;
  const Scene scene = load_scene(scenario_path);
  if (update) {
    write_golden(scenario_path, golden_path, Scheme::CEVAS, 5, scene.seed);
    report.ok = true;
    report.updated = true;
    report.message = "golden file rewritten";
    return report;
  }
  std::ifstream in(golden_path, std::ios::binary);
  if (!in) throw ConfigError(golden_path, "cannot open golden file");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string recorded = ss.str();

  json doc;
  try {
    doc = json::parse(recorded);
  } catch (const json::parse_error& e) {
    throw ConfigError(golden_path, std::string("JSON parse error: ") + e.what());
  }
  const auto scheme = scheme_from_string(doc.value("scheme", std::string("cevas")));
  if (!scheme) throw ConfigError(golden_path, "unknown scheme in golden file");
  const std::int64_t tick = doc.value("tick", std::int64_t{0});
  const std::uint64_t seed = doc.value("seed", scene.seed);

  const json current =
      golden_document(scene, doc.value("scenario", scene.name), *scheme, tick, seed);
  const std::string produced = current.dump(1) + '\n';
  if (produced == recorded) {
    report.ok = true;
    report.message = "trace matches golden file";
  } else {
    report.ok = false;
    report.message = "trace differs from golden file";
  }
  return report;
}

}  // namespace cevas
