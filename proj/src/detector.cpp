#include "cevas/detector.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cevas {

const char* to_string(BoxSource s) {
  switch (s) {
    case BoxSource::Detected: return "detected";
    case BoxSource::Reused: return "reused";
    case BoxSource::Shared: return "shared";
  }
  return "unknown";
}

DetectionResult detect(const DetectorProfile& profile,
                       const FilteredFrame& filtered,
                       std::span<const BBox> truth_in_offload,
                       RandomStream& rng) {
  DetectionResult result;
  result.camera_id = filtered.camera_id;
  result.tick = filtered.tick;
  result.detector_used = profile.name;
  result.inference_latency =
      profile.base_latency +
      profile.per_block_latency * static_cast<double>(filtered.blocks.size());

  for (const BBox& truth : truth_in_offload) {
    if (rng.bernoulli(profile.miss_rate)) continue;
    // Deltas applied to the original coordinates, so a zero-noise tier
    // reproduces the truth bit-exactly.
    const double dx = rng.gaussian(0.0, profile.center_noise_sigma);
    const double dy = rng.gaussian(0.0, profile.center_noise_sigma);
    double dw = rng.gaussian(0.0, profile.size_noise_sigma);
    double dh = rng.gaussian(0.0, profile.size_noise_sigma);
    dw = std::max(dw, 1e-4 - truth.width());
    dh = std::max(dh, 1e-4 - truth.height());
    BBox box;
    box.x_min = clamp01(truth.x_min + dx - 0.5 * dw);
    box.x_max = clamp01(truth.x_max + dx + 0.5 * dw);
    box.y_min = clamp01(truth.y_min + dy - 0.5 * dh);
    box.y_max = clamp01(truth.y_max + dy + 0.5 * dh);
    if (box.x_max - box.x_min <= 0.0 || box.y_max - box.y_min <= 0.0) continue;
    box.object_id = truth.object_id;
    box.confidence = 1.0 - profile.miss_rate;
    result.boxes.push_back({box, BoxSource::Detected});
  }
  return result;
}

const DetectorProfile& DetectorBank::by_name(const std::string& name) const {
  for (const auto& t : tiers)
    if (t.name == name) return t;
  throw ConfigError("detector", "unknown tier \"" + name + "\"");
}

void DetectorBank::validate() const {
  if (tiers.size() < 3)
    throw ConfigError("detector", "bank needs at least 3 tiers");
  for (std::size_t i = 0; i < tiers.size(); ++i) {
    const auto& t = tiers[i];
    const std::string path = "detector.tiers[" + std::to_string(i) + "]";
    if (t.name.empty()) throw ConfigError(path + ".name", "tier name required");
    if (t.base_latency < 0.0 || t.per_block_latency < 0.0)
      throw ConfigError(path, "latencies must be >= 0");
    if (t.center_noise_sigma < 0.0 || t.size_noise_sigma < 0.0)
      throw ConfigError(path, "noise sigmas must be >= 0");
    if (t.miss_rate < 0.0 || t.miss_rate >= 1.0)
      throw ConfigError(path + ".miss_rate", "must be in [0, 1)");
  }
  // Fast -> accurate: latency strictly rises, noise and misses strictly fall.
  for (std::size_t i = 1; i < tiers.size(); ++i) {
    const auto& lo = tiers[i - 1];
    const auto& hi = tiers[i];
    const std::string path = "detector.tiers[" + std::to_string(i) + "]";
    if (!(hi.base_latency > lo.base_latency &&
          hi.per_block_latency > lo.per_block_latency))
      throw ConfigError(path, "latency must increase strictly across tiers");
    if (!(hi.center_noise_sigma < lo.center_noise_sigma &&
          hi.size_noise_sigma < lo.size_noise_sigma &&
          hi.miss_rate < lo.miss_rate))
      throw ConfigError(path, "noise and miss rate must decrease strictly");
  }
}

DetectorBank DetectorBank::defaults() {
  DetectorBank bank;
  bank.tiers = {
      {"fast", 0.010, 0.0020, 0.0008, 0.0005, 0.06},
      {"balanced", 0.030, 0.0024, 0.0004, 0.00025, 0.02},
      {"accurate", 0.034, 0.0037, 0.0002, 0.0001, 0.004},
  };
  bank.validate();
  return bank;
}

DetectorBank DetectorBank::ideal() {
  DetectorBank bank;
  bank.tiers = {
      {"fast", 0.010, 0.0020, 0.0, 0.0, 0.0},
      {"balanced", 0.030, 0.0024, 0.0, 0.0, 0.0},
      {"accurate", 0.034, 0.0037, 0.0, 0.0, 0.0},
  };
  return bank;  // intentionally skips validate(): ties in noise are the point
}

DetectorBank DetectorBank::from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("detector", std::string("JSON parse error: ") + e.what());
  }
  if (!j.contains("tiers") || !j["tiers"].is_array())
    throw ConfigError("detector.tiers", "expected an array of tiers");
  DetectorBank bank;
  for (const auto& tj : j["tiers"]) {
    DetectorProfile p;
    p.name = tj.value("name", std::string());
    p.base_latency = tj.value("base_latency", 0.0);
    p.per_block_latency = tj.value("per_block_latency", 0.0);
    p.center_noise_sigma = tj.value("center_noise_sigma", 0.0);
    p.size_noise_sigma = tj.value("size_noise_sigma", 0.0);
    p.miss_rate = tj.value("miss_rate", 0.0);
    bank.tiers.push_back(p);
  }
  bank.validate();
  return bank;
}

DetectorBank DetectorBank::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open detector calibration file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

double mean_pairwise_iou(const DetectionResult& prev) {
  const std::size_t n = prev.boxes.size();
  if (n < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      sum += iou(prev.boxes[i].box, prev.boxes[j].box);
  return sum / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

const DetectorProfile& select_model(double mean_iou, double t_iou,
                                    const DetectorBank& bank) {
  if (mean_iou == 0.0) return bank.fastest();
  if (mean_iou > t_iou) return bank.most_accurate();
  return bank.middle();
}

}  // namespace cevas
