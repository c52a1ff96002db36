#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cevas/filter.hpp"
#include "cevas/geometry.hpp"

namespace cevas {

/// One detection backend tier. Tiers trade accuracy for speed: a faster
/// tier has lower latency and higher noise and miss rate.
struct DetectorProfile {
  std::string name;
  double base_latency = 0.0;       // seconds per invocation
  double per_block_latency = 0.0;  // seconds per offloaded block
  double center_noise_sigma = 0.0;  // normalized std-dev of center jitter
  double size_noise_sigma = 0.0;    // normalized std-dev of size jitter
  double miss_rate = 0.0;           // probability of dropping a visible object
};

enum class BoxSource : std::uint8_t { Detected = 0, Reused = 1, Shared = 2 };

const char* to_string(BoxSource s);

struct Detection {
  BBox box;
  BoxSource source = BoxSource::Detected;
};

struct DetectionResult {
  int camera_id = 0;
  std::int64_t tick = 0;
  std::vector<Detection> boxes;
  std::string detector_used;
  double inference_latency = 0.0;  // seconds, modeled
};

/// Synthetic detection: every ground-truth box visible in the offloaded
/// content is independently dropped with miss_rate, otherwise perturbed
/// by Gaussian center/size noise and clamped. Latency is
/// base + per_block * |offloaded blocks|. Deterministic for a fixed rng.
///
/// The caller restricts `truth_in_offload` to objects whose ground-truth
/// box overlaps at least half its area with the offloaded blocks; only
/// offloaded content is detectable.
DetectionResult detect(const DetectorProfile& profile,
                       const FilteredFrame& filtered,
                       std::span<const BBox> truth_in_offload,
                       RandomStream& rng);

/// Detection backend interface; the synthetic model above is the default
/// implementation, and external backends can slot in behind it.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual const DetectorProfile& profile() const = 0;
  virtual DetectionResult run(const FilteredFrame& filtered,
                              std::span<const BBox> truth_in_offload,
                              RandomStream& rng) const = 0;
};

class SyntheticDetector final : public Detector {
 public:
  explicit SyntheticDetector(DetectorProfile profile)
      : profile_(std::move(profile)) {}
  const DetectorProfile& profile() const override { return profile_; }
  DetectionResult run(const FilteredFrame& filtered,
                      std::span<const BBox> truth_in_offload,
                      RandomStream& rng) const override {
    return detect(profile_, filtered, truth_in_offload, rng);
  }

 private:
  DetectorProfile profile_;
};

/// Ordered bank of tiers, fastest first. Construction validates the
/// strict orderings that make tier selection meaningful.
struct DetectorBank {
  std::vector<DetectorProfile> tiers;

  const DetectorProfile& fastest() const { return tiers.front(); }
  const DetectorProfile& most_accurate() const { return tiers.back(); }
  const DetectorProfile& middle() const { return tiers[tiers.size() / 2]; }
  const DetectorProfile& by_name(const std::string& name) const;

  void validate() const;  // throws ConfigError on violated orderings

  static DetectorBank defaults();
  static DetectorBank from_json(const std::string& json_text);
  static DetectorBank load(const std::string& path);

  /// A bank with zero noise and zero misses at every tier; for isolating
  /// policy behavior from detection noise.
  static DetectorBank ideal();
};

/// Mean IoU over all unordered box pairs of the previous result; 0 when
/// fewer than two boxes. Computed over the full merged result (detected,
/// reused and shared boxes alike).
double mean_pairwise_iou(const DetectionResult& prev);

/// Content-aware tier choice: crowding 0 selects the fastest tier,
/// crowding above t_iou the most accurate, anything else the middle.
const DetectorProfile& select_model(double mean_iou, double t_iou,
                                    const DetectorBank& bank);

}  // namespace cevas
