#include "cevas/sharing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cevas {

Features extract_features(const BBox& p, const Frame& frame, int patch_height,
                          int patch_width) {
  const Image& img = frame.pixels;
  const auto fp = pixel_footprint(p, img.width, img.height);
  if (fp.width() <= 0 || fp.height() <= 0)
    throw std::invalid_argument("extract_features: box covers no pixels");

  Features f;

  // Color: plain per-channel mean over the footprint pixels.
  double acc[3] = {0, 0, 0};
  for (int py = fp.y0; py < fp.y1; ++py)
    for (int px = fp.x0; px < fp.x1; ++px) {
      const std::uint8_t* v = img.at(px, py);
      acc[0] += v[0];
      acc[1] += v[1];
      acc[2] += v[2];
    }
  const double count = static_cast<double>(fp.pixel_count());
  f.color.v = Eigen::Vector3d(acc[0], acc[1], acc[2]) / (255.0 * count);

  // Patch: area-weighted average pooling of the continuous box rectangle
  // into patch_height x patch_width cells per channel.
  f.patch.channels = 3;
  f.patch.height = patch_height;
  f.patch.width = patch_width;
  const int cells = 3 * patch_height * patch_width;
  f.patch.values = Eigen::VectorXf::Zero(cells);
  const double bx0 = p.x_min * img.width;
  const double bx1 = p.x_max * img.width;
  const double by0 = p.y_min * img.height;
  const double by1 = p.y_max * img.height;
  const double cell_w = (bx1 - bx0) / patch_width;
  const double cell_h = (by1 - by0) / patch_height;
  const double scale = 1.0 / std::sqrt(static_cast<double>(cells));
  for (int cy = 0; cy < patch_height; ++cy) {
    for (int cx = 0; cx < patch_width; ++cx) {
      const double x0 = bx0 + cx * cell_w;
      const double x1 = bx0 + (cx + 1) * cell_w;
      const double y0 = by0 + cy * cell_h;
      const double y1 = by0 + (cy + 1) * cell_h;
      const int px0 = std::max(0, static_cast<int>(std::floor(x0)));
      const int px1 = std::min(img.width, static_cast<int>(std::ceil(x1)));
      const int py0 = std::max(0, static_cast<int>(std::floor(y0)));
      const int py1 = std::min(img.height, static_cast<int>(std::ceil(y1)));
      double sum[3] = {0, 0, 0};
      double wsum = 0.0;
      for (int py = py0; py < py1; ++py) {
        const double wy =
            std::min<double>(py + 1, y1) - std::max<double>(py, y0);
        if (wy <= 0.0) continue;
        for (int px = px0; px < px1; ++px) {
          const double wx =
              std::min<double>(px + 1, x1) - std::max<double>(px, x0);
          if (wx <= 0.0) continue;
          const double w = wx * wy;
          const std::uint8_t* v = img.at(px, py);
          sum[0] += w * v[0];
          sum[1] += w * v[1];
          sum[2] += w * v[2];
          wsum += w;
        }
      }
      if (wsum > 0.0) {
        for (int c = 0; c < 3; ++c) {
          const double value = sum[c] / (255.0 * wsum);
          f.patch.values[c * patch_height * patch_width + cy * patch_width + cx] =
              static_cast<float>(value * scale);
        }
      }
    }
  }
  return f;
}

double feature_distance(const Features& a, const Features& b) {
  if (a.patch.channels != b.patch.channels || a.patch.height != b.patch.height ||
      a.patch.width != b.patch.width ||
      a.patch.values.size() != b.patch.values.size())
    throw std::invalid_argument("feature_distance: patch dimensions differ");
  const double color_term = (a.color.v - b.color.v).norm();
  const double patch_term =
      (a.patch.values - b.patch.values).cast<double>().norm();
  return color_term + patch_term;
}

namespace {

bool same_box(const BBox& a, const BBox& b) {
  return a.x_min == b.x_min && a.y_min == b.y_min && a.x_max == b.x_max &&
         a.y_max == b.y_max;
}

struct WorldRect {
  Eigen::Vector2d lo, hi, center;
};

WorldRect box_to_world(const BBox& box, const CameraModel& camera) {
  WorldRect r;
  r.lo = Eigen::Vector2d(std::numeric_limits<double>::infinity(),
                         std::numeric_limits<double>::infinity());
  r.hi = -r.lo;
  const Eigen::Vector2d corners[4] = {{box.x_min, box.y_min},
                                      {box.x_max, box.y_min},
                                      {box.x_min, box.y_max},
                                      {box.x_max, box.y_max}};
  for (const auto& c : corners) {
    const Eigen::Vector2d w = camera.to_world(c);
    r.lo = r.lo.cwiseMin(w);
    r.hi = r.hi.cwiseMax(w);
  }
  r.center = camera.to_world(box.center());
  return r;
}

}  // namespace

std::vector<MatchEvent> update_sharing(const DetectionResult& result,
                                       const Frame& frame, const RegionMap& map,
                                       SharingList& list, double t_s,
                                       const CameraModel& camera) {
  if (result.camera_id != frame.camera_id || result.tick != frame.tick)
    throw std::invalid_argument("update_sharing: result does not match frame");
  const std::int64_t tick = result.tick;

  // Evict first so stale entries cannot absorb matches.
  std::erase_if(list.objects, [&](const SharingObject& o) {
    return tick - o.last_update_tick > list.staleness_horizon;
  });

  std::vector<MatchEvent> report;
  for (const Detection& det : result.boxes) {
    const BBox& box = det.box;
    if (!bbox_intersects_region(box, map, RegionLabel::Overlapping)) continue;
    const auto fp = pixel_footprint(box, frame.pixels.width, frame.pixels.height);
    if (fp.width() <= 0 || fp.height() <= 0) continue;

    MatchEvent ev;
    ev.camera_id = camera.id;
    ev.tick = tick;
    ev.box = box;

    const Features obs = extract_features(box, frame);
    double s_min = std::numeric_limits<double>::infinity();
    std::size_t best = list.objects.size();
    for (std::size_t i = 0; i < list.objects.size(); ++i) {
      const double s = feature_distance(obs, list.objects[i].features);
      if (s < s_min) {
        s_min = s;
        best = i;
      }
    }
    ev.s_min = list.objects.empty() ? -1.0 : s_min;

    const WorldRect wr = box_to_world(box, camera);
    if (best < list.objects.size() && s_min < t_s) {
      SharingObject& obj = list.objects[best];
      ev.matched = true;
      ev.sharing_id = obj.sharing_id;
      const auto it = obj.last_bbox_per_camera.find(camera.id);
      if (obj.last_update_tick == tick && it != obj.last_bbox_per_camera.end() &&
          it->second.tick == tick && same_box(it->second.box, box)) {
        ev.replay = true;  // identical same-tick update; nothing to do
      } else {
        obj.features.color.v += list.blend * (obs.color.v - obj.features.color.v);
        obj.features.patch.values +=
            static_cast<float>(list.blend) *
            (obs.patch.values - obj.features.patch.values);
        obj.world_position = wr.center;
        obj.world_lo = wr.lo;
        obj.world_hi = wr.hi;
        obj.last_bbox_per_camera[camera.id] = {box, tick};
        obj.last_update_tick = std::max(obj.last_update_tick, tick);
        obj.owner_camera_of_last_update = camera.id;
      }
    } else {
      SharingObject obj;
      obj.sharing_id = list.next_id++;
      obj.features = obs;
      obj.world_position = wr.center;
      obj.world_lo = wr.lo;
      obj.world_hi = wr.hi;
      obj.last_bbox_per_camera[camera.id] = {box, tick};
      obj.last_update_tick = tick;
      obj.owner_camera_of_last_update = camera.id;
      ev.sharing_id = obj.sharing_id;
      list.objects.push_back(std::move(obj));
    }
    report.push_back(ev);
  }
  return report;
}

std::vector<BBox> shared_results_for(const CameraModel& camera,
                                     const RegionMap& map,
                                     const SharingList& list,
                                     std::int64_t tick) {
  std::vector<BBox> out;
  for (const SharingObject& obj : list.objects) {
    if (tick - obj.last_update_tick > list.staleness_horizon) continue;
    const auto it = obj.last_bbox_per_camera.find(camera.id);
    if (it != obj.last_bbox_per_camera.end() && it->second.tick == tick)
      continue;  // the camera already reported this object itself

    // Project the object's ground-plane rectangle into this view.
    BBox box;
    box.x_min = box.y_min = std::numeric_limits<double>::infinity();
    box.x_max = box.y_max = -std::numeric_limits<double>::infinity();
    const Eigen::Vector2d corners[4] = {{obj.world_lo.x(), obj.world_lo.y()},
                                        {obj.world_hi.x(), obj.world_lo.y()},
                                        {obj.world_lo.x(), obj.world_hi.y()},
                                        {obj.world_hi.x(), obj.world_hi.y()}};
    for (const auto& c : corners) {
      const Eigen::Vector2d img = camera.to_image(c);
      box.x_min = std::min(box.x_min, img.x());
      box.y_min = std::min(box.y_min, img.y());
      box.x_max = std::max(box.x_max, img.x());
      box.y_max = std::max(box.y_max, img.y());
    }
    const Eigen::Vector2d center = camera.to_image(obj.world_position);
    if (center.x() < 0.0 || center.x() >= 1.0 || center.y() < 0.0 ||
        center.y() >= 1.0)
      continue;
    const int px = std::min(map.grid.frame_width - 1,
                            static_cast<int>(center.x() * map.grid.frame_width));
    const int py = std::min(map.grid.frame_height - 1,
                            static_cast<int>(center.y() * map.grid.frame_height));
    if (map.at(map.grid.block_of_pixel(px, py)) != RegionLabel::Overlapping)
      continue;

    box.x_min = clamp01(box.x_min);
    box.y_min = clamp01(box.y_min);
    box.x_max = clamp01(box.x_max);
    box.y_max = clamp01(box.y_max);
    if (box.x_max - box.x_min <= 0.0 || box.y_max - box.y_min <= 0.0) continue;
    box.confidence = 1.0;
    out.push_back(box);
  }
  return out;
}

std::vector<std::string> dump_sharing_list(const SharingList& list) {
  std::vector<std::string> lines;
  lines.reserve(list.objects.size());
  for (const SharingObject& obj : list.objects) {
    std::ostringstream os;
    os << "object " << obj.sharing_id << " tick " << obj.last_update_tick
       << " owner " << obj.owner_camera_of_last_update << " world ("
       << obj.world_position.x() << ", " << obj.world_position.y() << ") color ("
       << obj.features.color.v.x() << ", " << obj.features.color.v.y() << ", "
       << obj.features.color.v.z() << ") cameras";
    for (const auto& [cam, o] : obj.last_bbox_per_camera)
      os << " " << cam << "@" << o.tick;
    lines.push_back(os.str());
  }
  return lines;
}

}  // namespace cevas
