#include "cevas/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

namespace cevas {

using nlohmann::json;

Eigen::Vector2d Vehicle::position(double t) const {
  if (waypoints.empty()) return {0, 0};
  if (t <= waypoints.front().t) return waypoints.front().pos;
  if (t >= waypoints.back().t) return waypoints.back().pos;
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    if (t <= waypoints[i].t) {
      const auto& a = waypoints[i - 1];
      const auto& b = waypoints[i];
      const double u = (t - a.t) / (b.t - a.t);
      return a.pos + u * (b.pos - a.pos);
    }
  }
  return waypoints.back().pos;
}

bool Polygon::contains(const Eigen::Vector2d& p) const {
  if (empty()) return false;
  bool inside = false;
  const std::size_t n = points.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = points[i];
    const auto& b = points[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x =
          a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

bool LaneStrip::applies_to(int camera_id) const {
  if (cameras.empty()) return true;
  return std::find(cameras.begin(), cameras.end(), camera_id) != cameras.end();
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path, msg);
}

const json& require(const json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end())
    fail(path.empty() ? key : path + "." + key, "missing required field");
  return *it;
}

double num(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

Eigen::Vector2d vec2(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected [x, y]");
  return {num(j[0], path + "[0]"), num(j[1], path + "[1]")};
}

Eigen::Vector3d vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) fail(path, "expected [r, g, b]");
  Eigen::Vector3d v{num(j[0], path + "[0]"), num(j[1], path + "[1]"),
                    num(j[2], path + "[2]")};
  for (int i = 0; i < 3; ++i)
    if (v[i] < 0.0 || v[i] > 1.0) fail(path, "channel outside [0,1]");
  return v;
}

CameraModel parse_camera(const json& j, const std::string& path) {
  CameraModel cam;
  cam.id = static_cast<int>(num(require(j, "id", path), path + ".id"));
  const auto& res = require(j, "resolution", path);
  if (!res.is_array() || res.size() != 2) fail(path + ".resolution", "expected [w, h]");
  cam.width = static_cast<int>(num(res[0], path + ".resolution[0]"));
  cam.height = static_cast<int>(num(res[1], path + ".resolution[1]"));
  if (cam.width <= 0 || cam.height <= 0)
    fail(path + ".resolution", "resolution must be positive");
  cam.frame_rate_hz = j.value("frame_rate_hz", 10.0);
  if (cam.frame_rate_hz <= 0.0) fail(path + ".frame_rate_hz", "must be > 0");

  Eigen::Matrix2d linear;
  Eigen::Vector2d offset;
  if (j.contains("view")) {
    // view = {center, size, rotation_deg}: image = 0.5 + R(-rot)*(p-center)/size
    const auto& v = j["view"];
    const std::string vp = path + ".view";
    const Eigen::Vector2d center = vec2(require(v, "center", vp), vp + ".center");
    const double size = num(require(v, "size", vp), vp + ".size");
    if (size <= 0.0) fail(vp + ".size", "view size must be > 0");
    const double rot = v.value("rotation_deg", 0.0) * M_PI / 180.0;
    Eigen::Rotation2Dd r(-rot);
    linear = r.toRotationMatrix() / size;
    offset = Eigen::Vector2d(0.5, 0.5) - linear * center;
  } else if (j.contains("transform")) {
    const auto& tfm = j["transform"];
    const std::string tp = path + ".transform";
    const auto& m = require(tfm, "matrix", tp);
    if (!m.is_array() || m.size() != 2) fail(tp + ".matrix", "expected 2x2 matrix");
    for (int r = 0; r < 2; ++r) {
      if (!m[r].is_array() || m[r].size() != 2)
        fail(tp + ".matrix", "expected 2x2 matrix");
      for (int c = 0; c < 2; ++c)
        linear(r, c) = num(m[r][c], tp + ".matrix");
    }
    offset = vec2(require(tfm, "offset", tp), tp + ".offset");
  } else {
    fail(path, "camera needs either \"view\" or \"transform\"");
  }
  if (std::abs(linear.determinant()) < 1e-12)
    fail(path, "view transform is not invertible");
  cam.world_to_image.linear() = linear;
  cam.world_to_image.translation() = offset;
  cam.image_to_world = cam.world_to_image.inverse();
  return cam;
}

Vehicle parse_vehicle(const json& j, const std::string& path) {
  Vehicle v;
  v.id = static_cast<std::int64_t>(num(require(j, "id", path), path + ".id"));
  v.extent = vec2(require(j, "extent", path), path + ".extent");
  if (v.extent.x() <= 0.0 || v.extent.y() <= 0.0)
    fail(path + ".extent", "extent must be positive");
  v.color = vec3(require(j, "color", path), path + ".color");
  const auto& wps = require(j, "waypoints", path);
  if (!wps.is_array() || wps.empty())
    fail(path + ".waypoints", "expected a non-empty array");
  double prev_t = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < wps.size(); ++i) {
    const std::string wp = path + ".waypoints[" + std::to_string(i) + "]";
    Waypoint w;
    w.t = num(require(wps[i], "t", wp), wp + ".t");
    w.pos = vec2(require(wps[i], "pos", wp), wp + ".pos");
    if (w.t <= prev_t) fail(wp + ".t", "timestamps must be strictly increasing");
    prev_t = w.t;
    v.waypoints.push_back(w);
  }
  return v;
}

}  // namespace

Scene build_scene(const json& config) {
  if (!config.is_object()) fail("", "scenario config must be a JSON object");
  Scene s;
  s.name = config.value("name", std::string("unnamed"));
  s.seed = config.value("seed", std::uint64_t{0});
  s.horizon_ticks = config.value("horizon_ticks", std::int64_t{0});
  if (s.horizon_ticks <= 0) fail("horizon_ticks", "must be a positive integer");
  s.block_size = config.value("block_size", 32);
  if (s.block_size <= 0) fail("block_size", "must be a positive integer");
  s.visibility_area = config.value("visibility_area", 0.0005);
  if (config.contains("background_color"))
    s.background = vec3(config["background_color"], "background_color");

  if (config.contains("world")) {
    const auto& w = config["world"];
    if (w.contains("overlap_polygon")) {
      const auto& poly = w["overlap_polygon"];
      if (!poly.is_array()) fail("world.overlap_polygon", "expected an array of points");
      for (std::size_t i = 0; i < poly.size(); ++i)
        s.world_overlap.points.push_back(
            vec2(poly[i], "world.overlap_polygon[" + std::to_string(i) + "]"));
    }
    if (w.contains("lanes")) {
      const auto& lanes = w["lanes"];
      if (!lanes.is_array()) fail("world.lanes", "expected an array");
      for (std::size_t i = 0; i < lanes.size(); ++i) {
        const std::string lp = "world.lanes[" + std::to_string(i) + "]";
        const auto& lj = lanes[i];
        LaneStrip strip;
        const std::string kind = require(lj, "kind", lp).get<std::string>();
        if (kind == "incoming")
          strip.kind = LaneKind::Incoming;
        else if (kind == "leaving")
          strip.kind = LaneKind::Leaving;
        else
          fail(lp + ".kind", "expected \"incoming\" or \"leaving\"");
        const auto& rect = require(lj, "rect", lp);
        if (!rect.is_array() || rect.size() != 4)
          fail(lp + ".rect", "expected [x0, y0, x1, y1]");
        strip.lo = {num(rect[0], lp), num(rect[1], lp)};
        strip.hi = {num(rect[2], lp), num(rect[3], lp)};
        if (strip.lo.x() >= strip.hi.x() || strip.lo.y() >= strip.hi.y())
          fail(lp + ".rect", "rect must have positive area");
        if (lj.contains("cameras"))
          for (const auto& c : lj["cameras"]) strip.cameras.push_back(c.get<int>());
        s.lanes.push_back(strip);
      }
    }
  }

  const auto& cams = require(config, "cameras", "");
  if (!cams.is_array() || cams.empty()) fail("cameras", "expected a non-empty array");
  for (std::size_t i = 0; i < cams.size(); ++i)
    s.cameras.push_back(parse_camera(cams[i], "cameras[" + std::to_string(i) + "]"));

  if (config.contains("vehicles")) {
    const auto& vs = config["vehicles"];
    if (!vs.is_array()) fail("vehicles", "expected an array");
    for (std::size_t i = 0; i < vs.size(); ++i)
      s.vehicles.push_back(parse_vehicle(vs[i], "vehicles[" + std::to_string(i) + "]"));
  }

  // Painter's order is by id; ids must be unique for it to be total.
  std::sort(s.vehicles.begin(), s.vehicles.end(),
            [](const Vehicle& a, const Vehicle& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < s.vehicles.size(); ++i)
    if (s.vehicles[i].id == s.vehicles[i - 1].id)
      fail("vehicles", "duplicate vehicle id " + std::to_string(s.vehicles[i].id));
  std::sort(s.cameras.begin(), s.cameras.end(),
            [](const CameraModel& a, const CameraModel& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < s.cameras.size(); ++i)
    if (s.cameras[i].id == s.cameras[i - 1].id)
      fail("cameras", "duplicate camera id " + std::to_string(s.cameras[i].id));
  return s;
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open scenario file");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    fail(path, std::string("JSON parse error: ") + e.what());
  }
  return build_scene(j);
}

namespace {

struct ProjectedVehicle {
  const Vehicle* vehicle;
  BBox box_raw;      // normalized, unclamped
  BBox box_clamped;  // normalized, clamped to [0,1]
};

// Projects the vehicle's world rectangle at time t; returns the image
// AABB of the projected corners (exact for any affine view).
BBox project_vehicle(const CameraModel& cam, const Vehicle& v, double t) {
  const Eigen::Vector2d c = v.position(t);
  const Eigen::Vector2d h = 0.5 * v.extent;
  BBox box;
  box.x_min = box.y_min = std::numeric_limits<double>::infinity();
  box.x_max = box.y_max = -std::numeric_limits<double>::infinity();
  const Eigen::Vector2d corners[4] = {{c.x() - h.x(), c.y() - h.y()},
                                      {c.x() + h.x(), c.y() - h.y()},
                                      {c.x() - h.x(), c.y() + h.y()},
                                      {c.x() + h.x(), c.y() + h.y()}};
  for (const auto& corner : corners) {
    const Eigen::Vector2d img = cam.to_image(corner);
    box.x_min = std::min(box.x_min, img.x());
    box.y_min = std::min(box.y_min, img.y());
    box.x_max = std::max(box.x_max, img.x());
    box.y_max = std::max(box.y_max, img.y());
  }
  box.object_id = v.id;
  return box;
}

std::vector<ProjectedVehicle> visible_vehicles(const Scene& scene,
                                               const CameraModel& cam,
                                               double t) {
  std::vector<ProjectedVehicle> out;
  for (const auto& v : scene.vehicles) {
    ProjectedVehicle pv;
    pv.vehicle = &v;
    pv.box_raw = project_vehicle(cam, v, t);
    pv.box_clamped = pv.box_raw;
    pv.box_clamped.x_min = clamp01(pv.box_raw.x_min);
    pv.box_clamped.y_min = clamp01(pv.box_raw.y_min);
    pv.box_clamped.x_max = clamp01(pv.box_raw.x_max);
    pv.box_clamped.y_max = clamp01(pv.box_raw.y_max);
    if (pv.box_clamped.area() >= scene.visibility_area) out.push_back(pv);
  }
  return out;
}

}  // namespace

Frame render(const Scene& scene, const CameraModel& camera, std::int64_t tick) {
  if (tick < 0 || tick >= scene.horizon_ticks)
    throw std::out_of_range("render: tick " + std::to_string(tick) +
                            " outside horizon");
  const double t = static_cast<double>(tick) * scene.tick_seconds(camera);

  Frame frame;
  frame.camera_id = camera.id;
  frame.tick = tick;
  frame.pixels.resize(camera.width, camera.height);

  const auto quant = [](double v) {
    return static_cast<std::uint8_t>(std::lround(clamp01(v) * 255.0));
  };
  const std::uint8_t bg[3] = {quant(scene.background.x()),
                              quant(scene.background.y()),
                              quant(scene.background.z())};
  for (std::size_t i = 0; i < frame.pixels.data.size(); i += 3) {
    frame.pixels.data[i] = bg[0];
    frame.pixels.data[i + 1] = bg[1];
    frame.pixels.data[i + 2] = bg[2];
  }

  // Vehicles are already sorted by id; later ids paint on top.
  for (const auto& pv : visible_vehicles(scene, camera, t)) {
    const Vehicle& v = *pv.vehicle;
    const Eigen::Vector2d c = v.position(t);
    const Eigen::Vector2d h = 0.5 * v.extent;
    const std::uint8_t col[3] = {quant(v.color.x()), quant(v.color.y()),
                                 quant(v.color.z())};
    const auto fp = pixel_footprint(pv.box_clamped, camera.width, camera.height);
    for (int py = fp.y0; py < fp.y1; ++py) {
      for (int px = fp.x0; px < fp.x1; ++px) {
        const Eigen::Vector2d img((px + 0.5) / camera.width,
                                  (py + 0.5) / camera.height);
        const Eigen::Vector2d w = camera.to_world(img);
        if (std::abs(w.x() - c.x()) <= h.x() && std::abs(w.y() - c.y()) <= h.y()) {
          std::uint8_t* p = frame.pixels.at(px, py);
          p[0] = col[0];
          p[1] = col[1];
          p[2] = col[2];
        }
      }
    }
    frame.ground_truth.push_back(pv.box_clamped);
  }
  return frame;
}

FlowField flow_field(const Scene& scene, const CameraModel& camera,
                     std::int64_t tick_prev, std::int64_t tick_now) {
  if (tick_prev >= tick_now)
    throw std::out_of_range("flow_field: tick_prev must precede tick_now");
  if (tick_prev < 0 || tick_now >= scene.horizon_ticks)
    throw std::out_of_range("flow_field: ticks outside horizon");
  const double dt = scene.tick_seconds(camera);
  const double t_now = static_cast<double>(tick_now) * dt;
  const double t_prev = static_cast<double>(tick_prev) * dt;

  FlowField f = FlowField::zero(camera.id, tick_now, camera.width, camera.height);
  // Same painter order as render, so the visible (topmost) vehicle at
  // tick_now owns each covered pixel's flow.
  for (const auto& pv : visible_vehicles(scene, camera, t_now)) {
    const Vehicle& v = *pv.vehicle;
    const Eigen::Vector2d c = v.position(t_now);
    const Eigen::Vector2d h = 0.5 * v.extent;
    const Eigen::Vector2d disp_img =
        camera.to_image(c) - camera.to_image(v.position(t_prev));
    const float ddx = static_cast<float>(disp_img.x() * camera.width);
    const float ddy = static_cast<float>(disp_img.y() * camera.height);
    const auto fp = pixel_footprint(pv.box_clamped, camera.width, camera.height);
    for (int py = fp.y0; py < fp.y1; ++py) {
      for (int px = fp.x0; px < fp.x1; ++px) {
        const Eigen::Vector2d img((px + 0.5) / camera.width,
                                  (py + 0.5) / camera.height);
        const Eigen::Vector2d w = camera.to_world(img);
        if (std::abs(w.x() - c.x()) <= h.x() && std::abs(w.y() - c.y()) <= h.y()) {
          f.dx(py, px) = ddx;
          f.dy(py, px) = ddy;
        }
      }
    }
  }
  return f;
}

std::uint64_t scene_digest(const Scene& scene) {
  std::uint64_t h = fnv1a(scene.name);
  std::vector<std::int64_t> ticks;
  for (int i = 0; i < 5; ++i) {
    const std::int64_t t = scene.horizon_ticks * i / 5;
    if (ticks.empty() || ticks.back() != t) ticks.push_back(t);
  }
  for (const auto& cam : scene.cameras) {
    for (const std::int64_t t : ticks) {
      const Frame fr = render(scene, cam, t);
      h = fnv1a(fr.pixels.data.data(), fr.pixels.data.size(), h);
      for (const auto& box : fr.ground_truth) {
        const double coords[4] = {box.x_min, box.y_min, box.x_max, box.y_max};
        h = fnv1a(coords, sizeof(coords), h);
        const std::int64_t id = box.object_id.value_or(-1);
        h = fnv1a(&id, sizeof(id), h);
      }
      if (t > 0) {
        const FlowField fl = flow_field(scene, cam, t - 1, t);
        h = fnv1a(fl.dx.data(), sizeof(float) * fl.dx.size(), h);
        h = fnv1a(fl.dy.data(), sizeof(float) * fl.dy.size(), h);
      }
    }
  }
  return h;
}

}  // namespace cevas
