#include <doctest.h>

#include <iostream>

#include "cevas/filter.hpp"
#include "cevas/netmodel.hpp"
#include "oracles.hpp"

using namespace cevas;

namespace {

RegionMap make_map(const BlockGrid& grid,
                   RegionLabel fill = RegionLabel::Background) {
  RegionMap map;
  map.grid = grid;
  map.labels.assign(static_cast<std::size_t>(grid.block_count()), fill);
  return map;
}

Frame blank_frame(const BlockGrid& grid) {
  Frame f;
  f.pixels.resize(grid.frame_width, grid.frame_height);
  return f;
}

BBox box(double x0, double y0, double x1, double y1) {
  BBox b;
  b.x_min = x0;
  b.y_min = y0;
  b.x_max = x1;
  b.y_max = y1;
  return b;
}

void fill_flow(FlowField& flow, int x0, int y0, int x1, int y1, float fx,
               float fy) {
  for (int py = y0; py < y1; ++py)
    for (int px = x0; px < x1; ++px) {
      flow.dx(py, px) = fx;
      flow.dy(py, px) = fy;
    }
}

bool same_boxes(const std::vector<BBox>& a, const std::vector<BBox>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].x_min != b[i].x_min || a[i].y_min != b[i].y_min ||
        a[i].x_max != b[i].x_max || a[i].y_max != b[i].y_max)
      return false;
  return true;
}

}  // namespace

TEST_SUITE_BEGIN("filter");

TEST_CASE("count_active_flow") {
  const BlockGrid grid{256, 256, 32};
  FlowField flow = FlowField::zero(0, 1, 256, 256);
  CHECK(count_active_flow(flow, 0, grid) == 0);

  fill_flow(flow, 0, 0, 32, 32, 2.0f, 0.0f);  // block 0 fully covered
  CHECK(count_active_flow(flow, 0, grid) == 1024);

  fill_flow(flow, 32, 0, 48, 32, 0.0f, -1.5f);  // half of block 1
  CHECK(count_active_flow(flow, 1, grid) == 512);

  // Per-pixel oracle on an irregular patch.
  fill_flow(flow, 70, 10, 83, 27, 0.5f, 0.5f);  // inside block 2
  int expect = 0;
  const auto rect = grid.block_rect(2);
  for (int py = rect.y0; py < rect.y1; ++py)
    for (int px = rect.x0; px < rect.x1; ++px)
      if (std::abs(flow.dx(py, px)) > 1e-6 || std::abs(flow.dy(py, px)) > 1e-6)
        ++expect;
  CHECK(count_active_flow(flow, 2, grid) == expect);
}

TEST_CASE("static scene with empty history offloads nothing") {
  const BlockGrid grid{128, 128, 32};
  RegionMap map = make_map(grid, RegionLabel::Incoming);
  const FlowField flow = FlowField::zero(0, 1, 128, 128);
  const auto out = filter_frame(blank_frame(grid), flow, {}, map,
                                FilterThresholds::defaults(grid));
  CHECK(out.offload_blocks.empty());
  CHECK(out.reused_results.empty());
  CHECK(out.offload_boxes.empty());
  CHECK(out.filtered_payload_bytes == 0);
  CHECK(out.filter_compute_cost == 16);  // every incoming block was examined
}

TEST_CASE("a stationary box outside the overlap is reused") {
  const BlockGrid grid{128, 128, 32};
  RegionMap map = make_map(grid, RegionLabel::Background);
  const FlowField flow = FlowField::zero(0, 1, 128, 128);
  const std::vector<BBox> prev = {box(0.1, 0.1, 0.3, 0.3)};
  const auto out = filter_frame(blank_frame(grid), flow, prev, map,
                                FilterThresholds::defaults(grid));
  CHECK(out.offload_blocks.empty());
  REQUIRE(out.reused_results.size() == 1);
  CHECK(same_boxes(out.reused_results, prev));
  CHECK(out.filtered_payload_bytes == 0);
}

TEST_CASE("a stationary box touching the overlap is offloaded despite d=0") {
  const BlockGrid grid{128, 128, 32};
  RegionMap map = make_map(grid, RegionLabel::Background);
  map.labels[0] = RegionLabel::Overlapping;
  const FlowField flow = FlowField::zero(0, 1, 128, 128);
  const std::vector<BBox> prev = {box(0.1, 0.1, 0.3, 0.3)};  // covers block 0
  const auto out = filter_frame(blank_frame(grid), flow, prev, map,
                                FilterThresholds::defaults(grid));
  CHECK(out.reused_results.empty());
  REQUIRE(out.offload_boxes.size() == 1);
  const auto expect = bbox_blocks(prev[0], grid);
  CHECK(out.offload_blocks == expect);
  CHECK(out.filtered_payload_bytes ==
        payload_bytes(expect, grid, FilterOptions{}));
}

TEST_CASE("scripted two-vehicle inputs match the reference policy (frozen)") {
  const BlockGrid grid{128, 128, 16};  // 8x8 blocks
  RegionMap map = make_map(grid, RegionLabel::Background);
  // Left column incoming, right column leaving, center 2x2 overlapping.
  for (int r = 0; r < 8; ++r) {
    map.labels[static_cast<std::size_t>(r * 8)] = RegionLabel::Incoming;
    map.labels[static_cast<std::size_t>(r * 8 + 7)] = RegionLabel::Leaving;
  }
  for (int r = 3; r <= 4; ++r)
    for (int c = 3; c <= 4; ++c)
      map.labels[static_cast<std::size_t>(r * 8 + c)] = RegionLabel::Overlapping;

  FlowField flow = FlowField::zero(0, 1, 128, 128);
  fill_flow(flow, 0, 40, 14, 60, 3.0f, 0.0f);    // new object entering left
  fill_flow(flow, 70, 70, 90, 86, 1.0f, 1.0f);   // prev vehicle drifting in center

  const std::vector<BBox> prev = {
      box(70.0 / 128, 70.0 / 128, 90.0 / 128, 86.0 / 128),  // touches overlap
      box(0.05, 0.05, 0.15, 0.15),                          // static, clear
  };
  FilterThresholds th;
  th.t_new = 64;  // quarter of a 16x16 block
  th.t_dis = 0.1;
  const auto out = filter_frame(blank_frame(grid), flow, prev, map, th);

  const auto ref = oracle::alg1_reference(flow, map, prev, th.t_new, th.t_dis);
  CHECK(std::set<int>(out.offload_blocks.begin(), out.offload_blocks.end()) ==
        ref.offload_blocks);
  CHECK(out.reused_results.size() == ref.reused.size());
  CHECK(out.dropped_boxes == ref.dropped);

  // Frozen expected offload set, computed once by the reference policy:
  // two incoming-column blocks trip the new-object threshold and the
  // overlap-touching box contributes its four blocks.
  CHECK(out.offload_blocks == std::vector<int>{16, 24, 36, 37, 44, 45});
}

TEST_CASE("degenerate shifts are dropped and counted") {
  const BlockGrid grid{128, 128, 32};
  RegionMap map = make_map(grid);
  FlowField flow = FlowField::zero(0, 1, 128, 128);
  // Uniform flow shoving everything far right: box fully leaves the frame.
  fill_flow(flow, 0, 0, 128, 128, 200.0f, 0.0f);
  const std::vector<BBox> prev = {box(0.9, 0.4, 0.99, 0.5)};
  const auto out = filter_frame(blank_frame(grid), flow, prev, map,
                                FilterThresholds::defaults(grid));
  CHECK(out.dropped_boxes == 1);
  CHECK(out.reused_results.empty());
  CHECK(out.offload_boxes.empty());
}

TEST_CASE("every previous box lands in exactly one bucket") {
  RandomStream rng(55);
  for (int i = 0; i < 100; ++i) {
    auto scene = oracle::random_filter_scene(rng);
    FilterThresholds th;
    th.t_new = scene.t_new;
    th.t_dis = scene.t_dis;
    const auto out = filter_frame(blank_frame(scene.grid), scene.flow,
                                  scene.prev, scene.map, th);
    CHECK(out.reused_results.size() + out.offload_boxes.size() +
              static_cast<std::size_t>(out.dropped_boxes) ==
          scene.prev.size());
  }
}

TEST_CASE("raising t_new never enlarges the offload set") {
  RandomStream rng(56);
  for (int i = 0; i < 60; ++i) {
    auto scene = oracle::random_filter_scene(rng);
    FilterThresholds lo, hi;
    lo.t_new = scene.t_new;
    hi.t_new = scene.t_new + 10;
    lo.t_dis = hi.t_dis = scene.t_dis;
    const auto frame = blank_frame(scene.grid);
    const auto out_lo = filter_frame(frame, scene.flow, scene.prev, scene.map, lo);
    const auto out_hi = filter_frame(frame, scene.flow, scene.prev, scene.map, hi);
    CHECK(std::includes(out_lo.offload_blocks.begin(), out_lo.offload_blocks.end(),
                        out_hi.offload_blocks.begin(), out_hi.offload_blocks.end()));
  }
}

TEST_CASE("raising t_dis never moves a box from reused to offloaded") {
  RandomStream rng(57);
  for (int i = 0; i < 60; ++i) {
    auto scene = oracle::random_filter_scene(rng);
    FilterThresholds lo, hi;
    lo.t_dis = scene.t_dis;
    hi.t_dis = scene.t_dis + 0.1;
    lo.t_new = hi.t_new = scene.t_new;
    const auto frame = blank_frame(scene.grid);
    const auto out_lo = filter_frame(frame, scene.flow, scene.prev, scene.map, lo);
    const auto out_hi = filter_frame(frame, scene.flow, scene.prev, scene.map, hi);
    // Every box reused at the lower threshold stays reused at the higher.
    for (const BBox& b : out_lo.reused_results) {
      bool found = false;
      for (const BBox& c : out_hi.reused_results)
        if (b.x_min == c.x_min && b.y_min == c.y_min && b.x_max == c.x_max &&
            b.y_max == c.y_max)
          found = true;
      CHECK(found);
    }
  }
}

TEST_CASE("filter matches the reference policy on randomized scenes") {
  RandomStream rng(9001);
  for (int i = 0; i < 200; ++i) {
    auto scene = oracle::random_filter_scene(rng);
    FilterThresholds th;
    th.t_new = scene.t_new;
    th.t_dis = scene.t_dis;
    const auto out = filter_frame(blank_frame(scene.grid), scene.flow,
                                  scene.prev, scene.map, th);
    const auto ref =
        oracle::alg1_reference(scene.flow, scene.map, scene.prev, th.t_new, th.t_dis);
    REQUIRE(std::set<int>(out.offload_blocks.begin(), out.offload_blocks.end()) ==
            ref.offload_blocks);
    REQUIRE(same_boxes(out.reused_results, ref.reused));
    REQUIRE(same_boxes(out.offload_boxes, ref.offloaded_boxes));
    REQUIRE(out.dropped_boxes == ref.dropped);
  }
}

TEST_CASE("assemble_filtered payload accounting") {
  const BlockGrid grid{320, 320, 32};  // 100 blocks
  Frame frame = blank_frame(grid);
  frame.camera_id = 2;
  frame.tick = 7;

  FilterOutput none;
  const auto empty = assemble_filtered(frame, none, grid);
  CHECK(empty.pixels.empty());
  CHECK(empty.payload_bytes == 0);

  FilterOutput every;
  for (int k = 0; k < 100; ++k) every.offload_blocks.push_back(k);
  every.filtered_payload_bytes = payload_bytes(every.offload_blocks, grid, {});
  const auto full = assemble_filtered(frame, every, grid);
  CHECK(full.payload_bytes == full_frame_bytes(grid, {}));
  CHECK(full.pixels.size() == static_cast<std::size_t>(320 * 320 * 3));
  CHECK(data_size_ratio(full.payload_bytes, full_frame_bytes(grid, {})) == 1.0);

  FilterOutput ten;
  for (int k = 0; k < 10; ++k) ten.offload_blocks.push_back(k * 7);
  ten.filtered_payload_bytes = payload_bytes(ten.offload_blocks, grid, {});
  CHECK(data_size_ratio(ten.filtered_payload_bytes, full_frame_bytes(grid, {})) ==
        doctest::Approx(0.10).epsilon(1e-12));
}

TEST_CASE("filtered frames round-trip through the binary format") {
  RandomStream rng(4242);
  const BlockGrid grid{96, 64, 32};  // 3x2 blocks
  Frame frame = blank_frame(grid);
  for (auto& byte : frame.pixels.data)
    byte = static_cast<std::uint8_t>(rng.next_u64() & 0xff);
  frame.camera_id = 3;
  frame.tick = 11;

  FilterOutput out;
  out.offload_blocks = {0, 2, 5};
  out.filtered_payload_bytes = payload_bytes(out.offload_blocks, grid, {});
  const FilteredFrame f = assemble_filtered(frame, out, grid);

  const auto bytes = serialize_filtered(f);
  const FilteredFrame g = parse_filtered(bytes);
  CHECK(g.camera_id == f.camera_id);
  CHECK(g.tick == f.tick);
  CHECK(g.blocks == f.blocks);
  CHECK(g.pixels == f.pixels);

  // Pasting back reproduces the offloaded blocks losslessly.
  Image base;
  base.resize(96, 64);
  paste_filtered(g, base);
  for (const int k : f.blocks) {
    const auto rect = grid.block_rect(k);
    for (int py = rect.y0; py < rect.y1; ++py)
      for (int px = rect.x0; px < rect.x1; ++px)
        REQUIRE(std::memcmp(base.at(px, py), frame.pixels.at(px, py), 3) == 0);
  }

  auto truncated = bytes;
  truncated.resize(truncated.size() - 5);
  CHECK_THROWS_AS(parse_filtered(truncated), std::invalid_argument);
}

TEST_CASE("offload_coverage") {
  const BlockGrid grid{128, 128, 32};
  const BBox b = box(0.0, 0.0, 0.25, 0.25);  // exactly block 0
  CHECK(offload_coverage(b, {0}, grid) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(offload_coverage(b, {1, 2}, grid) == 0.0);
  CHECK(offload_coverage(box(0.0, 0.0, 0.5, 0.25), {0}, grid) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_SUITE_END();
