#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "previz/behaviour.hpp"
#include "previz/camera.hpp"
#include "previz/regions.hpp"

// Top-view SVG rendering of scenes, functional maps and shot diagrams.
// Output is deterministic: fixed canvas scale, fixed number formatting, and
// map-ordered iteration, so identical inputs render byte-identical files.
namespace previz::svg {

enum class Layer { detection, functional, shot };

inline std::optional<Layer> layer_from_string(const std::string& s) {
  if (s == "detection") return Layer::detection;
  if (s == "functional") return Layer::functional;
  if (s == "shot") return Layer::shot;
  return std::nullopt;
}

namespace detail {

inline constexpr double kScale = 100.0;  // pixels per meter
inline constexpr double kMargin = 20.0;

struct Canvas {
  Rect bounds;
  double width_px = 0.0;
  double height_px = 0.0;

  double x(double wx) const { return kMargin + (wx - bounds.min.x) * kScale; }
  double y(double wy) const { return kMargin + (bounds.max.y - wy) * kScale; }
};

inline std::string num(double v) {
  char buf[32];
  // normalize negative zero so the text output is stable
  if (v == 0.0) v = 0.0;
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline void line(std::string& out, const Canvas& cv, Vec2 a, Vec2 b, const char* style) {
  out += "  <line x1=\"" + num(cv.x(a.x)) + "\" y1=\"" + num(cv.y(a.y)) + "\" x2=\"" +
         num(cv.x(b.x)) + "\" y2=\"" + num(cv.y(b.y)) + "\" " + style + "/>\n";
}

}  // namespace detail

// Renders the requested layer. The functional layer needs a functional map;
// the shot layer additionally accepts plans whose first samples are drawn as
// camera glyphs with look vectors and frustum wedges.
inline std::string render(const PlacedScene& placed, Layer layer,
                          const regions::FunctionalMap* fm = nullptr,
                          const std::vector<camera::ShotPlan>* plans = nullptr) {
  using detail::num;
  detail::Canvas cv;
  cv.bounds = placed.bounds;
  cv.width_px = placed.bounds.width() * detail::kScale + 2 * detail::kMargin;
  cv.height_px = placed.bounds.depth() * detail::kScale + 2 * detail::kMargin;

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(cv.width_px) +
         "\" height=\"" + num(cv.height_px) + "\" viewBox=\"0 0 " + num(cv.width_px) + " " +
         num(cv.height_px) + "\">\n";

  // floor border and 1 m grid lines
  out += "  <path d=\"M " + num(cv.x(placed.bounds.min.x)) + " " + num(cv.y(placed.bounds.min.y)) +
         " L " + num(cv.x(placed.bounds.max.x)) + " " + num(cv.y(placed.bounds.min.y)) + " L " +
         num(cv.x(placed.bounds.max.x)) + " " + num(cv.y(placed.bounds.max.y)) + " L " +
         num(cv.x(placed.bounds.min.x)) + " " + num(cv.y(placed.bounds.max.y)) +
         " Z\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n";
  for (double gx = std::ceil(placed.bounds.min.x); gx < placed.bounds.max.x; gx += 1.0) {
    if (gx <= placed.bounds.min.x) continue;
    detail::line(out, cv, {gx, placed.bounds.min.y}, {gx, placed.bounds.max.y},
                 "stroke=\"#dddddd\" stroke-width=\"0.5\"");
  }
  for (double gy = std::ceil(placed.bounds.min.y); gy < placed.bounds.max.y; gy += 1.0) {
    if (gy <= placed.bounds.min.y) continue;
    detail::line(out, cv, {placed.bounds.min.x, gy}, {placed.bounds.max.x, gy},
                 "stroke=\"#dddddd\" stroke-width=\"0.5\"");
  }

  // labeled object rectangles with yaw arrows; <rect> is reserved for
  // objects (and region squares), so element counts stay meaningful
  for (const auto& [id, pose] : placed.poses) {
    const SceneObject* obj = placed.scene_graph.find(id);
    double w_px = obj->depth * detail::kScale;   // depth runs along facing (+x at yaw 0)
    double h_px = obj->width * detail::kScale;
    double cx = cv.x(pose.position.x);
    double cy = cv.y(pose.position.y);
    double deg = -pose.yaw * 180.0 / std::numbers::pi;  // y-down flips rotation sense
    const char* fill = obj->kind == ObjectKind::ornament ? "#cde8cd" : "#c8d8ee";
    out += "  <rect x=\"" + num(cx - w_px / 2) + "\" y=\"" + num(cy - h_px / 2) + "\" width=\"" +
           num(w_px) + "\" height=\"" + num(h_px) + "\" transform=\"rotate(" + num(deg) + " " +
           num(cx) + " " + num(cy) + ")\" fill=\"" + std::string(fill) +
           "\" stroke=\"#445566\" stroke-width=\"1\"/>\n";
    Vec2 tip = pose.position + facing_dir(pose.yaw) * (obj->depth * 0.5);
    detail::line(out, cv, pose.position, tip, "stroke=\"#222222\" stroke-width=\"1\"");
    out += "  <text x=\"" + num(cx) + "\" y=\"" + num(cy) +
           "\" font-size=\"10\" text-anchor=\"middle\" fill=\"#111111\">" + id + "</text>\n";
  }

  if (layer != Layer::detection && fm) {
    for (const auto& [parcel, sr] : fm->standing_regions) {
      double half = sr.region.size * 0.5;
      double px = cv.x(sr.region.center.x - half);
      double py = cv.y(sr.region.center.y + half);
      out += "  <rect x=\"" + num(px) + "\" y=\"" + num(py) + "\" width=\"" +
             num(sr.region.size * detail::kScale) + "\" height=\"" +
             num(sr.region.size * detail::kScale) +
             "\" fill=\"#88bb8844\" stroke=\"#338833\" stroke-width=\"0.8\"/>\n";
    }
    for (const auto& spot : fm->sittable_spots) {
      out += "  <circle cx=\"" + num(cv.x(spot.seat.x)) + "\" cy=\"" + num(cv.y(spot.seat.y)) +
             "\" r=\"6\" fill=\"#eebb66\" stroke=\"#996611\" stroke-width=\"1\"/>\n";
      Vec2 tip = spot.seat + facing_dir(spot.seat_yaw) * 0.15;
      detail::line(out, cv, spot.seat, tip, "stroke=\"#996611\" stroke-width=\"1\"");
    }
  }

  if (layer == Layer::shot && plans) {
    for (const auto& plan : *plans) {
      if (plan.track.samples.empty()) continue;
      const auto& s = plan.track.samples.front();
      Vec2 pos{s.position.x, s.position.y};
      Vec2 look{s.look_at.x, s.look_at.y};
      out += "  <circle cx=\"" + num(cv.x(pos.x)) + "\" cy=\"" + num(cv.y(pos.y)) +
             "\" r=\"5\" fill=\"#cc4444\" stroke=\"#661111\" stroke-width=\"1\"/>\n";
      detail::line(out, cv, pos, look, "stroke=\"#cc4444\" stroke-width=\"1\"");
      // frustum wedge from the horizontal field of view
      Vec2 dir = (look - pos).normalized();
      double half_h = std::atan(std::tan(s.vertical_fov * 0.5) * (16.0 / 9.0));
      double reach = 1.2;
      Vec2 left = pos + camera::detail::rotate(dir, half_h) * reach;
      Vec2 right = pos + camera::detail::rotate(dir, -half_h) * reach;
      out += "  <path d=\"M " + num(cv.x(pos.x)) + " " + num(cv.y(pos.y)) + " L " +
             num(cv.x(left.x)) + " " + num(cv.y(left.y)) + " L " + num(cv.x(right.x)) + " " +
             num(cv.y(right.y)) +
             " Z\" fill=\"#cc444422\" stroke=\"#cc4444\" stroke-width=\"0.5\"/>\n";
    }
  }

  out += "</svg>\n";
  return out;
}

}  // namespace previz::svg
