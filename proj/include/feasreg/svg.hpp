#pragma once

#include "feasreg/common.hpp"
#include "feasreg/geometry.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace feasreg {

/// Minimal deterministic SVG writer for region/plan figures: world
/// coordinates in meters, y up, auto-fitted viewport.
class SvgCanvas {
 public:
  void add_polygon(const Polygon2& poly, const std::string& stroke, const std::string& fill,
                   bool dashed = false, double opacity = 1.0) {
    Shape s;
    s.kind = Shape::polygon;
    for (const Vec2& v : poly.vertices()) {
      s.points.push_back(v);
      grow(v);
    }
    s.stroke = stroke;
    s.fill = fill;
    s.dashed = dashed;
    s.opacity = opacity;
    shapes_.push_back(std::move(s));
  }

  void add_circle(const Vec2& center, double radius_m, const std::string& fill) {
    Shape s;
    s.kind = Shape::circle;
    s.points = {center};
    s.radius = radius_m;
    s.fill = fill;
    grow(center + Vec2(radius_m, radius_m));
    grow(center - Vec2(radius_m, radius_m));
    shapes_.push_back(std::move(s));
  }

  void add_segment(const Vec2& a, const Vec2& b, const std::string& stroke) {
    Shape s;
    s.kind = Shape::segment;
    s.points = {a, b};
    s.stroke = stroke;
    grow(a);
    grow(b);
    shapes_.push_back(std::move(s));
  }

  void write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("SvgCanvas: cannot open " + path);
    const double margin = 0.08 * std::max(xmax_ - xmin_, ymax_ - ymin_) + 1e-6;
    const double x0 = xmin_ - margin, x1 = xmax_ + margin;
    const double y0 = ymin_ - margin, y1 = ymax_ + margin;
    const double scale = 640.0 / std::max(x1 - x0, y1 - y0);
    const double w = (x1 - x0) * scale, h = (y1 - y0) * scale;
    auto px = [&](const Vec2& p) {
      return Vec2((p.x() - x0) * scale, h - (p.y() - y0) * scale);
    };
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                  "viewBox=\"0 0 %.0f %.0f\">\n",
                  w, h, w, h);
    out << buf << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const Shape& s : shapes_) {
      if (s.kind == Shape::polygon) {
        out << "<polygon points=\"";
        for (const Vec2& v : s.points) {
          const Vec2 q = px(v);
          std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", q.x(), q.y());
          out << buf;
        }
        std::snprintf(buf, sizeof(buf),
                      "\" fill=\"%s\" fill-opacity=\"%.2f\" stroke=\"%s\" stroke-width=\"2\"%s/>\n",
                      s.fill.c_str(), s.opacity, s.stroke.c_str(),
                      s.dashed ? " stroke-dasharray=\"8 5\"" : "");
        out << buf;
      } else if (s.kind == Shape::circle) {
        const Vec2 q = px(s.points[0]);
        std::snprintf(buf, sizeof(buf),
                      "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" fill=\"%s\"/>\n", q.x(), q.y(),
                      s.radius * scale, s.fill.c_str());
        out << buf;
      } else {
        const Vec2 a = px(s.points[0]), b = px(s.points[1]);
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" "
                      "stroke-width=\"1.5\"/>\n",
                      a.x(), a.y(), b.x(), b.y(), s.stroke.c_str());
        out << buf;
      }
    }
    out << "</svg>\n";
  }

 private:
  struct Shape {
    enum Kind { polygon, circle, segment } kind = polygon;
    std::vector<Vec2> points;
    double radius = 0.0;
    std::string stroke, fill;
    bool dashed = false;
    double opacity = 1.0;
  };

  void grow(const Vec2& p) {
    xmin_ = std::min(xmin_, p.x());
    xmax_ = std::max(xmax_, p.x());
    ymin_ = std::min(ymin_, p.y());
    ymax_ = std::max(ymax_, p.y());
  }

  std::vector<Shape> shapes_;
  double xmin_ = 1e18, xmax_ = -1e18, ymin_ = 1e18, ymax_ = -1e18;
};

}  // namespace feasreg
