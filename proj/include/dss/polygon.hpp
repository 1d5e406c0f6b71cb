#pragma once

#include <dss/common.hpp>

#include <optional>

namespace dss {

// Closed polygon, vertices in order (either winding); optional per-vertex
// top/bottom labels for divided boundaries.
struct Polygon2 {
    std::vector<Vec2> points;
    std::vector<std::uint8_t> labels;  // 1 = top; empty if undivided

    int size() const { return int(points.size()); }
    const Vec2& at(int i) const { return points[(i % size() + size()) % size()]; }
    double perimeter() const;
    double signed_area() const;  // positive = counter-clockwise

    void bounding_box(Vec2& lo, Vec2& hi) const;
    double bbox_diagonal() const;
};

bool point_in_polygon(const Polygon2& poly, const Vec2& p);

struct PolyRayHit {
    Vec2 point;
    int segment = -1;  // hit on segment (i, i+1)
    double t = 0;
};

// Nearest crossing with t > t_min along a unit direction.
std::optional<PolyRayHit> polygon_ray(const Polygon2& poly, const Vec2& origin, const Vec2& dir,
                                      double t_min = 1e-12);

// Proper intersection of open segments (a,b) and (c,d); endpoints touching
// within tol do not count.
std::optional<Vec2> segment_intersection(const Vec2& a, const Vec2& b, const Vec2& c,
                                         const Vec2& d, double tol = 1e-12);

}  // namespace dss
