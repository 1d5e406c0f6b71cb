#include <dss/polygon.hpp>

namespace dss {

double Polygon2::perimeter() const {
    double s = 0;
    for (int i = 0; i < size(); ++i) s += (at(i + 1) - at(i)).norm();
    return s;
}

double Polygon2::signed_area() const {
    double s = 0;
    for (int i = 0; i < size(); ++i) {
        const Vec2& a = at(i);
        const Vec2& b = at(i + 1);
        s += a.x() * b.y() - b.x() * a.y();
    }
    return 0.5 * s;
}

void Polygon2::bounding_box(Vec2& lo, Vec2& hi) const {
    lo = Vec2(std::numeric_limits<double>::max(), std::numeric_limits<double>::max());
    hi = -lo;
    for (const auto& p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
}

double Polygon2::bbox_diagonal() const {
    Vec2 lo, hi;
    bounding_box(lo, hi);
    return (hi - lo).norm();
}

bool point_in_polygon(const Polygon2& poly, const Vec2& p) {
    // even-odd rule; half-open comparisons make vertex-grazing consistent
    bool inside = false;
    const int n = poly.size();
    for (int i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly.points[i];
        const Vec2& b = poly.points[j];
        if ((a.y() > p.y()) != (b.y() > p.y())) {
            const double x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
            if (p.x() < x) inside = !inside;
        }
    }
    return inside;
}

std::optional<PolyRayHit> polygon_ray(const Polygon2& poly, const Vec2& origin, const Vec2& dir,
                                      double t_min) {
    double best_t = std::numeric_limits<double>::max();
    int best_seg = -1;
    for (int i = 0; i < poly.size(); ++i) {
        const Vec2& a = poly.at(i);
        const Vec2& b = poly.at(i + 1);
        const Vec2 e = b - a;
        const double det = dir.x() * (-e.y()) - dir.y() * (-e.x());
        if (std::abs(det) < 1e-15) continue;
        const Vec2 rhs = a - origin;
        const double t = (rhs.x() * (-e.y()) - rhs.y() * (-e.x())) / det;
        const double u = (dir.x() * rhs.y() - dir.y() * rhs.x()) / det;
        if (t > t_min && u >= -1e-12 && u <= 1 + 1e-12 && t < best_t) {
            best_t = t;
            best_seg = i;
        }
    }
    if (best_seg < 0) return std::nullopt;
    return PolyRayHit{origin + best_t * dir, best_seg, best_t};
}

std::optional<Vec2> segment_intersection(const Vec2& a, const Vec2& b, const Vec2& c,
                                         const Vec2& d, double tol) {
    const Vec2 r = b - a, s = d - c;
    const double denom = r.x() * s.y() - r.y() * s.x();
    if (std::abs(denom) < 1e-15) return std::nullopt;
    const Vec2 qp = c - a;
    const double t = (qp.x() * s.y() - qp.y() * s.x()) / denom;
    const double u = (qp.x() * r.y() - qp.y() * r.x()) / denom;
    const double lo_t = tol / std::max(r.norm(), 1e-300);
    const double lo_u = tol / std::max(s.norm(), 1e-300);
    if (t <= lo_t || t >= 1 - lo_t || u <= lo_u || u >= 1 - lo_u) return std::nullopt;
    return Vec2(a + t * r);
}

}  // namespace dss
