#pragma once

#include <dss/common.hpp>
#include <dss/polyfit.hpp>
#include <dss/polygon.hpp>

#include <functional>

namespace dss {

// One cross-section of a 2D generalized cylinder: the station point on the
// center curve plus the chord endpoints stretched to the actual boundary.
struct SemiChord {
    Vec2 spine_point;
    Vec2 up_tip;    // on the top part
    Vec2 down_tip;  // on the bottom part
    double fraction = 0;  // arclength fraction of the station

    Vec2 midpoint() const { return 0.5 * (up_tip + down_tip); }
    double length() const { return (up_tip - down_tip).norm(); }
};

struct Gc2dModel {
    Polygon2 boundary;               // labeled closed polygon
    int vertex0 = -1, vertex1 = -1;  // polygon indices of the two object vertices
    Poly1 center_curve;
    double curve_x_min = 0, curve_x_max = 0;  // domain extended to the vertices
    // central arclength window (fractions of the extended domain) where the
    // radius slope stays clear of the |dR/dl| = 1 end-cap limit; stations are
    // registered at fractions k/(N+1) of this window
    double window_lo = 0, window_hi = 1;
    std::vector<SemiChord> chords;
    std::vector<double> radius;      // maximal-inscribed-circle radius per station
    std::vector<int> rcc_violations; // stations where half-width * curvature >= 1

    double station_arclength_span() const;  // window length in world units
};

// Least-squares polynomial center curve; degree restricted to 1..7. Points
// must be in PCA-aligned coordinates (x along the first axis).
Poly1Fit fit_relaxed_cms_2d(const std::vector<Vec2>& cms_points, int degree);

struct MedialSpokes2 {
    std::vector<Vec2> stations;
    std::vector<Vec2> up_tips;    // +normal side
    std::vector<Vec2> down_tips;  // -normal side
    std::vector<double> radius;
    std::vector<double> radius_deriv;
    std::vector<double> fractions;
};

// Tips of the two spokes of the maximal inscribed circle at N interior
// stations (arclength fractions k/(N+1)):
//   b = p - R R' t +/- R sqrt(1 - R'^2) n
// R' by centered finite differences with step arclength/(4N). Stations
// within 2% of either endpoint are skipped; |R'| >= 1 raises an end-cap
// error.
MedialSpokes2 medial_spokes_2d(const CurveSampler& curve,
                               const std::function<double(double)>& radius_at_arclength,
                               int count);

// Full semi-chordal structure: medial spokes, chords stretched to the actual
// boundary by ray casting, pairwise trimming at interior intersections, and
// curve-length registration at fractions k/(N+1).
Gc2dModel semi_chordal_structure(const Poly1& center_curve, const Polygon2& boundary,
                                 int count);

struct Straightened2d {
    std::vector<Vec2> spine;                  // station images on the x-axis
    std::vector<std::array<Vec2, 2>> chords;  // up/down endpoints, perpendicular
    Polygon2 outline;
};

// Maps stations to a straight line preserving inter-station arclengths and
// chords to perpendicular segments of preserved length centered on the line.
Straightened2d straighten_2d(const Gc2dModel& model);

void save_gc2d_svg(const Gc2dModel& model, const std::string& path);
void save_gc2d_svg(const Straightened2d& model, const std::string& path);
void save_gc2d_json(const Gc2dModel& model, const std::string& path);

// Random 2D GC for tests and demos: polynomial center curve with a smooth
// radius profile, closed with semicircular end caps. Deterministic in seed.
struct SyntheticGc2d {
    Polygon2 boundary;
    Poly1 true_curve;
    double length = 0;
};
SyntheticGc2d make_synthetic_gc2d(std::uint64_t seed);

// Rigid 2D PCA alignment for raw polygons (first principal axis to x).
struct Frame2 {
    Vec2 center = Vec2::Zero();
    Eigen::Matrix2d axes = Eigen::Matrix2d::Identity();  // columns e1, e2

    Vec2 to_local(const Vec2& p) const { return axes.transpose() * (p - center); }
    Vec2 to_world(const Vec2& q) const { return center + axes * q; }
};
Frame2 pca_frame_2d(const std::vector<Vec2>& points);

}  // namespace dss
