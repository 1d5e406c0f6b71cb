#pragma once

#include <dss/cms.hpp>
#include <dss/common.hpp>
#include <dss/division.hpp>
#include <dss/flatten.hpp>
#include <dss/gc2d.hpp>
#include <dss/mesh.hpp>
#include <dss/polyfit.hpp>

namespace dss {

enum class PlaneMode {
    ChordalSpineChordalPlanes,
    RelaxedSpineChordalPlanes,  // default
    RelaxedSpineNormalPlanes,
};

const char* to_string(PlaneMode mode);
PlaneMode plane_mode_from_string(const std::string& name);

// Anchors the sheet frame to covariant geometry so that refitting a rigidly
// moved mesh yields the rigidly moved frame.
struct SheetOrientation {
    Vec3 top_direction = Vec3::Zero();     // orients the projection axis
    Vec3 anchor_direction = Vec3::Zero();  // orients the first axis
};

struct SheetFit {
    PcaFrame frame;
    Poly2 surface;  // height field over the frame's first principal plane
    double rms = 0;
    int degree = 0;
    FlatteningMap flat_map;  // PCA flattening of the CMS samples

    Vec3 lift(const Vec2& xy) const { return frame.to_world(xy, surface.eval(xy.x(), xy.y())); }
    // unit surface normal with positive third-axis component
    Vec3 normal_world(const Vec2& xy) const;
};

// Least-squares polynomial height field over the PCA plane of the CMS
// samples. Degree 1..7. Requires the samples to be PCA flatable unless
// allow_irregular is set (treatable irregular objects).
SheetFit fit_skeletal_sheet(const std::vector<Vec3>& cms_points, int degree,
                            const SheetOrientation* orientation = nullptr,
                            bool allow_irregular = false);

struct SpineFit {
    int degree = 0;
    Poly1 curve2d;        // center curve on the flattened sheet
    Polygon2 crest2d;     // projected crest loop, side-labeled
    std::vector<Vec3> points;  // dense polyline on the surface, crest to crest
    std::vector<double> cumlen;
    Vec3 vertex_a, vertex_b;   // nearest crest-loop points to the endpoints

    double length() const { return cumlen.back(); }
    Vec3 at_fraction(double f) const;
    Vec3 tangent_at_fraction(double f) const;
    double fraction_nearest(const Vec3& p) const;
};

// Center curve of the flattened sheet (2D CMS of the projected crest,
// degree-limited least squares), lifted through the sheet surface and
// extended until it crosses the projected crest loop. With chordal_spine the
// curve is refitted through the semi-chord midpoints instead.
SpineFit fit_spine(const SheetFit& sheet, const std::vector<Vec3>& crest_loop, int degree,
                   bool chordal_spine = false);

struct CrossSection {
    Vec3 station;       // spine point in the slicing plane
    Vec3 plane_normal;  // unit
    double fraction;    // spine arclength fraction
    std::vector<Vec3> vein_right, vein_left;  // station ... crest, inclusive
};

struct RccPair {
    bool intersects_inside = false;
    double margin = 0;  // signed clearance, capped at the bounding-box diagonal
};

struct RccReport {
    std::vector<RccPair> pairs;  // one per consecutive plane pair
    bool pass() const {
        for (const auto& p : pairs)
            if (p.intersects_inside) return false;
        return true;
    }
};

struct SpokeSite {
    Vec3 position;
    Vec3 up_dir;  // unit; the down spoke points along -up_dir
    double r_up = 0, r_down = 0;
    Vec3 tip_up, tip_down;
    int face_up = -1, face_down = -1;  // faces hit by the spoke rays
    int station = 0;
    int side = 0;  // 0 spinal, +1 right vein, -1 left vein
    int slot = 0;  // vein sample index 1..m, 0 for the spinal site
};

struct SpokeGrid {
    std::vector<SpokeSite> sites;  // station-major: spinal, right 1..m, left 1..m
    int stations = 0;
    int per_side = 0;
};

struct StationFrames {
    // frame = columns (n, b, b_perp); quaternion views derived on demand
    std::vector<Mat3> spine;                 // N+2 points: vertex, stations, vertex
    std::vector<std::vector<Mat3>> sections; // per station, along the section curve
    std::vector<double> rotation_offsets;    // angle(b_perp_spine, b_section) per station
};

struct SweptModel {
    SheetFit sheet;
    SpineFit spine;
    Gc2dModel flat_gc;  // semi-chordal structure of the flattened sheet
    PlaneMode mode = PlaneMode::RelaxedSpineChordalPlanes;
    int stations = 0;
    int vein_samples = 0;
    std::vector<CrossSection> sections;
    RccReport rcc;
    SpokeGrid spokes;
    StationFrames frames;
    std::vector<double> vein_len_right, vein_len_left;
    std::vector<Mat3> rmf;  // normal mode: rotation-minimizing frames per station
};

struct SweepOptions {
    int sheet_degree = 2;
    int spine_degree = 2;
    int stations = 15;
    int vein_samples = 3;
    PlaneMode mode = PlaneMode::RelaxedSpineChordalPlanes;
    double cms_pitch = 0;  // 0 = auto
    bool allow_irregular = false;
};

// Slicing planes, veins and the RCC report for an already fitted sheet and
// spine. Fills sections, rcc, flat_gc and frames of the returned model.
SweptModel build_cross_sections(const SheetFit& sheet, const SpineFit& spine,
                                const TriangleMesh& mesh, const BoundaryDivision& division,
                                int stations, PlaneMode mode);

// Up/down spokes at the spinal station and at m interior samples per vein.
// Tips by ray casting against the faces of the matching boundary part.
void compute_spokes(SweptModel& model, const TriangleMesh& mesh,
                    const BoundaryDivision& division, int samples_per_vein);

// Full sweep fit from a CMS point set.
SweptModel fit_swept_model(const TriangleMesh& mesh, const BoundaryDivision& division,
                           const CmsPointSet3& cms, const SweepOptions& options);

// Double-reflection rotation-minimizing frames along a polyline; columns are
// (tangent, normal, binormal).
std::vector<Mat3> rotation_minimizing_frames(const std::vector<Vec3>& points,
                                             const Vec3& seed_normal);

// Columns (n, b, n x b) with b the tangent re-orthonormalized against n.
Mat3 orthonormal_frame(const Vec3& normal, const Vec3& tangent);

void save_swept_model_ply(const SweptModel& model, const std::string& directory);

}  // namespace dss
