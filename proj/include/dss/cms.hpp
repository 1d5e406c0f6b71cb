#pragma once

#include <dss/common.hpp>
#include <dss/division.hpp>
#include <dss/mesh.hpp>
#include <dss/polygon.hpp>

namespace dss {

// Interface of the distance fields to the two boundary parts: the set where
// the nearest distance to the top part equals the nearest distance to the
// bottom part, sampled on a regular grid of pitch h.
struct CmsPointSet3 {
    std::vector<Vec3> points;
    std::vector<double> residuals;  // |d+ - d-| at each point
    double spacing = 0;             // grid pitch h
};

struct CmsPointSet2 {
    std::vector<Vec2> points;
    std::vector<double> residuals;
    double spacing = 0;
};

struct CmsOptions {
    double pitch = 0;  // 0 = bounding-box diagonal / 60
    // grid nodes participate only when min(d+, d-) exceeds this many pitches,
    // keeping the interface clear of the crest
    double interior_margin = 1.5;
};

CmsPointSet3 extract_cms(const TriangleMesh& mesh, const BoundaryDivision& division,
                         const CmsOptions& options = {});

// Frame the interior grid is sampled in: vertex-cloud PCA oriented by the
// division (third axis toward the top part, first axis anchored to a crest
// vertex), so a rigidly moved mesh yields the rigidly moved sample set.
Mat3 division_axes(const TriangleMesh& mesh, const BoundaryDivision& division);

// The 2D variant takes a labeled polygon (top/bottom arcs).
CmsPointSet2 extract_cms(const Polygon2& polygon, const CmsOptions& options = {});

void save_cms_ply(const CmsPointSet3& cms, const std::string& path);

}  // namespace dss
