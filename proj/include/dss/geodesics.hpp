#pragma once

#include <dss/common.hpp>
#include <dss/mesh.hpp>

namespace dss {

// Shortest-path distances on the mesh edge graph (Dijkstra). With
// `subdivide_once` the graph is densified with edge midpoints connected
// across each face, which tightens the upper bound on the true geodesic.
struct GeodesicField {
    std::vector<int> sources;
    MatX dist;  // |sources| x |V|, world units

    // |sources| x |sources| pairwise block (requires sources[i] ordering).
    MatX pairwise() const;
};

GeodesicField geodesic_distances(const TriangleMesh& mesh, const std::vector<int>& sources,
                                 bool subdivide_once = false);

// Convenience: all-pairs over every vertex.
GeodesicField geodesic_distances(const TriangleMesh& mesh, bool subdivide_once = false);

}  // namespace dss
