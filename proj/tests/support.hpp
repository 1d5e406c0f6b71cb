#pragma once

#include <dss/common.hpp>
#include <dss/mesh.hpp>

#include <vector>

namespace dss::testing {

// Unit cube centered at `center`, 12 triangles, outward orientation.
inline TriangleMesh unit_cube(const Vec3& center = Vec3(0.5, 0.5, 0.5)) {
    std::vector<Vec3> v;
    for (int i = 0; i < 8; ++i)
        v.push_back(center + Vec3((i & 1) - 0.5, ((i >> 1) & 1) - 0.5, ((i >> 2) & 1) - 0.5));
    const std::vector<std::array<int, 3>> f = {
        {0, 2, 1}, {1, 2, 3},  // z-
        {4, 5, 6}, {5, 7, 6},  // z+
        {0, 1, 4}, {1, 5, 4},  // y-
        {2, 6, 3}, {3, 6, 7},  // y+
        {0, 4, 2}, {2, 4, 6},  // x-
        {1, 3, 5}, {3, 7, 5},  // x+
    };
    return TriangleMesh::build(v, f);
}

}  // namespace dss::testing
