#pragma once

#include <dss/common.hpp>
#include <dss/mesh.hpp>
#include <dss/ray.hpp>

namespace dss {

// Occupancy over a regular grid; cell (i,j,k) center at lo + (i+1/2)*step.
struct VoxelGrid {
    Vec3 lo;
    Vec3 step;
    int nx = 0, ny = 0, nz = 0;
    std::vector<std::uint8_t> occupied;  // x-fastest

    std::size_t index(int i, int j, int k) const {
        return (std::size_t(k) * ny + j) * nx + i;
    }
    long count() const;
};

// Scanline parity along each of the three axes with a deterministic sub-voxel
// jitter, combined by majority vote per cell.
VoxelGrid voxelize(const TriBvh& bvh, const Aabb& box, int resolution);

// |A intersect B| / |A union B| over a shared grid spanning the joint
// bounding box. resolution >= 16 cells per axis.
double jaccard_volume(const TriangleMesh& a, const TriangleMesh& b, int resolution = 128);
double jaccard_volume(const TriBvh& a, const TriBvh& b, int resolution = 128);

}  // namespace dss
