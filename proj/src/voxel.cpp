#include <dss/voxel.hpp>

#include <algorithm>

namespace dss {

long VoxelGrid::count() const {
    long c = 0;
    for (auto v : occupied) c += v;
    return c;
}

namespace {

// One parity sweep along `axis`; adds a vote into `votes` for cells whose
// (jittered) row ray is inside the surface at the cell center.
void sweep_axis(const TriBvh& bvh, VoxelGrid& g, int axis, std::vector<std::uint8_t>& votes) {
    const int dims[3] = {g.nx, g.ny, g.nz};
    const int u_axis = (axis + 1) % 3, v_axis = (axis + 2) % 3;
    const int nu = dims[u_axis], nv = dims[v_axis], nw = dims[axis];

    parallel_for(nu * nv, [&](int row) {
        const int iu = row % nu, iv = row / nu;
        Rng jitter(0x5eedULL + std::uint64_t(axis) * 1000003ULL + std::uint64_t(row));
        Vec3 origin;
        origin[axis] = g.lo[axis] - g.step[axis];
        origin[u_axis] = g.lo[u_axis] + (iu + 0.5 + 0.4 * (jitter.uniform() - 0.5)) * g.step[u_axis];
        origin[v_axis] = g.lo[v_axis] + (iv + 0.5 + 0.4 * (jitter.uniform() - 0.5)) * g.step[v_axis];
        Vec3 dir = Vec3::Zero();
        dir[axis] = 1.0;

        std::vector<double> ts;
        bvh.all_hits(origin, dir, ts);
        std::sort(ts.begin(), ts.end());

        std::size_t h = 0;
        for (int iw = 0; iw < nw; ++iw) {
            const double t_center = (iw + 1.5) * g.step[axis];
            while (h < ts.size() && ts[h] < t_center) ++h;
            if (h % 2 == 1) {
                int ijk[3];
                ijk[axis] = iw;
                ijk[u_axis] = iu;
                ijk[v_axis] = iv;
                ++votes[g.index(ijk[0], ijk[1], ijk[2])];
            }
        }
    });
}

}  // namespace

VoxelGrid voxelize(const TriBvh& bvh, const Aabb& box, int resolution) {
    if (resolution < 16) throw Error("voxel", "resolution must be >= 16");
    VoxelGrid g;
    g.lo = box.lo;
    g.nx = g.ny = g.nz = resolution;
    g.step = box.extent() / double(resolution);
    for (int k = 0; k < 3; ++k)
        if (g.step[k] <= 0) throw Error("voxel", "degenerate bounding box");
    std::vector<std::uint8_t> votes(std::size_t(g.nx) * g.ny * g.nz, 0);
    for (int axis = 0; axis < 3; ++axis) sweep_axis(bvh, g, axis, votes);
    g.occupied.resize(votes.size());
    for (std::size_t i = 0; i < votes.size(); ++i) g.occupied[i] = votes[i] >= 2;
    return g;
}

double jaccard_volume(const TriBvh& a, const TriBvh& b, int resolution) {
    if (resolution < 16) throw Error("voxel", "resolution must be >= 16");
    const double tiny = 1e-12;
    if (std::abs(a.mesh().signed_volume()) < tiny || std::abs(b.mesh().signed_volume()) < tiny)
        throw Error("voxel", "zero-volume input mesh");

    Aabb joint = a.mesh().bounds();
    joint.expand(b.mesh().bounds());
    // pad by one cell so boundary faces are interior to the grid
    const Vec3 pad = joint.extent() / double(resolution);
    joint.lo -= pad;
    joint.hi += pad;

    const VoxelGrid ga = voxelize(a, joint, resolution);
    const VoxelGrid gb = voxelize(b, joint, resolution);
    long inter = 0, uni = 0;
    for (std::size_t i = 0; i < ga.occupied.size(); ++i) {
        const bool ia = ga.occupied[i], ib = gb.occupied[i];
        inter += ia && ib;
        uni += ia || ib;
    }
    if (uni == 0) throw Error("voxel", "both meshes voxelize to empty sets");
    return double(inter) / double(uni);
}

double jaccard_volume(const TriangleMesh& a, const TriangleMesh& b, int resolution) {
    const TriBvh ba(a), bb(b);
    return jaccard_volume(ba, bb, resolution);
}

}  // namespace dss
