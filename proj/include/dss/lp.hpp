#pragma once

#include <dss/common.hpp>
#include <dss/sweep.hpp>

namespace dss {

// The locally parameterized tuple of a fitted swept model: relative frame
// rotations, connection vectors and spoke data, all expressed in parent or
// local frame coordinates so the representation is rigid-invariant.
struct LpDssRep {
    // tree: one entry per frame, parent[root] == -1
    std::vector<int> parent;
    int root = -1;

    // GOP tuple; the root's rotation entry is the identity (its orientation
    // carries no rigid-invariant information and never varies)
    std::vector<Quat> frames;              // child-in-parent rotations
    std::vector<int> connection_child;     // frame index of connection j
    std::vector<Vec3> connection_dirs;     // unit, in the parent frame
    std::vector<double> connection_lens;
    std::vector<Vec3> spoke_dirs;          // up direction in the local frame
    std::vector<double> spoke_lens_up, spoke_lens_down;

    // site bookkeeping (station, side, slot per frame) and the root pose;
    // not part of the GOP tuple
    std::vector<int> site_station, site_side, site_slot;
    Vec3 root_origin = Vec3::Zero();
    Quat root_world = Quat::Identity();
    std::vector<Vec3> origins;  // world frame origins, for reconstruction checks

    struct Meta {
        std::string mode = "relaxed-chordal";
        int sheet_degree = 0, spine_degree = 0;
        int stations = 0, vein_samples = 0;
        double delta = 0;
    } meta;

    int frame_count() const { return int(frames.size()); }
    int connection_count() const { return int(connection_dirs.size()); }

    void validate() const;  // tuple sizes, unit norms, tree shape
};

// Frames at the interior spinal stations (the first and last station are
// treated as endpoints and carry no frame) and at the vein samples; the tree
// roots at the central station and follows the spine outward and each vein
// outward from its station.
LpDssRep build_lp_dssrep(const SweptModel& model);

// Geometric mean of all connection and spoke lengths.
double lp_size(const LpDssRep& rep);

// Divides every length by lp_size; directions and rotations unchanged.
LpDssRep normalize(const LpDssRep& rep);

// World origins recovered by composing connection vectors from the root.
std::vector<Vec3> reconstruct_origins(const LpDssRep& rep);

void save_lp_json(const LpDssRep& rep, const std::string& path);
LpDssRep load_lp_json(const std::string& path);

}  // namespace dss
