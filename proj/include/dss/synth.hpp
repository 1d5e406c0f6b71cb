#pragma once

#include <dss/common.hpp>
#include <dss/mesh.hpp>

#include <optional>

namespace dss {

struct ProtrusionSpec {
    // Cap center as a fraction of the arc from the +z pole toward the +x
    // vertex on the unit parameter sphere.
    double arc_fraction = 0.6;
    double angular_radius_deg = 25.0;
    double height = 0.0;  // world units; default 0.3*c applied by simulate_groups
};

struct BendSpec {
    double elbow_x = 0.0;  // world units along x
    double angle_deg = 0.0;
    double blend_width = 0.0;  // 0 = tenth of the remaining +x extent
};

struct SynthSpec {
    double a = 2.0, b = 1.0, c = 0.5;  // principal radii, a > b > c > 0
    std::optional<ProtrusionSpec> protrusion;
    std::optional<BendSpec> bend;
    int resolution = 3;  // icosphere subdivision level
    std::uint64_t seed = 0;

    void validate() const;
};

// Anisotropically scaled subdivided icosahedron; closed, genus 0, outward.
TriangleMesh make_ellipsoid(double a, double b, double c, int resolution);

// Applies the protrusion and/or bend of the spec to a generated ellipsoid.
// Vertices outside the protrusion cap are exactly unmoved; the bend is a
// rigid rotation beyond the blend band.
TriangleMesh deform(const TriangleMesh& mesh, const SynthSpec& spec);

struct SimulatedGroups {
    std::vector<TriangleMesh> group_a;  // no effect
    std::vector<TriangleMesh> group_b;  // protrusion applied when requested
    std::vector<SynthSpec> specs_a, specs_b;
};

enum class GroupEffect { None, Protrusion };

// Two cohorts with per-object radii a~U(1.8,2.2), b~U(0.9,1.1),
// c~U(0.45,0.55); group B receives the protrusion (height 0.3*c).
SimulatedGroups simulate_groups(int n_per_group, GroupEffect effect, std::uint64_t seed,
                                int resolution = 3);

// Writes numbered meshes plus manifest.json with spec and seed.
void write_cohort(const std::vector<TriangleMesh>& meshes, const std::vector<SynthSpec>& specs,
                  const std::string& directory, const std::string& format = "obj");

}  // namespace dss
