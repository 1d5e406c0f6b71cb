#pragma once

#include <dss/common.hpp>

#include <array>
#include <string>
#include <vector>

namespace dss {

// Closed, genus-0, consistently outward-oriented triangle surface.
// Immutable after construction; safe to share across threads.
class TriangleMesh {
public:
    // Validates manifoldness (every edge shared by exactly two faces with
    // opposite traversal), Euler characteristic V-E+F=2 and positive signed
    // volume, then computes area-weighted vertex normals and adjacency.
    static TriangleMesh build(std::vector<Vec3> vertices,
                              std::vector<std::array<int, 3>> faces);

    // Skips validation. For internally generated surfaces that may be
    // geometrically degenerate (e.g. an implied boundary after vertex
    // collapse) but keep the face structure of a valid mesh.
    static TriangleMesh build_unchecked(std::vector<Vec3> vertices,
                                        std::vector<std::array<int, 3>> faces);

    const std::vector<Vec3>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& faces() const { return faces_; }
    const std::vector<Vec3>& vertex_normals() const { return normals_; }
    const std::vector<std::array<int, 2>>& edges() const { return edges_; }
    const std::vector<int>& neighbors(int v) const { return adjacency_[v]; }

    int vertex_count() const { return int(vertices_.size()); }
    int face_count() const { return int(faces_.size()); }
    int edge_count() const { return int(edges_.size()); }

    double signed_volume() const;
    double surface_area() const;
    double mean_edge_length() const;
    Aabb bounds() const { return bounds_; }
    Vec3 face_normal(int f) const;
    Vec3 face_centroid(int f) const;

private:
    TriangleMesh() = default;
    void finish();  // normals, adjacency, bounds

    std::vector<Vec3> vertices_;
    std::vector<std::array<int, 3>> faces_;
    std::vector<Vec3> normals_;
    std::vector<std::array<int, 2>> edges_;
    std::vector<std::vector<int>> adjacency_;
    Aabb bounds_;
};

enum class MeshFormat { Obj, Ply };

// Format inferred from the extension unless given explicitly.
TriangleMesh load_mesh(const std::string& path);
TriangleMesh load_mesh(const std::string& path, MeshFormat format);

void save_obj(const TriangleMesh& mesh, const std::string& path);
void save_ply(const TriangleMesh& mesh, const std::string& path, bool binary = true);

// Point cloud / polyline PLY helpers used by the exporters.
void save_ply_points(const std::vector<Vec3>& points, const std::string& path);
void save_ply_edges(const std::vector<Vec3>& points,
                    const std::vector<std::array<int, 2>>& segments,
                    const std::string& path);

}  // namespace dss
