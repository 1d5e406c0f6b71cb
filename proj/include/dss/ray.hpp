#pragma once

#include <dss/common.hpp>
#include <dss/mesh.hpp>

#include <functional>
#include <optional>

namespace dss {

struct RayHit {
    Vec3 point;
    int face = -1;
    double t = 0;
};

// Axis-aligned BVH over a mesh's triangles. Built once per mesh; read-only
// queries are thread-safe.
class TriBvh {
public:
    explicit TriBvh(const TriangleMesh& mesh);

    // Nearest intersection with t > t_min along a unit direction, optionally
    // restricted to faces accepted by the filter.
    std::optional<RayHit> intersect(const Vec3& origin, const Vec3& direction,
                                    double t_min = 1e-9,
                                    const std::function<bool(int)>* face_filter = nullptr) const;

    // All intersection parameters along the ray (unfiltered), unsorted.
    void all_hits(const Vec3& origin, const Vec3& direction, std::vector<double>& ts) const;

    // Parity test with three deterministically jittered ray directions and
    // majority vote.
    bool inside(const Vec3& point) const;

    const TriangleMesh& mesh() const { return mesh_; }

private:
    struct Node {
        Aabb box;
        int left = -1, right = -1;  // children, or
        int begin = 0, end = 0;     // leaf triangle range
        bool leaf() const { return left < 0; }
    };

    int build(int begin, int end, std::vector<Aabb>& boxes, std::vector<Vec3>& centers);

    const TriangleMesh& mesh_;
    std::vector<Node> nodes_;
    std::vector<int> tri_order_;
};

// Moller-Trumbore. Returns t, or nullopt if no hit with t > t_min.
std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                   const Vec3& b, const Vec3& c, double t_min);

// Spec'd single-call form: nearest hit over the whole mesh. Builds a
// throwaway BVH; use TriBvh directly for repeated queries.
std::optional<RayHit> ray_intersect(const TriangleMesh& mesh, const Vec3& origin,
                                    const Vec3& direction);

}  // namespace dss
