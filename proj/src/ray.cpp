#include <dss/ray.hpp>

#include <algorithm>
#include <numeric>

namespace dss {

std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                   const Vec3& b, const Vec3& c, double t_min) {
    const Vec3 e1 = b - a, e2 = c - a;
    const Vec3 p = dir.cross(e2);
    const double det = e1.dot(p);
    if (std::abs(det) < 1e-14) return std::nullopt;
    const double inv = 1.0 / det;
    const Vec3 s = origin - a;
    const double u = s.dot(p) * inv;
    if (u < -1e-12 || u > 1.0 + 1e-12) return std::nullopt;
    const Vec3 q = s.cross(e1);
    const double v = dir.dot(q) * inv;
    if (v < -1e-12 || u + v > 1.0 + 1e-12) return std::nullopt;
    const double t = e2.dot(q) * inv;
    if (t <= t_min) return std::nullopt;
    return t;
}

namespace {

bool ray_box(const Vec3& o, const Vec3& inv_d, const Aabb& b, double t_max) {
    double t0 = 0.0, t1 = t_max;
    for (int k = 0; k < 3; ++k) {
        double lo = (b.lo[k] - o[k]) * inv_d[k];
        double hi = (b.hi[k] - o[k]) * inv_d[k];
        if (inv_d[k] < 0) std::swap(lo, hi);
        t0 = std::max(t0, lo);
        t1 = std::min(t1, hi);
        if (t0 > t1) return false;
    }
    return true;
}

}  // namespace

TriBvh::TriBvh(const TriangleMesh& mesh) : mesh_(mesh) {
    const int nf = mesh.face_count();
    tri_order_.resize(nf);
    std::iota(tri_order_.begin(), tri_order_.end(), 0);
    std::vector<Aabb> boxes(nf);
    std::vector<Vec3> centers(nf);
    for (int f = 0; f < nf; ++f) {
        const auto& t = mesh.faces()[f];
        for (int k = 0; k < 3; ++k) boxes[f].expand(mesh.vertices()[t[k]]);
        centers[f] = boxes[f].center();
    }
    nodes_.reserve(2 * nf);
    build(0, nf, boxes, centers);
}

int TriBvh::build(int begin, int end, std::vector<Aabb>& boxes, std::vector<Vec3>& centers) {
    const int id = int(nodes_.size());
    nodes_.emplace_back();
    Aabb box;
    for (int i = begin; i < end; ++i) box.expand(boxes[tri_order_[i]]);
    nodes_[id].box = box;
    if (end - begin <= 4) {
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }
    int axis = 0;
    const Vec3 ext = box.extent();
    if (ext.y() > ext.x()) axis = 1;
    if (ext.z() > ext[axis]) axis = 2;
    const int mid = (begin + end) / 2;
    std::nth_element(tri_order_.begin() + begin, tri_order_.begin() + mid,
                     tri_order_.begin() + end,
                     [&](int a, int b) { return centers[a][axis] < centers[b][axis]; });
    const int l = build(begin, mid, boxes, centers);
    const int r = build(mid, end, boxes, centers);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
}

std::optional<RayHit> TriBvh::intersect(const Vec3& origin, const Vec3& direction, double t_min,
                                        const std::function<bool(int)>* face_filter) const {
    if (nodes_.empty()) return std::nullopt;
    const Vec3 inv_d = direction.cwiseInverse();
    double best_t = std::numeric_limits<double>::max();
    int best_f = -1;
    std::vector<int> stack;
    stack.reserve(64);
    stack.push_back(0);
    while (!stack.empty()) {
        const Node& n = nodes_[stack.back()];
        stack.pop_back();
        if (!ray_box(origin, inv_d, n.box, best_t)) continue;
        if (n.leaf()) {
            for (int i = n.begin; i < n.end; ++i) {
                const int f = tri_order_[i];
                if (face_filter && !(*face_filter)(f)) continue;
                const auto& tri = mesh_.faces()[f];
                const auto t = ray_triangle(origin, direction, mesh_.vertices()[tri[0]],
                                            mesh_.vertices()[tri[1]], mesh_.vertices()[tri[2]],
                                            t_min);
                if (t && *t < best_t) {
                    best_t = *t;
                    best_f = f;
                }
            }
        } else {
            stack.push_back(n.left);
            stack.push_back(n.right);
        }
    }
    if (best_f < 0) return std::nullopt;
    return RayHit{origin + best_t * direction, best_f, best_t};
}

void TriBvh::all_hits(const Vec3& origin, const Vec3& direction, std::vector<double>& ts) const {
    ts.clear();
    if (nodes_.empty()) return;
    const Vec3 inv_d = direction.cwiseInverse();
    std::vector<int> stack;
    stack.reserve(64);
    stack.push_back(0);
    while (!stack.empty()) {
        const Node& n = nodes_[stack.back()];
        stack.pop_back();
        if (!ray_box(origin, inv_d, n.box, std::numeric_limits<double>::max())) continue;
        if (n.leaf()) {
            for (int i = n.begin; i < n.end; ++i) {
                const int f = tri_order_[i];
                const auto& tri = mesh_.faces()[f];
                const auto t = ray_triangle(origin, direction, mesh_.vertices()[tri[0]],
                                            mesh_.vertices()[tri[1]], mesh_.vertices()[tri[2]],
                                            1e-12);
                if (t) ts.push_back(*t);
            }
        } else {
            stack.push_back(n.left);
            stack.push_back(n.right);
        }
    }
}

bool TriBvh::inside(const Vec3& point) const {
    // Directions with irrational-ish components so axis-aligned geometry is
    // never hit edge-on by all three.
    static const Vec3 dirs[3] = {
        Vec3(0.57321, 0.33761, 0.74667).normalized(),
        Vec3(-0.27491, 0.84312, 0.46177).normalized(),
        Vec3(0.64219, -0.52114, 0.56201).normalized(),
    };
    int votes = 0;
    std::vector<double> ts;
    for (const auto& d : dirs) {
        all_hits(point, d, ts);
        if (ts.size() % 2 == 1) ++votes;
    }
    return votes >= 2;
}

std::optional<RayHit> ray_intersect(const TriangleMesh& mesh, const Vec3& origin,
                                    const Vec3& direction) {
    return TriBvh(mesh).intersect(origin, direction);
}

}  // namespace dss
