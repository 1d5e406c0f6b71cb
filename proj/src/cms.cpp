#include <dss/cms.hpp>

#include <dss/flatten.hpp>
#include <dss/kdtree.hpp>
#include <dss/ray.hpp>

#include <map>

namespace dss {

Mat3 division_axes(const TriangleMesh& mesh, const BoundaryDivision& division) {
    PcaFrame frame = pca_frame(mesh.vertices());

    Vec3 mean_top = Vec3::Zero(), mean_bottom = Vec3::Zero();
    long nt = 0, nb = 0;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        if (division.is_top(v)) {
            mean_top += mesh.vertices()[v];
            ++nt;
        } else {
            mean_bottom += mesh.vertices()[v];
            ++nb;
        }
    }
    if (nt == 0 || nb == 0) throw Error("cms", "degenerate division");
    const Vec3 top_dir = (mean_top / double(nt) - mean_bottom / double(nb)).normalized();

    Vec3 anchor_dir = frame.axes.col(0);
    if (!division.crest.empty()) {
        const Vec3 axis1 = frame.axes.col(0);
        double pmin = std::numeric_limits<double>::max(), pmax = -pmin;
        for (int v : division.crest) {
            const double p = axis1.dot(mesh.vertices()[v] - frame.centroid);
            pmin = std::min(pmin, p);
            pmax = std::max(pmax, p);
        }
        const double band = 0.05 * (pmax - pmin);
        int anchor = -1;
        for (int v : division.crest) {
            const double p = axis1.dot(mesh.vertices()[v] - frame.centroid);
            if (std::abs(p) >= std::max(std::abs(pmin), std::abs(pmax)) - band)
                if (anchor < 0 || v < anchor) anchor = v;
        }
        if (anchor >= 0) anchor_dir = mesh.vertices()[anchor] - frame.centroid;
    }
    frame.orient(top_dir, anchor_dir);
    return frame.axes;
}

namespace {

// Union-find connectivity of the emitted points under the 2h-neighborhood
// graph, via spatial hashing into 2h cells.
template <typename PointT>
bool single_component(const std::vector<PointT>& pts, double h) {
    if (pts.empty()) return false;
    const double cell = 2.0 * h;
    std::vector<int> parent(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) parent[i] = int(i);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    auto unite = [&](int a, int b) { parent[find(a)] = find(b); };

    using Key = std::array<long, 3>;
    std::map<Key, std::vector<int>> buckets;
    auto key_of = [&](const PointT& p) {
        Key k{0, 0, 0};
        for (int d = 0; d < p.size(); ++d) k[d] = long(std::floor(p[d] / cell));
        return k;
    };
    for (std::size_t i = 0; i < pts.size(); ++i) buckets[key_of(pts[i])].push_back(int(i));

    for (std::size_t i = 0; i < pts.size(); ++i) {
        Key k = key_of(pts[i]);
        for (long dx = -1; dx <= 1; ++dx)
            for (long dy = -1; dy <= 1; ++dy)
                for (long dz = -1; dz <= 1; ++dz) {
                    Key nk{k[0] + dx, k[1] + dy, k[2] + dz};
                    auto it = buckets.find(nk);
                    if (it == buckets.end()) continue;
                    for (int j : it->second)
                        if (j > int(i) && (pts[j] - pts[i]).norm() <= cell) unite(int(i), j);
                }
    }
    const int root = find(0);
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (find(int(i)) != root) return false;
    return true;
}

// Sample points covering a triangle at spacing <= pitch: recursive midpoint
// subdivision, emitting corners at the finest level.
void sample_triangle(const Vec3& a, const Vec3& b, const Vec3& c, double pitch,
                     std::vector<Vec3>& out, int depth = 0) {
    const double longest =
        std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
    if (longest <= pitch || depth >= 8) {
        out.push_back(a);
        out.push_back(b);
        out.push_back(c);
        return;
    }
    const Vec3 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
    sample_triangle(a, ab, ca, pitch, out, depth + 1);
    sample_triangle(b, bc, ab, pitch, out, depth + 1);
    sample_triangle(c, ca, bc, pitch, out, depth + 1);
    sample_triangle(ab, bc, ca, pitch, out, depth + 1);
}

}  // namespace

CmsPointSet3 extract_cms(const TriangleMesh& mesh, const BoundaryDivision& division,
                         const CmsOptions& options) {
    // sample in the division frame so the grid is rigid-covariant
    const Mat3 axes = division_axes(mesh, division);
    Vec3 centroid = Vec3::Zero();
    for (const auto& v : mesh.vertices()) centroid += v;
    centroid /= double(mesh.vertex_count());
    Aabb box;  // in local coordinates
    for (const auto& v : mesh.vertices()) box.expand(axes.transpose() * (v - centroid));

    const double diag = box.diagonal();
    double h = options.pitch > 0 ? options.pitch : diag / 60.0;
    if (h > diag / 50.0)
        throw Error("cms", "pitch must be at most 1/50 of the bounding-box diagonal");

    // boundary samples per part; faces assigned by vertex-label majority
    std::vector<Vec3> top, bottom;
    for (int f = 0; f < mesh.face_count(); ++f) {
        const auto& t = mesh.faces()[f];
        const int top_votes = division.is_top(t[0]) + division.is_top(t[1]) + division.is_top(t[2]);
        sample_triangle(mesh.vertices()[t[0]], mesh.vertices()[t[1]], mesh.vertices()[t[2]], h,
                        top_votes >= 2 ? top : bottom);
    }
    if (top.empty() || bottom.empty()) throw Error("cms", "degenerate boundary division");
    const KdTree3 top_tree(std::move(top));
    const KdTree3 bottom_tree(std::move(bottom));

    const TriBvh bvh(mesh);
    // lattice symmetric about the centroid, so flipping any frame axis maps
    // the node set onto itself and the interface is independent of axis signs
    int half[3];
    for (int k = 0; k < 3; ++k)
        half[k] = int(std::ceil(std::max(-box.lo[k], box.hi[k]) / h));
    const int nx = 2 * half[0] + 1, ny = 2 * half[1] + 1, nz = 2 * half[2] + 1;

    const double margin = options.interior_margin * h;
    const double unset = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> f(std::size_t(nx) * ny * nz, unset);
    auto idx = [&](int i, int j, int k) { return (std::size_t(k) * ny + j) * nx + i; };
    auto node = [&](int i, int j, int k) {
        return Vec3(centroid + axes * Vec3((i - half[0]) * h, (j - half[1]) * h,
                                           (k - half[2]) * h));
    };

    // values this close to zero are arithmetic noise on exact ties; snapping
    // them keeps the emission pattern stable across rigid motions
    const double f_snap = 1e-9 * h;
    parallel_for(nz, [&](int k) {
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const Vec3 p = node(i, j, k);
                if (!bvh.inside(p)) continue;
                const double dp = top_tree.nearest_distance(p);
                const double dm = bottom_tree.nearest_distance(p);
                if (std::min(dp, dm) < margin) continue;
                const double v = dp - dm;
                f[idx(i, j, k)] = std::abs(v) < f_snap ? 0.0 : v;
            }
    });

    CmsPointSet3 cms;
    cms.spacing = h;
    auto emit = [&](const Vec3& p) {
        const double res =
            std::abs(top_tree.nearest_distance(p) - bottom_tree.nearest_distance(p));
        if (res <= h) {
            cms.points.push_back(p);
            cms.residuals.push_back(res);
        }
    };
    // nodes exactly on the interface emit themselves; edges need a strict
    // sign change, so the output is symmetric under f -> -f (label swap)
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const double fa = f[idx(i, j, k)];
                if (std::isnan(fa)) continue;
                if (fa == 0.0) {
                    emit(node(i, j, k));
                    continue;
                }
                const int di[3] = {1, 0, 0}, dj[3] = {0, 1, 0}, dk[3] = {0, 0, 1};
                for (int d = 0; d < 3; ++d) {
                    const int i2 = i + di[d], j2 = j + dj[d], k2 = k + dk[d];
                    if (i2 >= nx || j2 >= ny || k2 >= nz) continue;
                    const double fb = f[idx(i2, j2, k2)];
                    if (std::isnan(fb) || fb == 0.0) continue;
                    if ((fa > 0) != (fb > 0)) {
                        const double t = fa / (fa - fb);
                        emit(node(i, j, k) + t * (node(i2, j2, k2) - node(i, j, k)));
                    }
                }
            }

    if (cms.points.empty()) throw Error("cms", "empty interface; division degenerate");
    if (!single_component(cms.points, h))
        throw Error("cms", "interface is disconnected at pitch " + std::to_string(h));
    return cms;
}

CmsPointSet2 extract_cms(const Polygon2& polygon, const CmsOptions& options) {
    if (polygon.labels.size() != polygon.points.size())
        throw Error("cms", "polygon must carry per-vertex labels");
    const double diag = polygon.bbox_diagonal();
    double h = options.pitch > 0 ? options.pitch : diag / 100.0;
    if (h > diag / 50.0)
        throw Error("cms", "pitch must be at most 1/50 of the bounding-box diagonal");

    // densify each boundary segment at spacing <= h; a segment joins the part
    // of its endpoints, split at the midpoint when the labels differ
    std::vector<Vec2> top, bottom;
    for (int i = 0; i < polygon.size(); ++i) {
        const Vec2& a = polygon.at(i);
        const Vec2& b = polygon.at(i + 1);
        const bool la = polygon.labels[i] != 0;
        const bool lb = polygon.labels[(i + 1) % polygon.size()] != 0;
        const int steps = std::max(1, int(std::ceil((b - a).norm() / h)));
        for (int s = 0; s <= steps; ++s) {
            const double t = double(s) / steps;
            const Vec2 p = a + t * (b - a);
            const bool is_top = la == lb ? la : (t < 0.5 ? la : lb);
            (is_top ? top : bottom).push_back(p);
        }
    }
    if (top.empty() || bottom.empty()) throw Error("cms", "degenerate polygon labels");
    const KdTree2 top_tree(std::move(top));
    const KdTree2 bottom_tree(std::move(bottom));

    Vec2 lo, hi;
    polygon.bounding_box(lo, hi);
    const int nx = int(std::ceil((hi - lo).x() / h)) + 1;
    const int ny = int(std::ceil((hi - lo).y() / h)) + 1;
    const double margin = options.interior_margin * h;
    const double unset = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> f(std::size_t(nx) * ny, unset);
    auto idx = [&](int i, int j) { return std::size_t(j) * nx + i; };
    auto node = [&](int i, int j) { return Vec2(lo.x() + i * h, lo.y() + j * h); };

    const double f_snap = 1e-9 * h;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const Vec2 p = node(i, j);
            if (!point_in_polygon(polygon, p)) continue;
            const double dp = top_tree.nearest_distance(p);
            const double dm = bottom_tree.nearest_distance(p);
            if (std::min(dp, dm) < margin) continue;
            const double v = dp - dm;
            f[idx(i, j)] = std::abs(v) < f_snap ? 0.0 : v;
        }

    CmsPointSet2 cms;
    cms.spacing = h;
    auto emit = [&](const Vec2& p) {
        const double res =
            std::abs(top_tree.nearest_distance(p) - bottom_tree.nearest_distance(p));
        if (res <= h) {
            cms.points.push_back(p);
            cms.residuals.push_back(res);
        }
    };
    auto cross = [&](int ia, int ja, int ib, int jb) {
        const double fa = f[idx(ia, ja)], fb = f[idx(ib, jb)];
        if (std::isnan(fb) || fb == 0.0) return;
        if ((fa > 0) != (fb > 0)) {
            const double t = fa / (fa - fb);
            emit(node(ia, ja) + t * (node(ib, jb) - node(ia, ja)));
        }
    };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double fa = f[idx(i, j)];
            if (std::isnan(fa)) continue;
            if (fa == 0.0) {
                emit(node(i, j));
                continue;
            }
            if (i + 1 < nx) cross(i, j, i + 1, j);
            if (j + 1 < ny) cross(i, j, i, j + 1);
        }

    if (cms.points.empty()) throw Error("cms", "empty interface; polygon labels degenerate");
    if (!single_component(cms.points, h))
        throw Error("cms", "interface is disconnected at pitch " + std::to_string(h));
    return cms;
}

void save_cms_ply(const CmsPointSet3& cms, const std::string& path) {
    save_ply_points(cms.points, path);
}

}  // namespace dss
