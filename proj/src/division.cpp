#include <dss/division.hpp>

#include <Eigen/Eigenvalues>

#include <fstream>
#include <map>
#include <numeric>

namespace dss {

namespace {

// Greedy farthest-point sampling on the edge graph. Returns the chosen
// vertex indices together with their full Dijkstra rows, which double as the
// propagation field.
GeodesicField farthest_point_sample(const TriangleMesh& mesh, int count, bool subdivide) {
    GeodesicField field;
    field.sources.reserve(count);
    field.dist.resize(count, mesh.vertex_count());

    std::vector<double> to_set(mesh.vertex_count(), std::numeric_limits<double>::max());
    int next = 0;
    for (int k = 0; k < count; ++k) {
        field.sources.push_back(next);
        const GeodesicField row = geodesic_distances(mesh, {next}, subdivide);
        field.dist.row(k) = row.dist.row(0);
        double far_d = -1;
        for (int v = 0; v < mesh.vertex_count(); ++v) {
            to_set[v] = std::min(to_set[v], row.dist(0, v));
            if (to_set[v] > far_d) {
                far_d = to_set[v];
                next = v;
            }
        }
    }
    return field;
}

MatX affinity_matrix(const std::vector<Vec3>& normals, const MatX& geo,
                     const DivisionOptions& opt) {
    const int n = int(normals.size());
    const double dmax = geo.maxCoeff();
    if (dmax <= 0) throw Error("division", "degenerate geodesic distances");
    MatX w(n, n);
    parallel_for(n, [&](int i) {
        for (int j = 0; j < n; ++j) {
            const double dot = normals[i].dot(normals[j]);
            const double d = geo(i, j) / dmax;
            w(i, j) = opt.variant == AffinityVariant::Literal
                          ? std::exp(opt.delta * dot * d)
                          : std::exp(-opt.delta * (1.0 - dot) * d);
        }
    });
    return w;
}

// Eigenvector of the second-smallest eigenvalue of I - D^{-1/2} W D^{-1/2}.
VecX fiedler_vector(const MatX& w, int dense_limit) {
    const int n = int(w.rows());
    const VecX d = w.rowwise().sum();
    if ((d.array() <= 0).any()) throw Error("division", "zero-degree row in affinity");
    const VecX dmh = d.array().rsqrt();

    MatX lap = -(dmh.asDiagonal() * w * dmh.asDiagonal());
    lap.diagonal().array() += 1.0;
    lap = 0.5 * (lap + lap.transpose()).eval();

    if (n <= dense_limit) {
        Eigen::SelfAdjointEigenSolver<MatX> solver(lap);
        if (solver.info() != Eigen::Success)
            throw Error("division", "eigensolver failed to converge");
        return solver.eigenvectors().col(1);
    }

    // Lanczos with full reorthogonalization on A = 2I - L, restricted to the
    // complement of the known null-space direction D^{1/2} 1. The largest
    // Ritz pair there corresponds to the second-smallest eigenvalue of L.
    VecX v0 = dmh.cwiseInverse();  // D^{1/2} 1
    v0.normalize();
    const int steps = std::min(n - 1, 200);
    MatX basis(n, steps);
    VecX alpha(steps), beta(steps);

    Rng rng(0x1ced);
    VecX q(n);
    for (int i = 0; i < n; ++i) q[i] = rng.uniform(-1, 1);
    q -= v0 * v0.dot(q);
    q.normalize();

    int m = 0;
    VecX prev = VecX::Zero(n);
    double prev_beta = 0;
    for (int k = 0; k < steps; ++k) {
        basis.col(k) = q;
        VecX z = 2.0 * q - lap * q;
        z -= v0 * v0.dot(z);
        alpha[k] = q.dot(z);
        z -= alpha[k] * q + prev_beta * prev;
        for (int j = 0; j <= k; ++j) z -= basis.col(j) * basis.col(j).dot(z);  // reorth
        const double b = z.norm();
        m = k + 1;
        if (b < 1e-10) break;
        beta[k] = b;
        prev = q;
        prev_beta = b;
        q = z / b;
    }

    MatX tri = MatX::Zero(m, m);
    for (int k = 0; k < m; ++k) {
        tri(k, k) = alpha[k];
        if (k + 1 < m) tri(k, k + 1) = tri(k + 1, k) = beta[k];
    }
    Eigen::SelfAdjointEigenSolver<MatX> small(tri);
    if (small.info() != Eigen::Success) throw Error("division", "Lanczos eigensolve failed");
    return basis.leftCols(m) * small.eigenvectors().col(m - 1);
}

std::vector<int> component_ids(const TriangleMesh& mesh, const std::vector<std::uint8_t>& labels,
                               std::uint8_t cls, int& count) {
    std::vector<int> comp(mesh.vertex_count(), -1);
    count = 0;
    for (int s = 0; s < mesh.vertex_count(); ++s) {
        if (labels[s] != cls || comp[s] >= 0) continue;
        std::vector<int> stack{s};
        comp[s] = count;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v : mesh.neighbors(u))
                if (labels[v] == cls && comp[v] < 0) {
                    comp[v] = count;
                    stack.push_back(v);
                }
        }
        ++count;
    }
    return comp;
}

// Relabel every component except the largest of each class.
void cleanup_islands(const TriangleMesh& mesh, std::vector<std::uint8_t>& labels) {
    for (int pass = 0; pass < 16; ++pass) {
        bool changed = false;
        for (std::uint8_t cls : {std::uint8_t(1), std::uint8_t(0)}) {
            int count = 0;
            const auto comp = component_ids(mesh, labels, cls, count);
            if (count <= 1) continue;
            std::vector<long> sizes(count, 0);
            for (int v = 0; v < mesh.vertex_count(); ++v)
                if (labels[v] == cls) ++sizes[comp[v]];
            const int keep = int(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
            for (int v = 0; v < mesh.vertex_count(); ++v)
                if (labels[v] == cls && comp[v] != keep) {
                    labels[v] = cls ? 0 : 1;
                    changed = true;
                }
        }
        if (!changed) return;
    }
}

Vec3 third_pca_axis(const std::vector<Vec3>& pts) {
    Vec3 mean = Vec3::Zero();
    for (const auto& p : pts) mean += p;
    mean /= double(pts.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& p : pts) {
        const Vec3 d = p - mean;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
    Vec3 axis = solver.eigenvectors().col(0);  // ascending: least variance first
    // canonical sign: largest-magnitude component positive
    int imax = 0;
    for (int k = 1; k < 3; ++k)
        if (std::abs(axis[k]) > std::abs(axis[imax])) imax = k;
    if (axis[imax] < 0) axis = -axis;
    return axis;
}

}  // namespace

bool classes_connected(const TriangleMesh& mesh, const std::vector<std::uint8_t>& labels) {
    long top = std::count(labels.begin(), labels.end(), std::uint8_t(1));
    if (top == 0 || top == long(labels.size())) return false;
    int ct = 0, cb = 0;
    component_ids(mesh, labels, 1, ct);
    component_ids(mesh, labels, 0, cb);
    return ct == 1 && cb == 1;
}

BoundaryDivision divide_boundary(const TriangleMesh& mesh, const DivisionOptions& opt) {
    if (opt.delta <= 0) throw Error("division", "delta must be positive");

    const int nv = mesh.vertex_count();
    GeodesicField field;
    if (nv <= opt.max_vertices) {
        field = geodesic_distances(mesh, opt.subdivide_geodesics);
    } else {
        field = farthest_point_sample(mesh, opt.max_vertices, opt.subdivide_geodesics);
    }
    const int ns = int(field.sources.size());

    std::vector<Vec3> normals(ns);
    for (int i = 0; i < ns; ++i) normals[i] = mesh.vertex_normals()[field.sources[i]];

    const MatX pairwise = field.pairwise();
    const MatX w = affinity_matrix(normals, pairwise, opt);
    const VecX fiedler = fiedler_vector(w, opt.dense_limit);

    // Entries at (numerically) zero occur on exactly symmetric meshes, where
    // the eigenvector is odd across the split; their sign is noise. Label
    // them from the nearest confident sample, comparing distances with a fat
    // tolerance band and breaking ties by index, so the partition depends
    // only on geometry and mesh combinatorics, not on arithmetic noise.
    const double f_scale = fiedler.cwiseAbs().maxCoeff();
    const double tau = 1e-6 * f_scale;
    const double d_scale = pairwise.maxCoeff();
    auto banded_argmin = [&](auto&& dist_of) {
        double dmin = std::numeric_limits<double>::max();
        for (int i = 0; i < ns; ++i) dmin = std::min(dmin, dist_of(i));
        const double band = dmin * (1 + 1e-9) + 1e-12 * d_scale;
        for (int i = 0; i < ns; ++i)
            if (dist_of(i) <= band) return i;
        return 0;
    };

    std::vector<std::int8_t> sample_labels(ns, -1);
    int confident = 0;
    for (int i = 0; i < ns; ++i)
        if (std::abs(fiedler[i]) >= tau) {
            sample_labels[i] = fiedler[i] > 0 ? 1 : 0;
            ++confident;
        }
    if (confident == 0) throw Error("division", "degenerate eigenvector (all entries zero)");
    for (int i = 0; i < ns; ++i) {
        if (sample_labels[i] >= 0) continue;
        const int j = banded_argmin([&](int s) {
            return sample_labels[s] >= 0 ? pairwise(i, s)
                                         : std::numeric_limits<double>::max();
        });
        sample_labels[i] = sample_labels[j];
    }

    std::vector<std::uint8_t> labels(nv);
    if (ns == nv) {
        for (int i = 0; i < ns; ++i) labels[field.sources[i]] = std::uint8_t(sample_labels[i]);
    } else {
        parallel_for(nv, [&](int v) {
            const int best = banded_argmin([&](int s) { return field.dist(s, v); });
            labels[v] = std::uint8_t(sample_labels[best]);
        });
    }

    cleanup_islands(mesh, labels);

    const long top = std::count(labels.begin(), labels.end(), std::uint8_t(1));
    if (top == 0 || top == nv)
        throw Error("division", "a label class is empty after island cleanup");
    if (!classes_connected(mesh, labels))
        throw Error("division", "label classes not connected after cleanup");

    // canonical naming: the class with larger mean coordinate along the third
    // principal axis is "top"
    const Vec3 axis = third_pca_axis(mesh.vertices());
    double mean_top = 0, mean_bottom = 0;
    for (int v = 0; v < nv; ++v)
        (labels[v] ? mean_top : mean_bottom) += axis.dot(mesh.vertices()[v]);
    mean_top /= double(top);
    mean_bottom /= double(nv - top);
    if (mean_top < mean_bottom)
        for (auto& l : labels) l = l ? 0 : 1;

    BoundaryDivision div;
    div.delta = opt.delta;
    div.labels = std::move(labels);
    div.crest = extract_crest(mesh, div.labels);
    return div;
}

std::vector<int> extract_crest(const TriangleMesh& mesh,
                               const std::vector<std::uint8_t>& labels) {
    if (int(labels.size()) != mesh.vertex_count())
        throw Error("division", "label count does not match vertex count");

    // label-crossing edges and the faces on either side of each
    std::map<std::pair<int, int>, std::array<int, 2>> mixed;
    for (int f = 0; f < mesh.face_count(); ++f) {
        const auto& t = mesh.faces()[f];
        for (int k = 0; k < 3; ++k) {
            const int a = t[k], b = t[(k + 1) % 3];
            if (labels[a] == labels[b]) continue;
            const auto key = std::minmax(a, b);
            auto [it, inserted] = mixed.insert({key, {f, -1}});
            if (!inserted) it->second[1] = f;
        }
    }
    if (mixed.empty()) throw Error("division", "labels define no crest (single class)");
    for (const auto& [e, fs] : mixed)
        if (fs[1] < 0) throw Error("division", "crossing edge with one adjacent face");

    // walk: edge -> unused adjacent face -> that face's other crossing edge
    std::map<std::pair<int, int>, std::array<std::pair<int, int>, 2>> face_edges_map;
    std::map<int, std::vector<std::pair<int, int>>> by_face;
    for (const auto& [e, fs] : mixed) {
        by_face[fs[0]].push_back(e);
        by_face[fs[1]].push_back(e);
    }
    for (const auto& [f, es] : by_face)
        if (es.size() != 2)
            throw Error("division", "face with " + std::to_string(es.size()) +
                                        " crossing edges; labels are inconsistent");

    const auto start = mixed.begin()->first;
    std::vector<std::pair<int, int>> edge_cycle{start};
    int face = mixed[start][0];
    auto current = start;
    while (true) {
        const auto& pair = by_face[face];
        const auto next = pair[0] == current ? pair[1] : pair[0];
        if (next == start) break;
        edge_cycle.push_back(next);
        const auto& fs = mixed[next];
        face = fs[0] == face ? fs[1] : fs[0];
        current = next;
    }
    if (edge_cycle.size() != mixed.size())
        throw Error("division",
                    "crest is not a single loop (" + std::to_string(edge_cycle.size()) + " of " +
                        std::to_string(mixed.size()) +
                        " crossing edges in one cycle); object is not slab-like");

    // top-side endpoints, consecutive duplicates removed
    std::vector<int> loop;
    for (const auto& [a, b] : edge_cycle) {
        const int v = labels[a] ? a : b;
        if (loop.empty() || loop.back() != v) loop.push_back(v);
    }
    while (loop.size() > 1 && loop.front() == loop.back()) loop.pop_back();
    if (loop.size() < 3) throw Error("division", "crest loop degenerate");

    // orient counter-clockwise seen from outside the top part
    Vec3 centroid = Vec3::Zero();
    for (int v : loop) centroid += mesh.vertices()[v];
    centroid /= double(loop.size());
    Vec3 up = Vec3::Zero();
    for (int v = 0; v < mesh.vertex_count(); ++v)
        if (labels[v]) up += mesh.vertex_normals()[v];
    Vec3 winding = Vec3::Zero();
    for (std::size_t i = 0; i < loop.size(); ++i) {
        const Vec3 a = mesh.vertices()[loop[i]] - centroid;
        const Vec3 b = mesh.vertices()[loop[(i + 1) % loop.size()]] - centroid;
        winding += a.cross(b);
    }
    if (winding.dot(up) < 0) std::reverse(loop.begin(), loop.end());

    // canonical start at the smallest vertex index
    const auto lowest = std::min_element(loop.begin(), loop.end());
    std::rotate(loop.begin(), lowest, loop.end());
    return loop;
}

std::vector<Vec3> crest_polyline(const TriangleMesh& mesh, const std::vector<int>& crest) {
    std::vector<Vec3> pts;
    pts.reserve(crest.size());
    for (int v : crest) pts.push_back(mesh.vertices()[v]);
    return pts;
}

void save_labels_csv(const std::vector<std::uint8_t>& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("division", "cannot write " + path);
    out << "vertex_index,label\n";
    for (std::size_t v = 0; v < labels.size(); ++v)
        out << v << ',' << (labels[v] ? "top" : "bottom") << '\n';
}

void save_crest_json(const std::vector<int>& crest, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("division", "cannot write " + path);
    out << "[";
    for (std::size_t i = 0; i < crest.size(); ++i) out << (i ? "," : "") << crest[i];
    out << "]\n";
}

}  // namespace dss
