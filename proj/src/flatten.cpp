#include <dss/flatten.hpp>

#include <dss/kdtree.hpp>

#include <Eigen/Eigenvalues>

namespace dss {

void PcaFrame::orient(const Vec3& e3_hint, const Vec3& e1_hint) {
    if (axes.col(2).dot(e3_hint) < 0) axes.col(2) = -axes.col(2);
    if (axes.col(0).dot(e1_hint) < 0) axes.col(0) = -axes.col(0);
    axes.col(1) = axes.col(2).cross(axes.col(0));
}

PcaFrame pca_frame(const std::vector<Vec3>& samples) {
    if (samples.size() < 3) throw Error("flatten", "need at least 3 samples");
    PcaFrame f;
    for (const auto& p : samples) f.centroid += p;
    f.centroid /= double(samples.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& p : samples) {
        const Vec3 d = p - f.centroid;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
    if (solver.eigenvalues()[2] <= 0) throw Error("flatten", "rank-deficient covariance");
    // descending variance; canonical signs (largest component positive)
    for (int k = 0; k < 3; ++k) {
        Vec3 axis = solver.eigenvectors().col(2 - k);
        int imax = 0;
        for (int d = 1; d < 3; ++d)
            if (std::abs(axis[d]) > std::abs(axis[imax])) imax = d;
        if (axis[imax] < 0) axis = -axis;
        f.axes.col(k) = axis;
    }
    f.axes.col(1) = f.axes.col(2).cross(f.axes.col(0));  // enforce right-handedness
    return f;
}

namespace {

struct LocalQuadric {
    double mean_abs_curvature = 0;
};

LocalQuadric local_quadric(const std::vector<Vec3>& pts, const std::vector<int>& nbrs,
                           int center) {
    // local frame from the neighborhood covariance
    Vec3 mean = Vec3::Zero();
    for (int i : nbrs) mean += pts[i];
    mean /= double(nbrs.size());
    Mat3 cov = Mat3::Zero();
    for (int i : nbrs) {
        const Vec3 d = pts[i] - mean;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
    if (solver.eigenvalues()[1] <= 1e-14 * solver.eigenvalues()[2])
        throw Error("flatten", "degenerate (collinear) neighborhood around sample " +
                                   std::to_string(center));
    const Vec3 normal = solver.eigenvectors().col(0);
    const Vec3 tu = solver.eigenvectors().col(2);
    const Vec3 tv = solver.eigenvectors().col(1);

    // w = a u^2 + b uv + c v^2 + d u + e v + f, centered at the sample
    const int n = int(nbrs.size());
    MatX basis(n, 6);
    VecX rhs(n);
    for (int r = 0; r < n; ++r) {
        const Vec3 d = pts[nbrs[r]] - pts[center];
        const double u = tu.dot(d), v = tv.dot(d), w = normal.dot(d);
        basis.row(r) << u * u, u * v, v * v, u, v, 1.0;
        rhs[r] = w;
    }
    Eigen::ColPivHouseholderQR<MatX> qr(basis);
    const VecX c = qr.solve(rhs);

    // shape operator of the graph at (0,0)
    const double du = c[3], dv = c[4];
    const double E = 1 + du * du, F = du * dv, G = 1 + dv * dv;
    const double denom = std::sqrt(1 + du * du + dv * dv);
    const double L = 2 * c[0] / denom, M = c[1] / denom, N = 2 * c[2] / denom;
    const double det1 = E * G - F * F;
    const double K = (L * N - M * M) / det1;
    const double H = (E * N + G * L - 2 * F * M) / (2 * det1);
    const double disc = std::max(0.0, H * H - K);
    const double k1 = H + std::sqrt(disc), k2 = H - std::sqrt(disc);
    return {0.5 * (std::abs(k1) + std::abs(k2))};
}

}  // namespace

double irregularity(const std::vector<Vec3>& sheet_samples, int k_neighbors) {
    const int n = int(sheet_samples.size());
    if (n < 30) throw Error("flatten", "need at least 30 samples for irregularity");
    if (k_neighbors < 8) throw Error("flatten", "neighborhoods need at least 8 points");

    const KdTree3 tree(sheet_samples);
    double kappa_max = 0;
    for (int i = 0; i < n; ++i) {
        auto nbrs = tree.knearest(sheet_samples[i], k_neighbors + 1);  // includes self
        const auto q = local_quadric(sheet_samples, nbrs, i);
        kappa_max = std::max(kappa_max, q.mean_abs_curvature);
    }
    return 2.0 * std::atan(kappa_max) / M_PI;
}

FlatteningMap pca_flatten(const std::vector<Vec3>& sheet_samples) {
    const int n = int(sheet_samples.size());
    FlatteningMap map;
    map.method = FlattenMethod::Pca;
    map.frame = pca_frame(sheet_samples);
    map.image.resize(n);
    map.heights.resize(n);
    for (int i = 0; i < n; ++i) {
        map.image[i] = map.frame.to_plane(sheet_samples[i]);
        map.heights[i] = map.frame.height(sheet_samples[i]);
    }

    Aabb box = bounds_of(sheet_samples);
    const double eps = 1e-3 * box.diagonal();

    // injectivity on samples: 2D collision of points that are separated in 3D
    bool injective = true;
    const KdTree3 tree3(sheet_samples);
    std::vector<Vec3> lifted(n);
    for (int i = 0; i < n; ++i) lifted[i] = Vec3(map.image[i].x(), map.image[i].y(), 0);
    const KdTree3 tree2(lifted);
    for (int i = 0; i < n && injective; ++i) {
        for (int j : tree2.knearest(lifted[i], 8)) {
            if (j == i) continue;
            const double d2 = (lifted[j] - lifted[i]).norm();
            const double d3 = (sheet_samples[j] - sheet_samples[i]).norm();
            if (d2 < eps && d3 > 3 * eps) {
                injective = false;
                break;
            }
        }
    }

    // fold-over: propagate a consistent surface orientation over the kNN
    // graph; any patch whose transported normal turns against the projection
    // axis flips its projected triangles
    bool folded = false;
    if (n >= 8) {
        const int k = std::min(8, n - 1);
        std::vector<Vec3> normals(n);
        for (int i = 0; i < n; ++i) {
            const auto nbrs = tree3.knearest(sheet_samples[i], k + 1);
            Vec3 mean = Vec3::Zero();
            for (int j : nbrs) mean += sheet_samples[j];
            mean /= double(nbrs.size());
            Mat3 cov = Mat3::Zero();
            for (int j : nbrs) {
                const Vec3 d = sheet_samples[j] - mean;
                cov += d * d.transpose();
            }
            Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
            normals[i] = solver.eigenvectors().col(0);
        }
        const Vec3 axis3 = map.frame.axes.col(2);
        std::vector<int> state(n, 0);  // 0 unvisited, 1 visited
        for (int seed = 0; seed < n; ++seed) {
            if (state[seed]) continue;
            // root each component at its best-aligned sample
            int root = seed;
            for (int i = seed; i < n; ++i)
                if (!state[i] &&
                    std::abs(normals[i].dot(axis3)) > std::abs(normals[root].dot(axis3)))
                    root = i;
            if (normals[root].dot(axis3) < 0) normals[root] = -normals[root];
            std::vector<int> stack{root};
            state[root] = 1;
            while (!stack.empty()) {
                const int u = stack.back();
                stack.pop_back();
                for (int v : tree3.knearest(sheet_samples[u], k + 1)) {
                    if (state[v]) continue;
                    if (normals[v].dot(normals[u]) < 0) normals[v] = -normals[v];
                    state[v] = 1;
                    stack.push_back(v);
                }
            }
        }
        for (int i = 0; i < n; ++i)
            if (normals[i].dot(axis3) <= 0) {
                folded = true;
                break;
            }
    }

    map.flatable = injective && !folded;
    return map;
}

}  // namespace dss
