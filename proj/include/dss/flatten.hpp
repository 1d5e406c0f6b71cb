#pragma once

#include <dss/common.hpp>

namespace dss {

// Orthonormal frame from a principal-component analysis of a 3D sample set:
// axis(0)/axis(1) span the first principal plane, axis(2) is the projection
// direction. Right-handed.
struct PcaFrame {
    Vec3 centroid = Vec3::Zero();
    Mat3 axes = Mat3::Identity();  // columns e1, e2, e3

    Vec2 to_plane(const Vec3& p) const {
        const Vec3 d = p - centroid;
        return {axes.col(0).dot(d), axes.col(1).dot(d)};
    }
    double height(const Vec3& p) const { return axes.col(2).dot(p - centroid); }
    Vec3 to_world(const Vec2& xy, double h) const {
        return centroid + xy.x() * axes.col(0) + xy.y() * axes.col(1) + h * axes.col(2);
    }

    // Flip e3 and/or e1 so they point along the hints; e2 keeps the frame
    // right-handed. Hints let callers anchor the frame to covariant geometry
    // (top side, a crest vertex) instead of eigensolver sign noise.
    void orient(const Vec3& e3_hint, const Vec3& e1_hint);
};

PcaFrame pca_frame(const std::vector<Vec3>& samples);

enum class FlattenMethod { Pca, Tsne };

struct FlatteningMap {
    FlattenMethod method = FlattenMethod::Pca;
    PcaFrame frame;                // PCA only
    std::vector<Vec2> image;       // one 2D point per input sample
    std::vector<double> heights;   // PCA only: third-axis coordinate per sample
    bool flatable = false;
    std::vector<double> kl_history;  // t-SNE only, one entry per iteration
};

// Maximum local curvature mapped to [0,1): 2*atan(max_p kappa_p)/pi with
// kappa_p the mean absolute principal curvature from a local least-squares
// quadric over k nearest neighbors.
double irregularity(const std::vector<Vec3>& sheet_samples, int k_neighbors = 12);

// Sheets below this irregularity count as semi-flat.
inline constexpr double kSemiFlatThreshold = 0.01;

// Centroid-centered orthogonal projection onto the first principal plane.
// flatable requires sample-level injectivity and no fold-over of the locally
// propagated surface orientation.
FlatteningMap pca_flatten(const std::vector<Vec3>& sheet_samples);

struct TsneOptions {
    double perplexity = 30;
    int iterations = 1000;
    int exaggeration_iters = 250;
    double exaggeration = 12;
    std::uint64_t seed = 0;
};

// Exact O(n^2) t-SNE to 2D with seeded deterministic initialization.
FlatteningMap tsne_flatten(const std::vector<Vec3>& sheet_samples, const TsneOptions& options);

}  // namespace dss
