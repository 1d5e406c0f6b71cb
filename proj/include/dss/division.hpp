#pragma once

#include <dss/common.hpp>
#include <dss/geodesics.hpp>
#include <dss/mesh.hpp>

namespace dss {

enum class AffinityVariant {
    Literal,   // exp( delta * <n_i,n_j> * d_g )
    Decaying,  // exp( -delta * (1 - <n_i,n_j>) * d_g )
};

struct DivisionOptions {
    double delta = 0.5;
    AffinityVariant variant = AffinityVariant::Literal;
    // Above this count the vertex set is thinned by farthest-point sampling
    // and labels are propagated back by nearest sample.
    int max_vertices = 3000;
    // Dense symmetric eigensolve up to this size; Lanczos beyond.
    int dense_limit = 3000;
    bool subdivide_geodesics = false;
};

// Per-vertex top/bottom split plus the crest loop between the parts.
struct BoundaryDivision {
    std::vector<std::uint8_t> labels;  // 1 = top, 0 = bottom
    std::vector<int> crest;            // ordered closed loop of top-side vertices
    double delta = 0;

    bool is_top(int v) const { return labels[v] != 0; }
};

// Spectral split on the normal/geodesic affinity: labels by the sign of the
// eigenvector of the second-smallest eigenvalue of the normalized Laplacian,
// then stray-island cleanup and canonical top/bottom naming (larger mean
// coordinate along the third principal axis of the vertex cloud).
BoundaryDivision divide_boundary(const TriangleMesh& mesh, const DivisionOptions& options = {});

// Ordered crest loop for a given labeling: the top-side endpoints of the
// label-crossing edges, walked face to face. Oriented counter-clockwise as
// seen from outside the top part; starts at the smallest vertex index.
std::vector<int> extract_crest(const TriangleMesh& mesh,
                               const std::vector<std::uint8_t>& labels);

// Exactly one connected component per label class (after cleanup)?
bool classes_connected(const TriangleMesh& mesh, const std::vector<std::uint8_t>& labels);

std::vector<Vec3> crest_polyline(const TriangleMesh& mesh, const std::vector<int>& crest);

void save_labels_csv(const std::vector<std::uint8_t>& labels, const std::string& path);
void save_crest_json(const std::vector<int>& crest, const std::string& path);

}  // namespace dss
