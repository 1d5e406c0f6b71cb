#include <dss/geodesics.hpp>

#include <map>
#include <numeric>
#include <queue>

namespace dss {

namespace {

struct Graph {
    // CSR adjacency
    std::vector<int> offsets;
    std::vector<int> targets;
    std::vector<double> weights;
    int n = 0;
};

Graph edge_graph(const TriangleMesh& mesh) {
    Graph g;
    g.n = mesh.vertex_count();
    std::vector<std::vector<std::pair<int, double>>> adj(g.n);
    for (const auto& [a, b] : mesh.edges()) {
        const double w = (mesh.vertices()[a] - mesh.vertices()[b]).norm();
        adj[a].push_back({b, w});
        adj[b].push_back({a, w});
    }
    g.offsets.push_back(0);
    for (const auto& row : adj) {
        for (const auto& [t, w] : row) {
            g.targets.push_back(t);
            g.weights.push_back(w);
        }
        g.offsets.push_back(int(g.targets.size()));
    }
    return g;
}

// Original vertices keep their indices; every edge gains a midpoint node and
// faces are fully connected across vertex<->midpoint and midpoint<->midpoint
// pairs.
Graph subdivided_graph(const TriangleMesh& mesh) {
    const int nv = mesh.vertex_count();
    std::map<std::pair<int, int>, int> midpoint;
    std::vector<Vec3> pos(mesh.vertices());
    auto mid = [&](int a, int b) {
        const auto key = std::minmax(a, b);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        const int id = int(pos.size());
        pos.push_back(0.5 * (mesh.vertices()[a] + mesh.vertices()[b]));
        midpoint.emplace(key, id);
        return id;
    };

    std::vector<std::vector<std::pair<int, double>>> adj;
    auto link = [&](int a, int b) {
        const double w = (pos[a] - pos[b]).norm();
        adj[a].push_back({b, w});
        adj[b].push_back({a, w});
    };

    // midpoints are created first so adj can be sized once
    for (const auto& f : mesh.faces())
        for (int k = 0; k < 3; ++k) mid(f[k], f[(k + 1) % 3]);
    adj.resize(pos.size());

    for (const auto& f : mesh.faces()) {
        const int m01 = mid(f[0], f[1]), m12 = mid(f[1], f[2]), m20 = mid(f[2], f[0]);
        link(f[0], m01);
        link(m01, f[1]);
        link(f[1], m12);
        link(m12, f[2]);
        link(f[2], m20);
        link(m20, f[0]);
        link(m01, m12);
        link(m12, m20);
        link(m20, m01);
        link(f[0], m12);
        link(f[1], m20);
        link(f[2], m01);
    }

    Graph g;
    g.n = int(pos.size());
    g.offsets.push_back(0);
    for (auto& row : adj) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        for (const auto& [t, w] : row) {
            g.targets.push_back(t);
            g.weights.push_back(w);
        }
        g.offsets.push_back(int(g.targets.size()));
    }
    (void)nv;
    return g;
}

void dijkstra(const Graph& g, int source, std::vector<double>& dist) {
    dist.assign(g.n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0;
    heap.push({0.0, source});
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        for (int e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
            const int v = g.targets[e];
            const double nd = d + g.weights[e];
            if (nd < dist[v]) {
                dist[v] = nd;
                heap.push({nd, v});
            }
        }
    }
}

}  // namespace

MatX GeodesicField::pairwise() const {
    MatX p(sources.size(), sources.size());
    for (std::size_t i = 0; i < sources.size(); ++i)
        for (std::size_t j = 0; j < sources.size(); ++j) p(i, j) = dist(i, sources[j]);
    return p;
}

GeodesicField geodesic_distances(const TriangleMesh& mesh, const std::vector<int>& sources,
                                 bool subdivide_once) {
    if (sources.empty()) throw Error("geodesics", "empty source set");
    const Graph g = subdivide_once ? subdivided_graph(mesh) : edge_graph(mesh);

    GeodesicField field;
    field.sources = sources;
    field.dist.resize(sources.size(), mesh.vertex_count());

    parallel_for(int(sources.size()), [&](int i) {
        std::vector<double> d;
        dijkstra(g, sources[i], d);
        for (int v = 0; v < mesh.vertex_count(); ++v) {
            if (!std::isfinite(d[v]))
                throw Error("geodesics", "disconnected vertex graph");
            field.dist(i, v) = d[v];
        }
    });
    return field;
}

GeodesicField geodesic_distances(const TriangleMesh& mesh, bool subdivide_once) {
    std::vector<int> all(mesh.vertex_count());
    std::iota(all.begin(), all.end(), 0);
    return geodesic_distances(mesh, all, subdivide_once);
}

}  // namespace dss
