#include <doctest.h>

#include <dss/geodesics.hpp>
#include <dss/mesh.hpp>
#include <dss/ray.hpp>
#include <dss/synth.hpp>
#include <dss/voxel.hpp>

#include "support.hpp"

#include <cstdio>
#include <fstream>

using namespace dss;

namespace {

// Plain O(V^2) Dijkstra over an explicit edge list, kept separate from the
// library's implementation.
double oracle_shortest_path(int n, const std::vector<std::array<int, 2>>& edges,
                            const std::vector<double>& weights, int src, int dst) {
    std::vector<double> dist(n, 1e300);
    std::vector<bool> done(n, false);
    dist[src] = 0;
    for (int it = 0; it < n; ++it) {
        int u = -1;
        for (int v = 0; v < n; ++v)
            if (!done[v] && (u < 0 || dist[v] < dist[u])) u = v;
        done[u] = true;
        for (std::size_t e = 0; e < edges.size(); ++e) {
            int a = edges[e][0], b = edges[e][1];
            if (a == u || b == u) {
                int v = a == u ? b : a;
                dist[v] = std::min(dist[v], dist[u] + weights[e]);
            }
        }
    }
    return dist[dst];
}

std::string temp_path(const char* name) {
    return std::string("/tmp/dss_test_") + name;
}

}  // namespace

TEST_SUITE("mesh") {

TEST_CASE("unit cube obj round-trip and volume") {
    const auto cube = testing::unit_cube();
    CHECK(cube.vertex_count() == 8);
    CHECK(cube.face_count() == 12);
    CHECK(cube.signed_volume() == doctest::Approx(1.0).epsilon(1e-12));

    const auto path = temp_path("cube.obj");
    save_obj(cube, path);
    const auto loaded = load_mesh(path);
    CHECK(loaded.vertex_count() == 8);
    CHECK(loaded.signed_volume() == doctest::Approx(1.0).epsilon(1e-12));
    for (int v = 0; v < 8; ++v)
        CHECK((loaded.vertices()[v] - cube.vertices()[v]).norm() == doctest::Approx(0.0));
    std::remove(path.c_str());
}

TEST_CASE("icosphere ply keeps Euler characteristic") {
    const auto sphere = make_ellipsoid(1, 1, 1, 3);
    CHECK(sphere.vertex_count() == 642);

    for (bool binary : {false, true}) {
        const auto path = temp_path(binary ? "s.bin.ply" : "s.ascii.ply");
        save_ply(sphere, path, binary);
        const auto loaded = load_mesh(path);
        CHECK(loaded.vertex_count() == 642);
        CHECK(loaded.face_count() == 1280);
        CHECK(loaded.vertex_count() - loaded.edge_count() + loaded.face_count() == 2);
        std::remove(path.c_str());
    }
}

TEST_CASE("vertex normals are unit and outward on a sphere") {
    const auto sphere = make_ellipsoid(1, 1, 1, 2);
    for (int v = 0; v < sphere.vertex_count(); ++v) {
        CHECK(sphere.vertex_normals()[v].norm() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(sphere.vertex_normals()[v].dot(sphere.vertices()[v]) > 0.9);
    }
}

TEST_CASE("an edge shared by three faces is rejected") {
    auto cube = testing::unit_cube();
    auto faces = cube.faces();
    faces.push_back(faces[0]);  dss::Vec3 extra(10, 10, 10);
    auto verts = cube.vertices();
    faces.back()[2] = int(verts.size());
    verts.push_back(extra);
    CHECK_THROWS_WITH_AS(TriangleMesh::build(verts, faces),
                         doctest::Contains("non-manifold"), Error);
}

TEST_CASE("open surface is rejected") {
    auto cube = testing::unit_cube();
    auto faces = cube.faces();
    faces.pop_back();
    CHECK_THROWS_WITH_AS(TriangleMesh::build(cube.vertices(), faces),
                         doctest::Contains("open boundary"), Error);
}

TEST_CASE("inward orientation is rejected") {
    auto cube = testing::unit_cube();
    auto faces = cube.faces();
    for (auto& f : faces) std::swap(f[1], f[2]);
    CHECK_THROWS_AS(TriangleMesh::build(cube.vertices(), faces), Error);
}

TEST_CASE("geodesic distances: diagonal, symmetry, cube corner oracle") {
    const auto cube = testing::unit_cube(Vec3(0.5, 0.5, 0.5));
    const auto field = geodesic_distances(cube);
    for (int v = 0; v < 8; ++v) CHECK(field.dist(v, v) == 0.0);
    const auto pw = field.pairwise();
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            CHECK(pw(i, j) == doctest::Approx(pw(j, i)).epsilon(1e-15));

    std::vector<double> weights;
    for (const auto& [a, b] : cube.edges())
        weights.push_back((cube.vertices()[a] - cube.vertices()[b]).norm());
    const double expected = oracle_shortest_path(8, cube.edges(), weights, 0, 7);
    CHECK(field.dist(0, 7) == doctest::Approx(expected).epsilon(1e-12));
    // corners 0 and 7 touch no face diagonal in this triangulation
    CHECK(expected == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("geodesic triangle inequality on sampled triples") {
    const auto sphere = make_ellipsoid(2, 1, 0.5, 2);
    const auto field = geodesic_distances(sphere);
    Rng rng(7);
    for (int t = 0; t < 200; ++t) {
        const int i = int(rng.below(sphere.vertex_count()));
        const int j = int(rng.below(sphere.vertex_count()));
        const int k = int(rng.below(sphere.vertex_count()));
        CHECK(field.dist(i, j) <= field.dist(i, k) + field.dist(k, j) + 1e-12);
    }
}

TEST_CASE("subdivided geodesics never exceed edge-graph geodesics") {
    const auto sphere = make_ellipsoid(1, 1, 1, 2);
    const std::vector<int> sources{0, 10, 50};
    const auto coarse = geodesic_distances(sphere, sources, false);
    const auto fine = geodesic_distances(sphere, sources, true);
    for (int i = 0; i < 3; ++i)
        for (int v = 0; v < sphere.vertex_count(); ++v)
            CHECK(fine.dist(i, v) <= coarse.dist(i, v) + 1e-12);
}

TEST_CASE("ray from sphere centroid hits at radius") {
    const auto sphere = make_ellipsoid(1, 1, 1, 3);
    double min_centroid_norm = 1.0;
    for (int f = 0; f < sphere.face_count(); ++f)
        min_centroid_norm = std::min(min_centroid_norm, sphere.face_centroid(f).norm());
    const double facet_tol = 1.0 - min_centroid_norm;

    const TriBvh bvh(sphere);
    Rng rng(3);
    for (int k = 0; k < 50; ++k) {
        const Vec3 dir = rng.unit_vec3();
        const auto hit = bvh.intersect(Vec3::Zero(), dir);
        REQUIRE(hit.has_value());
        CHECK(hit->t == doctest::Approx(1.0).epsilon(2 * facet_tol + 1e-6));

        // hit point lies on the hit triangle's plane
        const auto& tri = sphere.faces()[hit->face];
        const Vec3 n = sphere.face_normal(hit->face);
        const double off = std::abs(n.dot(hit->point - sphere.vertices()[tri[0]]));
        CHECK(off <= 1e-7 * sphere.bounds().diagonal());
    }
}

TEST_CASE("ray away from the mesh misses") {
    const auto cube = testing::unit_cube();
    CHECK_FALSE(ray_intersect(cube, Vec3(5, 5, 5), Vec3(1, 0, 0)).has_value());
}

TEST_CASE("axis ray from cube center") {
    const auto cube = testing::unit_cube(Vec3::Zero());
    const auto hit = ray_intersect(cube, Vec3::Zero(), Vec3(1, 0, 0));
    REQUIRE(hit.has_value());
    CHECK((hit->point - Vec3(0.5, 0, 0)).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("inside test") {
    const auto sphere = make_ellipsoid(2, 1, 0.5, 2);
    const TriBvh bvh(sphere);
    CHECK(bvh.inside(Vec3(0, 0, 0)));
    CHECK(bvh.inside(Vec3(1.5, 0, 0)));
    CHECK_FALSE(bvh.inside(Vec3(2.5, 0, 0)));
    CHECK_FALSE(bvh.inside(Vec3(0, 0, 0.6)));
}

TEST_CASE("jaccard: identity, disjoint, symmetry") {
    const auto cube = testing::unit_cube();
    CHECK(jaccard_volume(cube, cube, 64) == doctest::Approx(1.0));

    const auto far_cube = testing::unit_cube(Vec3(5, 0, 0));
    CHECK(jaccard_volume(cube, far_cube, 64) == doctest::Approx(0.0));

    const auto shifted = testing::unit_cube(Vec3(0.7, 0.5, 0.5));
    CHECK(jaccard_volume(cube, shifted, 64) ==
          doctest::Approx(jaccard_volume(shifted, cube, 64)).epsilon(1e-15));
}

TEST_CASE("jaccard oracle: half-overlapping cubes") {
    // overlap 0.5, union 1.5
    const auto a = testing::unit_cube(Vec3(0.5, 0.5, 0.5));
    const auto b = testing::unit_cube(Vec3(1.0, 0.5, 0.5));
    CHECK(jaccard_volume(a, b, 128) == doctest::Approx(1.0 / 3.0).epsilon(0.03));
}

TEST_CASE("jaccard rejects degenerate input") {
    const auto cube = testing::unit_cube();
    std::vector<Vec3> flat(cube.vertices());
    for (auto& v : flat) v.z() = 0;
    const auto degenerate = TriangleMesh::build_unchecked(flat, cube.faces());
    CHECK_THROWS_AS(jaccard_volume(cube, degenerate, 64), Error);
}

TEST_CASE("obj parse failure reports line") {
    const auto path = temp_path("bad.obj");
    {
        std::ofstream out(path);
        out << "v 0 0 0\nv 1 0\nf 1 2 3\n";
    }
    CHECK_THROWS_AS(load_mesh(path), Error);
    std::remove(path.c_str());
}

}  // TEST_SUITE
