#include <doctest.h>

#include <dss/flatten.hpp>
#include <dss/polyfit.hpp>

#include "support.hpp"

using namespace dss;

namespace {

std::vector<Vec3> plane_patch(int nx, int ny, double spacing) {
    std::vector<Vec3> pts;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            pts.emplace_back(i * spacing, j * spacing, 0.3 * i * spacing - 0.1 * j * spacing * 0);
    return pts;
}

std::vector<Vec3> sphere_cap(double radius, double cap_angle, int n_rings, int n_around) {
    std::vector<Vec3> pts;
    for (int r = 0; r <= n_rings; ++r) {
        const double theta = cap_angle * r / n_rings;
        const int m = r == 0 ? 1 : n_around;
        for (int s = 0; s < m; ++s) {
            const double phi = 2 * M_PI * s / m;
            pts.emplace_back(radius * std::sin(theta) * std::cos(phi),
                             radius * std::sin(theta) * std::sin(phi),
                             radius * std::cos(theta));
        }
    }
    return pts;
}

// breaks the exact ring symmetries of sphere_cap, which otherwise put many
// samples at identical distances
std::vector<Vec3> jittered_cap(double radius, double cap_angle, int n_rings, int n_around,
                               std::uint64_t seed) {
    auto pts = sphere_cap(radius, cap_angle, n_rings, n_around);
    Rng rng(seed);
    for (auto& p : pts) {
        p += 0.01 * radius * Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        p = radius * p.normalized();
    }
    return pts;
}

}  // namespace

TEST_SUITE("flatten") {

TEST_CASE("irregularity of a plane is zero") {
    std::vector<Vec3> pts;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) pts.emplace_back(0.1 * i, 0.1 * j, 0.0);
    CHECK(irregularity(pts) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("irregularity of a unit sphere patch is one half") {
    const auto pts = sphere_cap(1.0, 0.9, 12, 28);
    CHECK(irregularity(pts) == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("irregularity scales with inverse radius") {
    const auto small = sphere_cap(0.5, 0.9, 12, 28);
    const double expect = 2 * std::atan(2.0) / M_PI;
    CHECK(irregularity(small) == doctest::Approx(expect).epsilon(0.04));
}

TEST_CASE("irregularity is rigid-motion invariant") {
    const auto pts = sphere_cap(1.0, 0.8, 10, 24);
    const double base = irregularity(pts);

    const Mat3 rot = Eigen::AngleAxisd(1.1, Vec3(0.3, -1, 2).normalized()).toRotationMatrix();
    std::vector<Vec3> moved;
    for (const auto& p : pts) moved.push_back(rot * p + Vec3(5, 6, -7));
    CHECK(irregularity(moved) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("irregularity rejects tiny and collinear input") {
    std::vector<Vec3> line;
    for (int i = 0; i < 40; ++i) line.emplace_back(i * 0.1, 0, 0);
    CHECK_THROWS_AS(irregularity(line), Error);
    std::vector<Vec3> few(10, Vec3::Zero());
    CHECK_THROWS_AS(irregularity(few), Error);
}

TEST_CASE("semi-flat threshold constant") {
    CHECK(kSemiFlatThreshold == 0.01);
}

TEST_CASE("pca flatten of planar data is an isometry") {
    std::vector<Vec3> pts;
    Rng rng(11);
    const Vec3 u = Vec3(1, 2, 0.5).normalized();
    const Vec3 v0 = Vec3(-2, 1, 0).normalized();
    const Vec3 v = (v0 - v0.dot(u) * u).normalized();
    for (int i = 0; i < 60; ++i)
        pts.push_back(Vec3(4, -3, 9) + rng.uniform(-2, 2) * u + rng.uniform(-1, 1) * v);

    const auto map = pca_flatten(pts);
    CHECK(map.flatable);
    for (int i = 0; i < 60; i += 7)
        for (int j = 0; j < 60; ++j) {
            const double d2 = (map.image[i] - map.image[j]).norm();
            const double d3 = (pts[i] - pts[j]).norm();
            CHECK(d2 == doctest::Approx(d3).epsilon(1e-9));
        }
    for (double h : map.heights) CHECK(std::abs(h) <= 1e-9);
}

TEST_CASE("pca flatten round-trips through the frame") {
    const auto pts = sphere_cap(1.0, 0.5, 8, 20);
    const auto map = pca_flatten(pts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec3 back = map.frame.to_world(map.image[i], map.heights[i]);
        CHECK((back - pts[i]).norm() <= 1e-12);
    }
}

TEST_CASE("overfolded sheet is not PCA flatable") {
    // ribbon hooking past vertical: the far branch overhangs the near one
    std::vector<Vec3> pts;
    for (int i = 0; i <= 40; ++i) {
        const double u = 1.5 * M_PI * i / 40;
        for (int j = 0; j <= 20; ++j)
            pts.emplace_back(std::sin(u), 4.0 * j / 20, 1.0 - std::cos(u));
    }
    const auto map = pca_flatten(pts);
    CHECK_FALSE(map.flatable);
}

TEST_CASE("gently curved sheet is flatable") {
    std::vector<Vec3> pts;
    for (int i = 0; i <= 20; ++i)
        for (int j = 0; j <= 20; ++j) {
            const double x = -1 + 2.0 * i / 20, y = -1 + 2.0 * j / 20;
            pts.emplace_back(x, y, 0.1 * x * x - 0.05 * y);
        }
    CHECK(pca_flatten(pts).flatable);
}

TEST_CASE("tsne is deterministic and complete") {
    const auto pts = jittered_cap(1.0, 0.7, 7, 13, 5);
    TsneOptions opt;
    opt.perplexity = 12;
    opt.iterations = 300;
    opt.exaggeration_iters = 100;
    opt.seed = 42;
    const auto a = tsne_flatten(pts, opt);
    const auto b = tsne_flatten(pts, opt);
    REQUIRE(a.image.size() == pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        CHECK((a.image[i] - b.image[i]).norm() == 0.0);
}

TEST_CASE("tsne objective decreases after the exaggeration phase") {
    const auto pts = jittered_cap(1.0, 0.9, 9, 17, 6);
    TsneOptions opt;
    opt.perplexity = 15;
    opt.iterations = 1000;
    opt.seed = 7;
    const auto map = tsne_flatten(pts, opt);
    REQUIRE(int(map.kl_history.size()) == opt.iterations);
    CHECK(map.kl_history[999] <= map.kl_history[250]);
    CHECK(std::isfinite(map.kl_history[999]));
}

TEST_CASE("tsne rejects bad perplexity") {
    const auto pts = sphere_cap(1.0, 0.5, 5, 8);
    TsneOptions opt;
    opt.perplexity = double(pts.size());
    CHECK_THROWS_AS(tsne_flatten(pts, opt), Error);
}

}  // TEST_SUITE
