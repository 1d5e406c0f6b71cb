#include <doctest.h>

#include <dss/cms.hpp>
#include <dss/kdtree.hpp>
#include <dss/synth.hpp>

#include "support.hpp"

using namespace dss;

namespace {

// disk polygon with the upper/lower semicircles as the two parts
Polygon2 labeled_disk(double radius, int n) {
    Polygon2 poly;
    for (int i = 0; i < n; ++i) {
        const double a = 2 * M_PI * i / n;
        poly.points.emplace_back(radius * std::cos(a), radius * std::sin(a));
        poly.labels.push_back(std::sin(a) > 0 ? 1 : 0);
    }
    return poly;
}

std::vector<std::uint8_t> sign_z_labels(const TriangleMesh& mesh) {
    std::vector<std::uint8_t> labels(mesh.vertex_count());
    for (int v = 0; v < mesh.vertex_count(); ++v)
        labels[v] = mesh.vertices()[v].z() > 0 ? 1 : 0;
    return labels;
}

}  // namespace

TEST_SUITE("cms") {

TEST_CASE("disk interface is the horizontal diameter") {
    const auto disk = labeled_disk(1.0, 256);
    CmsOptions opt;
    opt.pitch = 0.02;
    const auto cms = extract_cms(disk, opt);
    REQUIRE(cms.points.size() > 20);
    for (const auto& p : cms.points) CHECK(std::abs(p.y()) <= cms.spacing);
    for (double r : cms.residuals) CHECK(r <= cms.spacing);
}

TEST_CASE("disk interface is stable under pitch refinement") {
    const auto disk = labeled_disk(1.0, 256);
    CmsOptions coarse, fine;
    coarse.pitch = 0.04;
    fine.pitch = 0.02;
    const auto a = extract_cms(disk, coarse);
    const auto b = extract_cms(disk, fine);
    const KdTree2 fine_tree(b.points);
    for (const auto& p : a.points) CHECK(fine_tree.nearest_distance(p) <= coarse.pitch);
}

TEST_CASE("ellipsoid interface with the analytic split lies in the z=0 plane") {
    const auto mesh = make_ellipsoid(2, 1, 0.5, 3);
    BoundaryDivision div;
    div.labels = sign_z_labels(mesh);
    div.crest = extract_crest(mesh, div.labels);
    div.delta = 0.5;

    const auto cms = extract_cms(mesh, div);
    REQUIRE(cms.points.size() > 100);
    for (const auto& p : cms.points) CHECK(std::abs(p.z()) <= cms.spacing);
    for (double r : cms.residuals) CHECK(r <= cms.spacing);

    // interior: no interface point within h of the crest polyline
    const KdTree3 crest_tree(crest_polyline(mesh, div.crest));
    for (const auto& p : cms.points) CHECK(crest_tree.nearest_distance(p) >= cms.spacing);
}

TEST_CASE("swapping the labels leaves the interface unchanged") {
    const auto mesh = make_ellipsoid(2, 1, 0.5, 2);
    BoundaryDivision div;
    div.labels = sign_z_labels(mesh);
    div.crest = extract_crest(mesh, div.labels);

    BoundaryDivision swapped = div;
    for (auto& l : swapped.labels) l = l ? 0 : 1;
    swapped.crest = extract_crest(mesh, swapped.labels);

    const auto a = extract_cms(mesh, div);
    const auto b = extract_cms(mesh, swapped);
    // same point set; the emission order may differ with the grid orientation
    REQUIRE(a.points.size() == b.points.size());
    const KdTree3 tree_b(b.points);
    for (const auto& p : a.points) CHECK(tree_b.nearest_distance(p) <= 1e-9);
    const KdTree3 tree_a(a.points);
    for (const auto& p : b.points) CHECK(tree_a.nearest_distance(p) <= 1e-9);
}

TEST_CASE("oversized pitch is rejected") {
    const auto mesh = make_ellipsoid(2, 1, 0.5, 2);
    BoundaryDivision div;
    div.labels = sign_z_labels(mesh);
    CmsOptions opt;
    opt.pitch = mesh.bounds().diagonal() / 10.0;
    CHECK_THROWS_AS(extract_cms(mesh, div, opt), Error);
}

}  // TEST_SUITE
