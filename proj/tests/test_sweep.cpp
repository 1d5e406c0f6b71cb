#include <doctest.h>

#include <dss/sweep.hpp>
#include <dss/synth.hpp>

#include "support.hpp"

#include <filesystem>

using namespace dss;

namespace {

BoundaryDivision analytic_division(const TriangleMesh& mesh) {
    BoundaryDivision div;
    div.labels.resize(mesh.vertex_count());
    for (int v = 0; v < mesh.vertex_count(); ++v)
        div.labels[v] = mesh.vertices()[v].z() > 0 ? 1 : 0;
    div.crest = extract_crest(mesh, div.labels);
    div.delta = 0.5;
    return div;
}

struct EllipsoidFixture {
    TriangleMesh mesh;
    BoundaryDivision division;
    CmsPointSet3 cms;

    EllipsoidFixture(double a, double b, double c, int res)
        : mesh(make_ellipsoid(a, b, c, res)),
          division(analytic_division(mesh)),
          cms(extract_cms(mesh, division)) {}
};

const EllipsoidFixture& ellipsoid_fixture() {
    static EllipsoidFixture fx(2, 1, 0.5, 3);
    return fx;
}

}  // namespace

TEST_SUITE("sweep") {

TEST_CASE("degree-1 sheet of the ellipsoid interface is the z=0 plane") {
    const auto& fx = ellipsoid_fixture();
    const auto sheet = fit_skeletal_sheet(fx.cms.points, 1);
    CHECK(std::abs(sheet.frame.axes.col(2).z()) > 0.999);
    for (const auto& p : fx.cms.points) {
        const Vec2 xy = sheet.frame.to_plane(p);
        CHECK(std::abs(sheet.lift(xy).z()) <= fx.cms.spacing);
    }
    CHECK(sheet.rms <= fx.cms.spacing);
}

TEST_CASE("sheet residual is monotone in degree") {
    const auto& fx = ellipsoid_fixture();
    double prev = std::numeric_limits<double>::max();
    for (int d = 1; d <= 4; ++d) {
        const auto sheet = fit_skeletal_sheet(fx.cms.points, d);
        CHECK(sheet.rms <= prev + 1e-12);
        prev = sheet.rms;
    }
}

TEST_CASE("sheet degree bounds enforced") {
    const auto& fx = ellipsoid_fixture();
    CHECK_THROWS_AS(fit_skeletal_sheet(fx.cms.points, 0), Error);
    CHECK_THROWS_AS(fit_skeletal_sheet(fx.cms.points, 8), Error);
}

TEST_CASE("spine of the ellipsoid ends at the vertices") {
    const auto& fx = ellipsoid_fixture();
    const auto sheet = fit_skeletal_sheet(fx.cms.points, 1);
    const auto spine = fit_spine(sheet, crest_polyline(fx.mesh, fx.division.crest), 1);

    const double a = 2.0;
    const Vec3 va = spine.points.front(), vb = spine.points.back();
    const double d1 = std::min((va - Vec3(2, 0, 0)).norm(), (va - Vec3(-2, 0, 0)).norm());
    const double d2 = std::min((vb - Vec3(2, 0, 0)).norm(), (vb - Vec3(-2, 0, 0)).norm());
    CHECK(d1 <= 0.05 * a);
    CHECK(d2 <= 0.05 * a);
    CHECK((va - vb).norm() > 3.0);  // spans the major axis

    // spine lies on the fitted sheet
    for (const auto& p : spine.points) {
        const Vec2 xy = sheet.frame.to_plane(p);
        const double dev = std::abs(sheet.frame.height(p) - sheet.surface.eval(xy.x(), xy.y()));
        CHECK(dev <= 2 * sheet.rms + 1e-12);
    }
    // endpoints near the crest loop
    CHECK((spine.vertex_a - va).norm() <= 2 * fx.mesh.mean_edge_length());
    CHECK((spine.vertex_b - vb).norm() <= 2 * fx.mesh.mean_edge_length());
}

TEST_CASE("bent ellipsoid spine tracks the deformed vertices") {
    SynthSpec spec;
    spec.a = 2;
    spec.b = 1;
    spec.c = 0.5;
    spec.resolution = 4;  // the crest ring must resolve the bent tip
    // progressive bend over most of the arm; the +x vertex lies beyond the
    // blend band and lands exactly on its analytic rotation
    spec.bend = BendSpec{0.0, 40.0, 1.5};
    const auto base = make_ellipsoid(spec.a, spec.b, spec.c, spec.resolution);
    const auto mesh = deform(base, spec);
    const auto division = analytic_division(mesh);
    const auto cms = extract_cms(mesh, division);

    const auto sheet = fit_skeletal_sheet(cms.points, 1);
    const auto spine = fit_spine(sheet, crest_polyline(mesh, division.crest), 3);

    const double angle = 40.0 * M_PI / 180.0;
    const Vec3 bent_vertex(2 * std::cos(angle), 2 * std::sin(angle), 0.0);
    const Vec3 fixed_vertex(-2, 0, 0);
    const Vec3 va = spine.points.front(), vb = spine.points.back();
    const double to_bent = std::min((va - bent_vertex).norm(), (vb - bent_vertex).norm());
    const double to_fixed = std::min((va - fixed_vertex).norm(), (vb - fixed_vertex).norm());
    CHECK(to_bent <= 0.05 * spec.a);
    CHECK(to_fixed <= 0.05 * spec.a);
}

TEST_CASE("normal-mode sections of the ellipsoid") {
    const auto& fx = ellipsoid_fixture();
    const auto sheet = fit_skeletal_sheet(fx.cms.points, 1);
    const auto spine = fit_spine(sheet, crest_polyline(fx.mesh, fx.division.crest), 1);
    const auto model = build_cross_sections(sheet, spine, fx.mesh, fx.division, 15,
                                            PlaneMode::RelaxedSpineNormalPlanes);

    REQUIRE(model.sections.size() == 15);
    int veins = 0;
    for (const auto& sec : model.sections) {
        veins += 2;
        // analytic spine is the major axis: normals within 2 degrees of x
        CHECK(std::abs(sec.plane_normal.dot(Vec3(1, 0, 0))) >= std::cos(2.0 * M_PI / 180));
        // veins lie in their plane
        for (const auto* vein : {&sec.vein_right, &sec.vein_left})
            for (const auto& q : *vein)
                CHECK(std::abs(sec.plane_normal.dot(q - sec.station)) <=
                      1e-6 * fx.mesh.bounds().diagonal());
        // vein ends on the crest (z near 0 ring)
        CHECK(std::abs(sec.vein_right.back().z()) <= 2 * fx.mesh.mean_edge_length());
        CHECK(std::abs(sec.vein_left.back().z()) <= 2 * fx.mesh.mean_edge_length());
    }
    CHECK(veins == 30);
    CHECK(model.rcc.pass());
    REQUIRE(model.rmf.size() == 15);
    for (std::size_t i = 0; i + 1 < model.rmf.size(); ++i) {
        const Quat qa(model.rmf[i]), qb(model.rmf[i + 1]);
        const double rot = 2 * safe_acos(std::abs(qa.dot(qb)));
        const double turn =
            safe_acos(model.rmf[i].col(0).dot(model.rmf[i + 1].col(0)));
        CHECK(rot <= turn * 1.001 + 1e-7);
    }
}

TEST_CASE("default chordal mode also fits the ellipsoid") {
    const auto& fx = ellipsoid_fixture();
    SweepOptions opt;
    opt.sheet_degree = 1;
    opt.spine_degree = 1;
    opt.stations = 15;
    opt.vein_samples = 3;
    const auto model = fit_swept_model(fx.mesh, fx.division, fx.cms, opt);
    CHECK(model.sections.size() == 15);
    CHECK(model.rcc.pass());
    CHECK(model.flat_gc.chords.size() == 15);
    CHECK(int(model.spokes.sites.size()) == 15 * 7);
}

TEST_CASE("spokes: opposite directions, matching parts, near-symmetric lengths") {
    const auto& fx = ellipsoid_fixture();
    SweepOptions opt;
    opt.sheet_degree = 1;
    opt.spine_degree = 1;
    opt.stations = 15;
    opt.vein_samples = 3;
    opt.mode = PlaneMode::RelaxedSpineNormalPlanes;
    const auto model = fit_swept_model(fx.mesh, fx.division, fx.cms, opt);

    REQUIRE(model.spokes.sites.size() == 105);
    const double c = 0.5;
    for (const auto& site : model.spokes.sites) {
        CHECK(site.up_dir.norm() == doctest::Approx(1.0).epsilon(1e-9));
        // tips on faces of the matching part
        const auto& tri_up = fx.mesh.faces()[site.face_up];
        const auto& tri_down = fx.mesh.faces()[site.face_down];
        int top_votes = 0, bottom_votes = 0;
        for (int k = 0; k < 3; ++k) {
            top_votes += fx.division.is_top(tri_up[k]);
            bottom_votes += !fx.division.is_top(tri_down[k]);
        }
        CHECK(top_votes >= 2);
        CHECK(bottom_votes >= 2);
        // mirror symmetry about z=0
        CHECK(std::abs(site.r_up - site.r_down) <= 0.02 * c);
        // tip = tail + r * dir
        CHECK((site.tip_up - (site.position + site.r_up * site.up_dir)).norm() <= 1e-9);
        CHECK((site.tip_down - (site.position - site.r_down * site.up_dir)).norm() <= 1e-9);
    }
}

TEST_CASE("an over-bent spine violates the relative curvature condition") {
    const auto& fx = ellipsoid_fixture();
    const auto sheet = fit_skeletal_sheet(fx.cms.points, 1);
    auto spine = fit_spine(sheet, crest_polyline(fx.mesh, fx.division.crest), 1);

    // replace the spine with a strong S-curve in the sheet plane: curvature
    // up to ~3 against a half-width of ~1, so consecutive normal planes must
    // cross inside
    std::vector<Vec2> wiggle;
    spine.points.clear();
    for (int i = 0; i <= 200; ++i) {
        const double x = -1.6 + 3.2 * i / 200.0;
        const double y = 0.35 * std::sin(3.0 * x);
        spine.points.push_back(sheet.lift({x, y}));
        wiggle.emplace_back(x, y);
    }
    spine.cumlen.assign(spine.points.size(), 0.0);
    for (std::size_t i = 1; i < spine.points.size(); ++i)
        spine.cumlen[i] = spine.cumlen[i - 1] + (spine.points[i] - spine.points[i - 1]).norm();
    spine.curve2d = fit_relaxed_cms_2d(wiggle, 7).poly;

    const auto model = build_cross_sections(sheet, spine, fx.mesh, fx.division, 15,
                                            PlaneMode::RelaxedSpineNormalPlanes);
    CHECK_FALSE(model.rcc.pass());
    bool any_negative_margin = false;
    for (const auto& p : model.rcc.pairs) any_negative_margin |= p.margin < 0;
    CHECK(any_negative_margin);
}

TEST_CASE("doubling the station count keeps the ellipsoid RCC-clean") {
    const auto& fx = ellipsoid_fixture();
    const auto sheet = fit_skeletal_sheet(fx.cms.points, 1);
    const auto spine = fit_spine(sheet, crest_polyline(fx.mesh, fx.division.crest), 1);
    for (int n : {15, 30}) {
        const auto model = build_cross_sections(sheet, spine, fx.mesh, fx.division, n,
                                                PlaneMode::RelaxedSpineNormalPlanes);
        CHECK(model.rcc.pass());
    }
}

TEST_CASE("rotation minimizing frames on a helix stay orthonormal") {
    std::vector<Vec3> pts;
    for (int i = 0; i <= 64; ++i) {
        const double t = 4 * M_PI * i / 64.0;
        pts.emplace_back(std::cos(t), std::sin(t), 0.15 * t);
    }
    const auto frames = rotation_minimizing_frames(pts, Vec3(0, 0, 1));
    REQUIRE(frames.size() == pts.size());
    for (const auto& f : frames) {
        CHECK(std::abs(f.determinant() - 1.0) <= 1e-9);
        CHECK((f.transpose() * f - Mat3::Identity()).norm() <= 1e-9);
    }
}

TEST_CASE("ply export writes spine, veins and spokes") {
    const auto& fx = ellipsoid_fixture();
    SweepOptions opt;
    opt.sheet_degree = 1;
    opt.spine_degree = 1;
    const auto model = fit_swept_model(fx.mesh, fx.division, fx.cms, opt);
    save_swept_model_ply(model, "/tmp/dss_sweep_test");
    CHECK(std::filesystem::exists("/tmp/dss_sweep_test/spine.ply"));
    CHECK(std::filesystem::exists("/tmp/dss_sweep_test/veins.ply"));
    CHECK(std::filesystem::exists("/tmp/dss_sweep_test/spokes.ply"));
    std::filesystem::remove_all("/tmp/dss_sweep_test");
}

}  // TEST_SUITE
