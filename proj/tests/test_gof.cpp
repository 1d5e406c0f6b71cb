#include <doctest.h>

#include <dss/gof.hpp>
#include <dss/synth.hpp>

#include "support.hpp"

#include <cstdio>
#include <fstream>

using namespace dss;

namespace {

Mat3 frame_about_z(double angle) {
    return Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix();
}

StationFrames constant_frames(int sections, int per_section) {
    StationFrames f;
    for (int i = 0; i < sections + 2; ++i) f.spine.push_back(Mat3::Identity());
    for (int s = 0; s < sections; ++s) {
        f.sections.emplace_back(per_section, Mat3::Identity());
        f.rotation_offsets.push_back(0.0);
    }
    return f;
}

}  // namespace

TEST_SUITE("gof") {

TEST_CASE("skeletal symmetry: perfect pairing gives one") {
    const std::vector<double> l{1.0, 2.0, 0.7};
    CHECK(skeletal_symmetry(l, l, {3.0, 1.1}, {3.0, 1.1}) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("skeletal symmetry: hand-evaluated single pair") {
    CHECK(skeletal_symmetry({1.0}, {2.0}, {}, {}) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("skeletal symmetry stays in [0,1]") {
    Rng rng(5);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> up, down, vr, vl;
        for (int i = 0; i < 10; ++i) {
            up.push_back(rng.uniform(0.1, 3.0));
            down.push_back(rng.uniform(0.1, 3.0));
            vr.push_back(rng.uniform(0.1, 3.0));
            vl.push_back(rng.uniform(0.1, 3.0));
        }
        const double s = skeletal_symmetry(up, down, vr, vl);
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
    }
}

TEST_CASE("skeletal symmetry rejects zero lengths") {
    CHECK_THROWS_AS(skeletal_symmetry({0.0}, {1.0}, {}, {}), Error);
}

TEST_CASE("tidiness of constant frames is one") {
    const auto t = tidiness(constant_frames(5, 9));
    CHECK(t.average == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.strict == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a single opposite frame jump zeroes strict tidiness") {
    StationFrames f;
    f.spine.push_back(Mat3::Identity());
    f.spine.push_back(frame_about_z(M_PI));  // 180-degree jump
    const auto t = tidiness(f);
    CHECK(t.strict == doctest::Approx(0.0).epsilon(1e-12));
    // with no sections the normalizer is 2/pi as well
    CHECK(t.average == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("tidiness requires two frames per curve") {
    StationFrames f;
    f.spine.push_back(Mat3::Identity());
    CHECK_THROWS_AS(tidiness(f), Error);
}

TEST_CASE("score arithmetic matches the reference fits") {
    GofComponents c;
    c.volume_coverage = 0.890;
    c.skeletal_symmetry = 0.873;
    c.avg_tidiness = 0.973;
    c.strict_tidiness = 0.890;
    const auto r = gof_score(c);
    CHECK(std::round(r.score1 * 1000) / 1000 == doctest::Approx(0.756));
    CHECK(std::round(r.score2 * 1000) / 1000 == doctest::Approx(0.692));
}

TEST_CASE("any zero component zeroes the score") {
    GofComponents c;
    c.volume_coverage = 0.0;
    c.skeletal_symmetry = 0.9;
    c.avg_tidiness = 0.9;
    c.strict_tidiness = 0.9;
    const auto r = gof_score(c);
    CHECK(r.score1 == 0.0);
    CHECK(r.score2 == 0.0);
}

TEST_CASE("score is monotone in each component") {
    GofComponents c;
    c.volume_coverage = 0.8;
    c.skeletal_symmetry = 0.7;
    c.avg_tidiness = 0.9;
    c.strict_tidiness = 0.85;
    const auto base = gof_score(c);
    GofComponents c2 = c;
    c2.skeletal_symmetry = 0.75;
    CHECK(gof_score(c2).score1 > base.score1);
    CHECK(gof_score(c2).score2 > base.score2);
}

TEST_CASE("out-of-range components are rejected") {
    GofComponents c;
    c.volume_coverage = 1.2;
    c.skeletal_symmetry = c.avg_tidiness = c.strict_tidiness = 0.5;
    CHECK_THROWS_AS(gof_score(c), Error);
}

TEST_CASE("collapsing onto the vertices themselves gives full coverage") {
    const auto mesh = make_ellipsoid(1.5, 1.0, 0.6, 2);
    CHECK(volume_coverage_points(mesh, mesh.vertices(), 96) == doctest::Approx(1.0));
}

TEST_CASE("undersized implied clouds are rejected") {
    const auto mesh = make_ellipsoid(1.5, 1.0, 0.6, 1);
    std::vector<Vec3> few(mesh.vertices().begin(), mesh.vertices().begin() + 20);
    CHECK_THROWS_AS(volume_coverage_points(mesh, few, 64), Error);
}

TEST_CASE("csv and table writers") {
    GofComponents c;
    c.volume_coverage = 0.9;
    c.skeletal_symmetry = 0.8;
    c.avg_tidiness = 0.95;
    c.strict_tidiness = 0.85;
    auto r = gof_score(c);
    r.sheet_degree = 2;
    r.spine_degree = 3;
    save_gof_csv({r}, "/tmp/dss_gof.csv");
    std::ifstream in("/tmp/dss_gof.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header.find("score2") != std::string::npos);
    std::remove("/tmp/dss_gof.csv");
    CHECK(format_gof_table({r}).find("2, 3") != std::string::npos);
}

}  // TEST_SUITE
