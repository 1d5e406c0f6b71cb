#include <doctest.h>

#include <dss/mathfn.hpp>
#include <dss/stats.hpp>

#include "support.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>

using namespace dss;

namespace {

// chain-topology rep with deterministic geometry
LpDssRep base_rep(int n_frames) {
    LpDssRep rep;
    rep.root = 0;
    rep.parent.resize(n_frames);
    rep.parent[0] = -1;
    for (int i = 1; i < n_frames; ++i) rep.parent[i] = i - 1;
    Rng rng(99);
    for (int i = 0; i < n_frames; ++i) {
        rep.frames.push_back(
            i == 0 ? Quat::Identity()
                   : Quat(Eigen::AngleAxisd(0.1 + 0.02 * i, rng.unit_vec3())));
        rep.spoke_dirs.push_back(rng.unit_vec3());
        rep.spoke_lens_up.push_back(rng.uniform(0.5, 1.5));
        rep.spoke_lens_down.push_back(rng.uniform(0.5, 1.5));
        rep.site_station.push_back(i);
        rep.site_side.push_back(0);
        rep.site_slot.push_back(0);
        rep.origins.push_back(Vec3(i, 0, 0));
        if (i > 0) {
            rep.connection_child.push_back(i);
            rep.connection_dirs.push_back(rng.unit_vec3());
            rep.connection_lens.push_back(rng.uniform(0.5, 2.0));
        }
    }
    rep.validate();
    return rep;
}

LpDssRep perturb(const LpDssRep& base, Rng& rng, double scale) {
    LpDssRep rep = base;
    for (auto& q : rep.frames) {
        const Quat noise(Eigen::AngleAxisd(scale * rng.normal(), rng.unit_vec3()));
        q = (q * noise).normalized();
    }
    auto jitter_dir = [&](Vec3& v) {
        v = (v + scale * Vec3(rng.normal(), rng.normal(), rng.normal())).normalized();
    };
    for (auto& v : rep.connection_dirs) jitter_dir(v);
    for (auto& v : rep.spoke_dirs) jitter_dir(v);
    for (auto& l : rep.connection_lens) l *= std::exp(scale * rng.normal());
    for (auto& l : rep.spoke_lens_up) l *= std::exp(scale * rng.normal());
    for (auto& l : rep.spoke_lens_down) l *= std::exp(scale * rng.normal());
    return rep;
}

std::vector<LpDssRep> cohort_of(int n, std::uint64_t seed, double scale = 0.05,
                                int frames = 7) {
    const auto base = base_rep(frames);
    Rng rng(seed);
    std::vector<LpDssRep> out;
    for (int i = 0; i < n; ++i) out.push_back(perturb(base, rng, scale));
    return out;
}

MatX gaussian_features(int n, int d, std::uint64_t seed, double shift_col0 = 0) {
    Rng rng(seed);
    MatX x(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) x(i, j) = rng.normal() + (j == 0 ? shift_col0 : 0.0);
    return x;
}

// Simpson quadrature of the beta density, independent of the implementation
double beta_cdf_quadrature(double a, double b, double x) {
    const int n = 20000;
    auto dens = [&](double t) {
        if (t <= 0 || t >= 1) return 0.0;
        return std::exp((a - 1) * std::log(t) + (b - 1) * std::log1p(-t) +
                        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b));
    };
    double sum = 0;
    for (int i = 0; i < n; ++i) {
        const double t0 = x * i / n, t1 = x * (i + 1) / n;
        sum += (t1 - t0) / 6.0 * (dens(t0) + 4 * dens(0.5 * (t0 + t1)) + dens(t1));
    }
    return sum;
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("incomplete beta matches quadrature") {
    for (auto [a, b, x] : {std::tuple{2.0, 3.0, 0.4}, {7.5, 2.0, 0.9}, {10.0, 10.0, 0.5},
                           {1.5, 4.0, 0.25}}) {
        CHECK(incomplete_beta(a, b, x) ==
              doctest::Approx(beta_cdf_quadrature(a, b, x)).epsilon(1e-7));
    }
    // singular-endpoint case against the arcsine law
    CHECK(incomplete_beta(0.5, 0.5, 0.7) ==
          doctest::Approx(2.0 / M_PI * std::asin(std::sqrt(0.7))).epsilon(1e-9));
}

TEST_CASE("t and F reference distributions behave") {
    CHECK(student_t_p_two_sided(0.0, 12) == doctest::Approx(1.0));
    CHECK(student_t_p_two_sided(2.0, 12) == doctest::Approx(student_t_p_two_sided(-2.0, 12)));
    CHECK(student_t_p_two_sided(3.0, 12) < student_t_p_two_sided(1.0, 12));
    CHECK(f_upper_tail(0.0, 3, 10) == doctest::Approx(1.0));
    CHECK(f_upper_tail(5.0, 3, 10) < f_upper_tail(1.0, 3, 10));
    // F(1,d) upper tail equals the two-sided t p-value at sqrt(f)
    CHECK(f_upper_tail(4.0, 1, 15) == doctest::Approx(student_t_p_two_sided(2.0, 15)).epsilon(1e-9));
}

TEST_CASE("euclideanize: identical members give zero spherical features") {
    std::vector<LpDssRep> cohort(6, base_rep(7));
    const auto e = euclideanize(cohort);
    for (const auto& rep : e.reps) {
        CHECK(rep.frame_feats.cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(rep.dir_feats.cwiseAbs().maxCoeff() <= 1e-12);
    }
    // log-lengths equal the logs of the shared lengths
    CHECK(e.reps[0].len_feats[0] ==
          doctest::Approx(std::log(cohort[0].connection_lens[0])).epsilon(1e-12));
}

TEST_CASE("euclideanize is antipodally invariant in the quaternions") {
    auto cohort = cohort_of(8, 3);
    const auto base = euclideanize(cohort);
    auto flipped = cohort;
    for (auto& q : flipped[2].frames) q.coeffs() = -q.coeffs();
    const auto alt = euclideanize(flipped);
    for (std::size_t s = 0; s < cohort.size(); ++s) {
        CHECK((alt.reps[s].frame_feats - base.reps[s].frame_feats).cwiseAbs().maxCoeff() <=
              1e-12);
    }
}

TEST_CASE("euclideanize round-trips through the exponential map") {
    auto cohort = cohort_of(10, 4, 0.15);
    const auto e = euclideanize(cohort);
    for (std::size_t s = 0; s < cohort.size(); ++s) {
        for (int i = 0; i < e.n_f; ++i) {
            const Eigen::Vector4d mu = e.frame_means[i];
            const Eigen::Vector4d v = e.frame_bases[i] * e.reps[s].frame_feats.row(i).transpose();
            const double theta = v.norm();
            const Eigen::Vector4d back =
                theta < 1e-14 ? mu
                              : Eigen::Vector4d(std::cos(theta) * mu +
                                                std::sin(theta) / theta * v);
            const Quat& q = cohort[s].frames[i];
            const Eigen::Vector4d qa(q.w(), q.x(), q.y(), q.z());
            CHECK(std::abs(std::abs(back.dot(qa)) - 1.0) <= 1e-9);
        }
        for (int j = 0; j < e.n_c; ++j) {
            const Vec3 mu = e.dir_means[j];
            const Vec3 v = e.dir_bases[j] * e.reps[s].dir_feats.row(j).transpose();
            const double theta = v.norm();
            const Vec3 back = theta < 1e-14
                                  ? mu
                                  : Vec3(std::cos(theta) * mu + std::sin(theta) / theta * v);
            CHECK((back - cohort[s].connection_dirs[j]).norm() <= 1e-9);
        }
    }
}

TEST_CASE("euclideanize rejects topology mismatches") {
    auto a = cohort_of(3, 5);
    a.push_back(base_rep(8));
    CHECK_THROWS_AS(euclideanize(a), Error);
}

TEST_CASE("vectorize exposes the 3nf+2nc GOPs in fixed order") {
    const auto cohort = cohort_of(6, 6);
    const auto e = euclideanize(cohort);
    const auto f = vectorize(e);
    const int nf = e.n_f, nc = e.n_c;
    REQUIRE(int(f.gops.size()) == 3 * nf + 2 * nc);
    CHECK(f.gops.front().kind == GopKind::Frame);
    CHECK(f.gops[nf].kind == GopKind::ConnectionDir);
    CHECK(f.gops[nf + nc].kind == GopKind::SpokeDir);
    CHECK(f.gops[2 * nf + nc].kind == GopKind::ConnectionLen);
    CHECK(f.gops.back().kind == GopKind::SpokeLenPair);
    CHECK(f.x.cols() == 7 * nf + 3 * nc);
}

TEST_CASE("global test: clear separation is detected") {
    const auto a = gaussian_features(20, 5, 11);
    const auto b = gaussian_features(20, 5, 12, 5.0);
    const auto g = global_test(a, b, 1000, 7);
    CHECK(g.p_value <= 0.001);
    CHECK(g.z_score > 3.0);
}

TEST_CASE("global test: permutation p-value floor") {
    const auto a = gaussian_features(10, 3, 21);
    const auto b = gaussian_features(10, 3, 22);
    const auto g = global_test(a, b, 99, 5);
    CHECK(g.p_value >= 1.0 / 100.0);
}

TEST_CASE("global test is exactly label-symmetric") {
    const auto a = gaussian_features(12, 4, 31, 0.6);
    const auto b = gaussian_features(12, 4, 32);
    const auto g1 = global_test(a, b, 500, 9);
    const auto g2 = global_test(b, a, 500, 9);
    CHECK(g1.p_value == g2.p_value);
    CHECK(g1.statistic == g2.statistic);
}

TEST_CASE("global test is deterministic and standardization-invariant") {
    const auto a = gaussian_features(10, 4, 41, 0.5);
    auto b = gaussian_features(10, 4, 42);
    const auto g1 = global_test(a, b, 300, 13);
    const auto g2 = global_test(a, b, 300, 13);
    CHECK(g1.p_value == g2.p_value);

    MatX a_scaled = a;
    MatX b_scaled = b;
    a_scaled.col(2) *= 37.0;
    b_scaled.col(2) *= 37.0;
    const auto g3 = global_test(a_scaled, b_scaled, 300, 13);
    CHECK(g3.p_value == g1.p_value);
}

TEST_CASE("global test drops zero-variance features") {
    auto a = gaussian_features(8, 3, 51);
    auto b = gaussian_features(8, 3, 52);
    a.col(1).setConstant(4.0);
    b.col(1).setConstant(4.0);
    const auto g = global_test(a, b, 100, 3);
    CHECK(g.dropped_features == 1);
}

TEST_CASE("partial tests: census and a planted spoke-length effect") {
    auto a = cohort_of(20, 61, 0.05);
    auto b = cohort_of(20, 62, 0.05);
    for (auto& rep : b) rep.spoke_lens_up[3] *= 1.8;  // strong local effect

    std::vector<LpDssRep> all(a);
    all.insert(all.end(), b.begin(), b.end());
    const auto e = euclideanize(all);
    EuclideanizedCohort ea, eb;
    ea.n_f = eb.n_f = e.n_f;
    ea.n_c = eb.n_c = e.n_c;
    ea.reps.assign(e.reps.begin(), e.reps.begin() + 20);
    eb.reps.assign(e.reps.begin() + 20, e.reps.end());
    const auto fa = vectorize(ea), fb = vectorize(eb);

    const auto part = partial_tests(fa, fb, PartialMethod::Hotelling, 200, 17);
    REQUIRE(int(part.raw_p.size()) == 3 * e.n_f + 2 * e.n_c);

    // the planted GOP is a spoke-length pair
    int planted = -1;
    for (std::size_t k = 0; k < part.gops.size(); ++k)
        if (part.gops[k].kind == GopKind::SpokeLenPair && part.gops[k].index == 3)
            planted = int(k);
    REQUIRE(planted >= 0);
    CHECK(part.raw_p[planted] <= 1e-4);
}

TEST_CASE("partial tests: permutation method agrees on the planted effect") {
    auto a = cohort_of(15, 71, 0.05);
    auto b = cohort_of(15, 72, 0.05);
    for (auto& rep : b) rep.spoke_lens_up[2] *= 2.0;
    std::vector<LpDssRep> all(a);
    all.insert(all.end(), b.begin(), b.end());
    const auto e = euclideanize(all);
    EuclideanizedCohort ea, eb;
    ea.n_f = eb.n_f = e.n_f;
    ea.n_c = eb.n_c = e.n_c;
    ea.reps.assign(e.reps.begin(), e.reps.begin() + 15);
    eb.reps.assign(e.reps.begin() + 15, e.reps.end());
    const auto part =
        partial_tests(vectorize(ea), vectorize(eb), PartialMethod::Permutation, 499, 23);
    int planted = -1;
    for (std::size_t k = 0; k < part.gops.size(); ++k)
        if (part.gops[k].kind == GopKind::SpokeLenPair && part.gops[k].index == 2)
            planted = int(k);
    CHECK(part.raw_p[planted] <= 0.01);
}

TEST_CASE("hotelling falls back to permutation on singular covariance") {
    // constant GOP features: perturbation scale zero
    auto a = cohort_of(10, 81, 0.0);
    auto b = cohort_of(10, 82, 0.0);
    std::vector<LpDssRep> all(a);
    all.insert(all.end(), b.begin(), b.end());
    const auto e = euclideanize(all);
    EuclideanizedCohort ea, eb;
    ea.n_f = eb.n_f = e.n_f;
    ea.n_c = eb.n_c = e.n_c;
    ea.reps.assign(e.reps.begin(), e.reps.begin() + 10);
    eb.reps.assign(e.reps.begin() + 10, e.reps.end());
    const auto part =
        partial_tests(vectorize(ea), vectorize(eb), PartialMethod::Hotelling, 99, 29);
    bool any_fallback = false;
    for (std::size_t k = 0; k < part.gops.size(); ++k)
        if (part.gops[k].dim > 1 && part.fallback[k]) {
            any_fallback = true;
            CHECK(part.raw_p[k] == doctest::Approx(1.0));
        }
    CHECK(any_fallback);
}

TEST_CASE("null calibration: raw partial p-values are roughly uniform") {
    int low = 0, total = 0;
    for (int rep = 0; rep < 20; ++rep) {
        auto a = cohort_of(12, 100 + 2 * rep, 0.08);
        auto b = cohort_of(12, 101 + 2 * rep, 0.08);
        std::vector<LpDssRep> all(a);
        all.insert(all.end(), b.begin(), b.end());
        const auto e = euclideanize(all);
        EuclideanizedCohort ea, eb;
        ea.n_f = eb.n_f = e.n_f;
        ea.n_c = eb.n_c = e.n_c;
        ea.reps.assign(e.reps.begin(), e.reps.begin() + 12);
        eb.reps.assign(e.reps.begin() + 12, e.reps.end());
        const auto part =
            partial_tests(vectorize(ea), vectorize(eb), PartialMethod::Hotelling, 99, rep);
        for (double p : part.raw_p) {
            low += p < 0.05;
            ++total;
        }
    }
    const double rate = double(low) / total;
    CHECK(rate >= 0.005);
    CHECK(rate <= 0.12);
}

TEST_CASE("bh adjustment oracle") {
    const auto r = bh_adjust({0.01, 0.02, 0.03, 0.04}, 0.1);
    for (double v : r.adjusted) CHECK(v == doctest::Approx(0.04).epsilon(1e-15));
    for (auto s : r.significant) CHECK(s == 1);

    const auto single = bh_adjust({0.37}, 0.1);
    CHECK(single.adjusted[0] == doctest::Approx(0.37).epsilon(1e-15));
    CHECK(single.significant[0] == 0);
}

TEST_CASE("bh adjusted values are nondecreasing in rank order") {
    Rng rng(7);
    std::vector<double> p;
    for (int i = 0; i < 40; ++i) p.push_back(rng.uniform());
    const auto r = bh_adjust(p, 0.1);
    std::vector<int> order(p.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return p[i] < p[j]; });
    for (std::size_t k = 1; k < order.size(); ++k)
        CHECK(r.adjusted[order[k]] >= r.adjusted[order[k - 1]] - 1e-15);
    for (std::size_t k = 0; k < p.size(); ++k) CHECK(r.adjusted[k] >= p[k] - 1e-15);
}

TEST_CASE("classification: separable cohorts are perfect") {
    const auto a = gaussian_features(20, 4, 91);
    const auto b = gaussian_features(20, 4, 92, 12.0);
    for (auto method : {Classifier::Knn, Classifier::NaiveBayes}) {
        const auto r = classify_cv(a, b, method, 10, 3);
        CHECK(r.accuracy == doctest::Approx(1.0));
        CHECK(r.kappa == doctest::Approx(1.0));
        CHECK(r.folds == 10);
    }
}

TEST_CASE("classification: chance-level data has near-zero kappa") {
    double kappa_sum = 0;
    const int reps = 10;
    for (int t = 0; t < reps; ++t) {
        const auto a = gaussian_features(20, 4, 200 + 2 * t);
        const auto b = gaussian_features(20, 4, 201 + 2 * t);
        kappa_sum += classify_cv(a, b, Classifier::Knn, 10, t).kappa;
    }
    const double mean_kappa = kappa_sum / reps;
    CHECK(mean_kappa >= -0.15);
    CHECK(mean_kappa <= 0.15);
}

TEST_CASE("full report pipeline writes json and csv") {
    auto a = cohort_of(8, 301, 0.05);
    auto b = cohort_of(8, 302, 0.05);
    const auto report = run_test_suite(a, b, 99, 5);
    save_test_report_json(report, "/tmp/dss_report.json");
    save_gop_significance_csv(report, a[0], "/tmp/dss_gops.csv");
    CHECK(std::ifstream("/tmp/dss_report.json").good());
    CHECK(std::ifstream("/tmp/dss_gops.csv").good());
    std::remove("/tmp/dss_report.json");
    std::remove("/tmp/dss_gops.csv");
}

}  // TEST_SUITE
