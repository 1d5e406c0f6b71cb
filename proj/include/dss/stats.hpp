#pragma once

#include <dss/common.hpp>
#include <dss/lp.hpp>

namespace dss {

// Tangent-space coordinates per subject: spherical GOPs mapped at their
// per-GOP Frechet mean, lengths to natural log.
struct EuclideanizedRep {
    MatX frame_feats;  // n_f x 3, tangent at the quaternion mean
    MatX dir_feats;    // (n_c + n_f) x 2: connection dirs then up-spoke dirs
    VecX len_feats;    // n_c + 2 n_f: connection lens, r+ then r-
};

struct EuclideanizedCohort {
    std::vector<EuclideanizedRep> reps;
    int n_f = 0, n_c = 0;

    // base points and tangent bases, kept for exp/log round-trips
    std::vector<Eigen::Vector4d> frame_means;            // per frame GOP
    std::vector<Eigen::Matrix<double, 4, 3>> frame_bases;
    std::vector<Vec3> dir_means;                         // per direction GOP
    std::vector<Eigen::Matrix<double, 3, 2>> dir_bases;
};

// All reps must share the same topology. Quaternions are hemisphere-aligned
// to the running mean, so q and -q produce identical features.
EuclideanizedCohort euclideanize(const std::vector<LpDssRep>& cohort);

enum class GopKind { Frame, ConnectionDir, SpokeDir, ConnectionLen, SpokeLenPair };

const char* to_string(GopKind kind);

struct GopInfo {
    GopKind kind;
    int index;      // GOP index within its kind
    int col_begin;  // first feature column
    int dim;
};

// Subjects x features, with the GOP -> column map used by partial tests.
// Order: frames, connection dirs, spoke dirs, connection lens, spoke length
// pairs; n_t = 3 n_f + 2 n_c GOPs in total.
struct FeatureMatrix {
    MatX x;
    std::vector<GopInfo> gops;
};

FeatureMatrix vectorize(const EuclideanizedCohort& cohort);

struct GlobalTest {
    double statistic = 0;
    double z_score = 0;
    double p_value = 1;
    int permutations = 0;
    int dropped_features = 0;
    std::string direction_rule = "standardized-mean-difference";
};

// Direction-projection permutation test with the standardized mean-difference
// direction, recomputed per permutation.
GlobalTest global_test(const MatX& a, const MatX& b, int permutations, std::uint64_t seed);

enum class PartialMethod { Hotelling, Permutation };

struct PartialTests {
    std::vector<double> raw_p;           // one per GOP, fixed order
    std::vector<GopInfo> gops;
    std::vector<std::uint8_t> fallback;  // Hotelling replaced by permutation
};

// Per-GOP two-sample tests: Hotelling T^2 on multivariate GOPs, pooled
// two-sample t on scalar ones; singular pooled covariance falls back to a
// permutation mean-difference test.
PartialTests partial_tests(const FeatureMatrix& a, const FeatureMatrix& b, PartialMethod method,
                           int permutations, std::uint64_t seed);

struct BhResult {
    std::vector<double> adjusted;
    std::vector<std::uint8_t> significant;
};

// Benjamini-Hochberg step-up adjustment at the given false discovery rate.
BhResult bh_adjust(const std::vector<double>& p, double fdr);

struct TestReport {
    GlobalTest global;
    PartialTests partial;
    BhResult bh;
    double alpha = 0.05;
    double fdr = 0.1;
};

TestReport run_test_suite(const std::vector<LpDssRep>& a, const std::vector<LpDssRep>& b,
                          int permutations, std::uint64_t seed, double alpha = 0.05,
                          double fdr = 0.1, PartialMethod method = PartialMethod::Hotelling);

void save_test_report_json(const TestReport& report, const std::string& path);
// per-GOP table with site locations from an exemplar rep, for rendering
void save_gop_significance_csv(const TestReport& report, const LpDssRep& exemplar,
                               const std::string& path);

enum class Classifier { Knn, NaiveBayes };

struct ClassifyResult {
    double accuracy = 0, kappa = 0, sensitivity = 0, specificity = 0;
    int folds = 0;
};

// Stratified k-fold cross-validation; KNN uses k=5 on per-fold standardized
// features, the alternative is Gaussian naive Bayes.
ClassifyResult classify_cv(const MatX& a, const MatX& b, Classifier method, int folds,
                           std::uint64_t seed);

void save_classify_json(const ClassifyResult& result, const std::string& path);

}  // namespace dss
