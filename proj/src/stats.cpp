#include <dss/stats.hpp>

#include <dss/mathfn.hpp>

#include <nlohmann/json.hpp>

#include <Eigen/Eigenvalues>

#include <fstream>
#include <numeric>

namespace dss {

namespace {

// ---- sphere helpers (points as unit vectors in R^{d+1}) ----

template <int D>
using SPoint = Eigen::Matrix<double, D, 1>;

template <int D>
SPoint<D> log_map(const SPoint<D>& mu, const SPoint<D>& x) {
    const double c = std::clamp(mu.dot(x), -1.0, 1.0);
    const double theta = std::acos(c);
    if (theta < 1e-14) return SPoint<D>::Zero();
    return (x - c * mu) * (theta / std::sin(theta));
}

template <int D>
SPoint<D> exp_map(const SPoint<D>& mu, const SPoint<D>& v) {
    const double theta = v.norm();
    if (theta < 1e-14) return mu;
    return std::cos(theta) * mu + std::sin(theta) / theta * v;
}

// Frechet mean by iterative tangent averaging; hemisphere aligns the points
// to the running mean when `antipodal` (quaternion case).
template <int D>
SPoint<D> frechet_mean(const std::vector<SPoint<D>>& pts, bool antipodal) {
    SPoint<D> mu = SPoint<D>::Zero();
    for (const auto& p : pts) mu += (antipodal && p.dot(pts[0]) < 0) ? SPoint<D>(-p) : p;
    const double n0 = mu.norm();
    mu = n0 > 1e-12 ? SPoint<D>(mu / n0) : pts[0];

    for (int iter = 0; iter < 100; ++iter) {
        SPoint<D> tangent = SPoint<D>::Zero();
        for (const auto& p : pts) {
            const SPoint<D> q = (antipodal && p.dot(mu) < 0) ? SPoint<D>(-p) : p;
            tangent += log_map<D>(mu, q);
        }
        tangent /= double(pts.size());
        if (tangent.norm() < 1e-14) return mu;
        mu = exp_map<D>(mu, tangent);
    }
    throw Error("stats", "Frechet mean iteration did not converge");
}

// deterministic orthonormal tangent basis at mu
template <int D>
Eigen::Matrix<double, D, D - 1> tangent_basis(const SPoint<D>& mu) {
    // canonical axes least aligned with mu, Gram-Schmidt against mu
    std::array<int, D> order;
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return std::abs(mu[i]) < std::abs(mu[j]); });
    Eigen::Matrix<double, D, D - 1> basis;
    int col = 0;
    for (int k = 0; k < D && col < D - 1; ++k) {
        SPoint<D> v = SPoint<D>::Zero();
        v[order[k]] = 1.0;
        v -= v.dot(mu) * mu;
        for (int c = 0; c < col; ++c) v -= v.dot(basis.col(c)) * basis.col(c);
        const double len = v.norm();
        if (len < 1e-8) continue;
        basis.col(col++) = v / len;
    }
    if (col != D - 1) throw Error("stats", "degenerate tangent basis");
    return basis;
}

void check_topology(const std::vector<LpDssRep>& cohort) {
    if (cohort.size() < 2) throw Error("stats", "cohort needs at least 2 members");
    const auto& first = cohort.front();
    for (const auto& rep : cohort) {
        if (rep.parent != first.parent || rep.root != first.root ||
            rep.connection_child != first.connection_child)
            throw Error("stats", "cohort members have mismatched topology");
    }
}

}  // namespace

EuclideanizedCohort euclideanize(const std::vector<LpDssRep>& cohort) {
    check_topology(cohort);
    const int n = int(cohort.size());
    const int nf = cohort[0].frame_count();
    const int nc = cohort[0].connection_count();

    EuclideanizedCohort out;
    out.n_f = nf;
    out.n_c = nc;
    out.reps.resize(n);
    for (auto& r : out.reps) {
        r.frame_feats.resize(nf, 3);
        r.dir_feats.resize(nc + nf, 2);
        r.len_feats.resize(nc + 2 * nf);
    }

    for (int i = 0; i < nf; ++i) {
        std::vector<Eigen::Vector4d> pts;
        pts.reserve(n);
        for (const auto& rep : cohort) {
            const Quat& q = rep.frames[i];
            pts.emplace_back(q.w(), q.x(), q.y(), q.z());
        }
        const auto mu = frechet_mean<4>(pts, true);
        const auto basis = tangent_basis<4>(mu);
        out.frame_means.push_back(mu);
        out.frame_bases.push_back(basis);
        for (int s = 0; s < n; ++s) {
            const Eigen::Vector4d q = pts[s].dot(mu) < 0 ? Eigen::Vector4d(-pts[s]) : pts[s];
            out.reps[s].frame_feats.row(i) = (basis.transpose() * log_map<4>(mu, q)).transpose();
        }
    }

    auto do_dir = [&](int row, auto getter) {
        std::vector<Vec3> pts;
        pts.reserve(n);
        for (const auto& rep : cohort) pts.push_back(getter(rep));
        const auto mu = frechet_mean<3>(pts, false);
        const auto basis = tangent_basis<3>(mu);
        out.dir_means.push_back(mu);
        out.dir_bases.push_back(basis);
        for (int s = 0; s < n; ++s)
            out.reps[s].dir_feats.row(row) =
                (basis.transpose() * log_map<3>(mu, pts[s])).transpose();
    };
    for (int j = 0; j < nc; ++j)
        do_dir(j, [j](const LpDssRep& r) { return r.connection_dirs[j]; });
    for (int i = 0; i < nf; ++i)
        do_dir(nc + i, [i](const LpDssRep& r) { return r.spoke_dirs[i]; });

    for (int s = 0; s < n; ++s) {
        const auto& rep = cohort[s];
        auto& len = out.reps[s].len_feats;
        for (int j = 0; j < nc; ++j) len[j] = std::log(rep.connection_lens[j]);
        for (int i = 0; i < nf; ++i) len[nc + i] = std::log(rep.spoke_lens_up[i]);
        for (int i = 0; i < nf; ++i) len[nc + nf + i] = std::log(rep.spoke_lens_down[i]);
    }
    return out;
}

const char* to_string(GopKind kind) {
    switch (kind) {
        case GopKind::Frame: return "frame";
        case GopKind::ConnectionDir: return "connection_dir";
        case GopKind::SpokeDir: return "spoke_dir";
        case GopKind::ConnectionLen: return "connection_len";
        case GopKind::SpokeLenPair: return "spoke_len";
    }
    return "?";
}

FeatureMatrix vectorize(const EuclideanizedCohort& cohort) {
    const int nf = cohort.n_f, nc = cohort.n_c;
    const int n = int(cohort.reps.size());
    const int dim = 3 * nf + 2 * nc + 2 * nf + nc + 2 * nf;

    FeatureMatrix out;
    out.x.resize(n, dim);
    int col = 0;
    for (int i = 0; i < nf; ++i) {
        out.gops.push_back({GopKind::Frame, i, col, 3});
        col += 3;
    }
    for (int j = 0; j < nc; ++j) {
        out.gops.push_back({GopKind::ConnectionDir, j, col, 2});
        col += 2;
    }
    for (int i = 0; i < nf; ++i) {
        out.gops.push_back({GopKind::SpokeDir, i, col, 2});
        col += 2;
    }
    for (int j = 0; j < nc; ++j) {
        out.gops.push_back({GopKind::ConnectionLen, j, col, 1});
        col += 1;
    }
    for (int i = 0; i < nf; ++i) {
        out.gops.push_back({GopKind::SpokeLenPair, i, col, 2});
        col += 2;
    }

    for (int s = 0; s < n; ++s) {
        const auto& r = cohort.reps[s];
        int c = 0;
        for (int i = 0; i < nf; ++i)
            for (int k = 0; k < 3; ++k) out.x(s, c++) = r.frame_feats(i, k);
        for (int j = 0; j < nc; ++j)
            for (int k = 0; k < 2; ++k) out.x(s, c++) = r.dir_feats(j, k);
        for (int i = 0; i < nf; ++i)
            for (int k = 0; k < 2; ++k) out.x(s, c++) = r.dir_feats(nc + i, k);
        for (int j = 0; j < nc; ++j) out.x(s, c++) = r.len_feats[j];
        for (int i = 0; i < nf; ++i) {
            out.x(s, c++) = r.len_feats[nc + i];
            out.x(s, c++) = r.len_feats[nc + nf + i];
        }
    }
    return out;
}

namespace {

// pooled per-column standardization; zero-variance columns removed
MatX standardize_pooled(const MatX& a, const MatX& b, int& dropped) {
    const int n = int(a.rows() + b.rows());
    MatX pooled(n, a.cols());
    pooled.topRows(a.rows()) = a;
    pooled.bottomRows(b.rows()) = b;
    const Eigen::RowVectorXd mean = pooled.colwise().mean();
    MatX centered = pooled.rowwise() - mean;
    Eigen::RowVectorXd sd = (centered.array().square().colwise().sum() / (n - 1)).sqrt();

    std::vector<int> keep;
    const double floor = 1e-12 * std::max(1.0, sd.maxCoeff());
    for (int c = 0; c < sd.size(); ++c)
        if (sd[c] > floor) keep.push_back(c);
    dropped = int(sd.size()) - int(keep.size());

    MatX out(n, keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k)
        out.col(k) = centered.col(keep[k]) / sd[keep[k]];
    return out;
}

double mean_diff_norm(const MatX& pooled, const std::vector<int>& labels, int na) {
    const int d = int(pooled.cols());
    VecX ma = VecX::Zero(d), mb = VecX::Zero(d);
    int ca = 0, cb = 0;
    for (int i = 0; i < int(labels.size()); ++i) {
        if (labels[i] == 0) {
            ma += pooled.row(i).transpose();
            ++ca;
        } else {
            mb += pooled.row(i).transpose();
            ++cb;
        }
    }
    (void)na;
    return (ma / std::max(ca, 1) - mb / std::max(cb, 1)).norm();
}

}  // namespace

namespace {

// canonical row order so that swapping the two cohorts changes only the
// label complement; the statistic depends on the partition alone, which
// makes the test exactly label-symmetric under a fixed seed
void sort_rows_with_labels(MatX& x, std::vector<int>& labels) {
    std::vector<int> order(x.rows());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        for (int c = 0; c < x.cols(); ++c) {
            if (x(i, c) < x(j, c)) return true;
            if (x(i, c) > x(j, c)) return false;
        }
        return labels[i] < labels[j];
    });
    MatX xs(x.rows(), x.cols());
    std::vector<int> ls(labels.size());
    for (int r = 0; r < int(order.size()); ++r) {
        xs.row(r) = x.row(order[r]);
        ls[r] = labels[order[r]];
    }
    x = std::move(xs);
    labels = std::move(ls);
}

}  // namespace

GlobalTest global_test(const MatX& a, const MatX& b, int permutations, std::uint64_t seed) {
    if (a.rows() < 5 || b.rows() < 5)
        throw Error("stats", "both cohorts need at least 5 members");
    if (a.cols() != b.cols()) throw Error("stats", "feature dimension mismatch");
    if (permutations < 1) throw Error("stats", "need at least 1 permutation");

    GlobalTest result;
    result.permutations = permutations;
    MatX pooled = standardize_pooled(a, b, result.dropped_features);
    const int na = int(a.rows()), n = int(pooled.rows());

    std::vector<int> labels(n, 1);
    std::fill(labels.begin(), labels.begin() + na, 0);
    sort_rows_with_labels(pooled, labels);
    result.statistic = mean_diff_norm(pooled, labels, na);

    Rng rng(seed);
    double null_sum = 0, null_sq = 0;
    int greater_eq = 0;
    std::vector<int> perm = labels;
    for (int p = 0; p < permutations; ++p) {
        rng.shuffle(perm);
        const double stat = mean_diff_norm(pooled, perm, na);
        null_sum += stat;
        null_sq += stat * stat;
        if (stat >= result.statistic) ++greater_eq;
    }
    result.p_value = double(1 + greater_eq) / double(permutations + 1);
    const double null_mean = null_sum / permutations;
    const double null_var = std::max(0.0, null_sq / permutations - null_mean * null_mean);
    result.z_score =
        null_var > 0 ? (result.statistic - null_mean) / std::sqrt(null_var) : 0.0;
    return result;
}

namespace {

double permutation_p(const MatX& xa, const MatX& xb, int permutations, Rng rng) {
    const int na = int(xa.rows()), nb = int(xb.rows());
    MatX pooled(na + nb, xa.cols());
    pooled.topRows(na) = xa;
    pooled.bottomRows(nb) = xb;
    std::vector<int> labels(na + nb, 1);
    std::fill(labels.begin(), labels.begin() + na, 0);
    sort_rows_with_labels(pooled, labels);
    const double obs = mean_diff_norm(pooled, labels, na);
    int ge = 0;
    for (int p = 0; p < permutations; ++p) {
        rng.shuffle(labels);
        if (mean_diff_norm(pooled, labels, na) >= obs) ++ge;
    }
    return double(1 + ge) / double(permutations + 1);
}

// two-sample Hotelling T^2 against the F reference; false when the pooled
// covariance is ill-conditioned
bool hotelling_p(const MatX& xa, const MatX& xb, double& p_out) {
    const int p = int(xa.cols());
    const int na = int(xa.rows()), nb = int(xb.rows());
    if (na + nb - p - 1 <= 0) return false;
    const VecX ma = xa.colwise().mean(), mb = xb.colwise().mean();
    MatX ca = xa.rowwise() - ma.transpose(), cb = xb.rowwise() - mb.transpose();
    const MatX pooled_cov =
        (ca.transpose() * ca + cb.transpose() * cb) / double(na + nb - 2);

    Eigen::SelfAdjointEigenSolver<MatX> eig(pooled_cov);
    const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0) || hi / lo > 1e8) return false;

    const VecX d = ma - mb;
    const double t2 = double(na) * nb / (na + nb) * d.dot(pooled_cov.ldlt().solve(d));
    const double f_stat = t2 * (na + nb - p - 1) / (double(p) * (na + nb - 2));
    p_out = f_upper_tail(f_stat, p, na + nb - p - 1);
    return true;
}

double t_test_p(const VecX& a, const VecX& b) {
    const int na = int(a.size()), nb = int(b.size());
    const double ma = a.mean(), mb = b.mean();
    const double va = (a.array() - ma).square().sum();
    const double vb = (b.array() - mb).square().sum();
    const double sp2 = (va + vb) / (na + nb - 2);
    if (!(sp2 > 0)) return 1.0;
    const double t = (ma - mb) / std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
    return student_t_p_two_sided(t, na + nb - 2);
}

}  // namespace

PartialTests partial_tests(const FeatureMatrix& a, const FeatureMatrix& b, PartialMethod method,
                           int permutations, std::uint64_t seed) {
    if (a.gops.size() != b.gops.size()) throw Error("stats", "GOP map mismatch");
    if (a.x.rows() < 5 || b.x.rows() < 5)
        throw Error("stats", "both cohorts need at least 5 members");

    PartialTests out;
    out.gops = a.gops;
    out.raw_p.resize(a.gops.size());
    out.fallback.assign(a.gops.size(), 0);

    Rng root(seed);
    for (std::size_t k = 0; k < a.gops.size(); ++k) {
        const auto& gop = a.gops[k];
        const MatX xa = a.x.middleCols(gop.col_begin, gop.dim);
        const MatX xb = b.x.middleCols(gop.col_begin, gop.dim);
        if (method == PartialMethod::Permutation) {
            out.raw_p[k] = permutation_p(xa, xb, permutations, root.fork(k));
            continue;
        }
        if (gop.dim == 1) {
            out.raw_p[k] = t_test_p(xa.col(0), xb.col(0));
        } else {
            double p = 1;
            if (hotelling_p(xa, xb, p)) {
                out.raw_p[k] = p;
            } else {
                out.raw_p[k] = permutation_p(xa, xb, permutations, root.fork(k));
                out.fallback[k] = 1;
            }
        }
    }
    return out;
}

BhResult bh_adjust(const std::vector<double>& p, double fdr) {
    const int m = int(p.size());
    BhResult out;
    out.adjusted.resize(m);
    out.significant.assign(m, 0);
    if (m == 0) return out;
    for (double v : p)
        if (!(v >= 0 && v <= 1)) throw Error("stats", "p-values must lie in [0,1]");

    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return p[i] < p[j]; });

    double running = 1.0;
    for (int rank = m; rank >= 1; --rank) {
        const int idx = order[rank - 1];
        running = std::min(running, p[idx] * m / rank);
        out.adjusted[idx] = running;
    }
    for (int i = 0; i < m; ++i) out.significant[i] = out.adjusted[i] <= fdr;
    return out;
}

TestReport run_test_suite(const std::vector<LpDssRep>& a, const std::vector<LpDssRep>& b,
                          int permutations, std::uint64_t seed, double alpha, double fdr,
                          PartialMethod method) {
    std::vector<LpDssRep> all(a);
    all.insert(all.end(), b.begin(), b.end());
    const auto cohort = euclideanize(all);

    EuclideanizedCohort ca, cb;
    ca.n_f = cb.n_f = cohort.n_f;
    ca.n_c = cb.n_c = cohort.n_c;
    ca.reps.assign(cohort.reps.begin(), cohort.reps.begin() + a.size());
    cb.reps.assign(cohort.reps.begin() + a.size(), cohort.reps.end());

    const auto fa = vectorize(ca);
    const auto fb = vectorize(cb);

    TestReport report;
    report.alpha = alpha;
    report.fdr = fdr;
    report.global = global_test(fa.x, fb.x, permutations, seed);
    report.partial = partial_tests(fa, fb, method, permutations, seed + 1);
    report.bh = bh_adjust(report.partial.raw_p, fdr);
    return report;
}

void save_test_report_json(const TestReport& report, const std::string& path) {
    nlohmann::json j;
    j["global"] = {{"statistic", report.global.statistic},
                   {"z_score", report.global.z_score},
                   {"p_value", report.global.p_value},
                   {"permutations", report.global.permutations},
                   {"dropped_features", report.global.dropped_features},
                   {"direction_rule", report.global.direction_rule}};
    j["alpha"] = report.alpha;
    j["fdr"] = report.fdr;
    j["partial"] = nlohmann::json::array();
    for (std::size_t k = 0; k < report.partial.raw_p.size(); ++k) {
        const auto& g = report.partial.gops[k];
        j["partial"].push_back({{"gop", int(k)},
                                {"kind", to_string(g.kind)},
                                {"index", g.index},
                                {"raw_p", report.partial.raw_p[k]},
                                {"adjusted_p", report.bh.adjusted[k]},
                                {"significant", bool(report.bh.significant[k])},
                                {"fallback", bool(report.partial.fallback[k])}});
    }
    std::ofstream out(path);
    if (!out) throw Error("stats", "cannot write " + path);
    out << j.dump(1) << '\n';
}

void save_gop_significance_csv(const TestReport& report, const LpDssRep& exemplar,
                               const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("stats", "cannot write " + path);
    out << "gop,kind,index,station,side,slot,raw_p,adjusted_p,significant\n";
    for (std::size_t k = 0; k < report.partial.raw_p.size(); ++k) {
        const auto& g = report.partial.gops[k];
        int frame = -1;
        if (g.kind == GopKind::Frame || g.kind == GopKind::SpokeDir ||
            g.kind == GopKind::SpokeLenPair)
            frame = g.index;
        else
            frame = exemplar.connection_child[g.index];
        out << k << ',' << to_string(g.kind) << ',' << g.index << ','
            << exemplar.site_station[frame] << ',' << exemplar.site_side[frame] << ','
            << exemplar.site_slot[frame] << ',' << report.partial.raw_p[k] << ','
            << report.bh.adjusted[k] << ',' << int(report.bh.significant[k]) << '\n';
    }
}

// ------------------------------------------------------------ classification

namespace {

struct Fold {
    std::vector<int> train, test;  // row indices into the pooled matrix
};

std::vector<Fold> stratified_folds(int na, int nb, int folds, Rng& rng) {
    std::vector<int> ia(na), ib(nb);
    std::iota(ia.begin(), ia.end(), 0);
    std::iota(ib.begin(), ib.end(), na);
    rng.shuffle(ia);
    rng.shuffle(ib);

    std::vector<Fold> out(folds);
    std::vector<std::vector<int>> buckets(folds);
    for (int i = 0; i < na; ++i) buckets[i % folds].push_back(ia[i]);
    for (int i = 0; i < nb; ++i) buckets[i % folds].push_back(ib[i]);
    for (int f = 0; f < folds; ++f) {
        out[f].test = buckets[f];
        for (int g = 0; g < folds; ++g)
            if (g != f)
                out[f].train.insert(out[f].train.end(), buckets[g].begin(), buckets[g].end());
    }
    return out;
}

}  // namespace

ClassifyResult classify_cv(const MatX& a, const MatX& b, Classifier method, int folds,
                           std::uint64_t seed) {
    const int na = int(a.rows()), nb = int(b.rows());
    if (na < folds || nb < folds)
        throw Error("stats", "each cohort needs at least `folds` members");
    if (a.cols() != b.cols()) throw Error("stats", "feature dimension mismatch");

    MatX pooled(na + nb, a.cols());
    pooled.topRows(na) = a;
    pooled.bottomRows(nb) = b;
    auto label_of = [&](int row) { return row < na ? 0 : 1; };

    Rng rng(seed);
    auto fold_list = stratified_folds(na, nb, folds, rng);

    long tp = 0, tn = 0, fp = 0, fn = 0;  // class 0 = positive
    for (const auto& fold : fold_list) {
        // per-fold standardization from the training rows
        VecX mean = VecX::Zero(pooled.cols()), sd = VecX::Zero(pooled.cols());
        for (int r : fold.train) mean += pooled.row(r).transpose();
        mean /= double(fold.train.size());
        for (int r : fold.train)
            sd += (pooled.row(r).transpose() - mean).array().square().matrix();
        sd = (sd / std::max<double>(1, double(fold.train.size()) - 1)).array().sqrt();
        for (int c = 0; c < sd.size(); ++c)
            if (sd[c] < 1e-12) sd[c] = 1.0;
        auto feat = [&](int row) {
            return VecX(((pooled.row(row).transpose() - mean).array() / sd.array()).matrix());
        };

        std::array<std::vector<int>, 2> by_class;
        for (int r : fold.train) by_class[label_of(r)].push_back(r);

        // Gaussian naive Bayes statistics
        std::array<VecX, 2> nb_mean, nb_var;
        if (method == Classifier::NaiveBayes) {
            for (int cls = 0; cls < 2; ++cls) {
                nb_mean[cls] = VecX::Zero(pooled.cols());
                for (int r : by_class[cls]) nb_mean[cls] += feat(r);
                nb_mean[cls] /= double(by_class[cls].size());
                nb_var[cls] = VecX::Constant(pooled.cols(), 1e-9);
                for (int r : by_class[cls])
                    nb_var[cls] += (feat(r) - nb_mean[cls]).array().square().matrix();
                nb_var[cls] /= std::max<double>(1, double(by_class[cls].size()) - 1);
            }
        }

        for (int r : fold.test) {
            const VecX x = feat(r);
            int predicted;
            if (method == Classifier::Knn) {
                std::vector<std::pair<double, int>> dist;
                for (int t : fold.train) dist.push_back({(feat(t) - x).squaredNorm(), t});
                std::partial_sort(dist.begin(), dist.begin() + std::min<std::size_t>(5, dist.size()),
                                  dist.end());
                int votes = 0;
                const int k = int(std::min<std::size_t>(5, dist.size()));
                for (int i = 0; i < k; ++i) votes += label_of(dist[i].second);
                predicted = votes * 2 > k ? 1 : 0;
            } else {
                double score[2];
                for (int cls = 0; cls < 2; ++cls) {
                    score[cls] =
                        std::log(double(by_class[cls].size()) / fold.train.size());
                    for (int c = 0; c < x.size(); ++c) {
                        const double v = std::max(nb_var[cls][c], 1e-9);
                        const double d = x[c] - nb_mean[cls][c];
                        score[cls] += -0.5 * (std::log(2 * M_PI * v) + d * d / v);
                    }
                }
                predicted = score[1] > score[0] ? 1 : 0;
            }
            const int truth = label_of(r);
            if (truth == 0 && predicted == 0) ++tp;
            if (truth == 0 && predicted == 1) ++fn;
            if (truth == 1 && predicted == 1) ++tn;
            if (truth == 1 && predicted == 0) ++fp;
        }
    }

    ClassifyResult result;
    result.folds = folds;
    const double total = double(tp + tn + fp + fn);
    result.accuracy = (tp + tn) / total;
    const double p_yes = double(tp + fn) / total * double(tp + fp) / total;
    const double p_no = double(tn + fp) / total * double(tn + fn) / total;
    const double pe = p_yes + p_no;
    result.kappa = pe < 1.0 ? (result.accuracy - pe) / (1.0 - pe) : 0.0;
    result.sensitivity = tp + fn > 0 ? double(tp) / (tp + fn) : 0.0;
    result.specificity = tn + fp > 0 ? double(tn) / (tn + fp) : 0.0;
    return result;
}

void save_classify_json(const ClassifyResult& result, const std::string& path) {
    nlohmann::json j{{"accuracy", result.accuracy},
                     {"kappa", result.kappa},
                     {"sensitivity", result.sensitivity},
                     {"specificity", result.specificity},
                     {"folds", result.folds}};
    std::ofstream out(path);
    if (!out) throw Error("stats", "cannot write " + path);
    out << j.dump(1) << '\n';
}

}  // namespace dss
