#include <dss/gof.hpp>

#include <dss/kdtree.hpp>
#include <dss/voxel.hpp>

#include <fstream>
#include <sstream>

namespace dss {

double volume_coverage_points(const TriangleMesh& mesh, const std::vector<Vec3>& implied,
                              int resolution) {
    if (implied.size() < 40)
        throw Error("gof", "need at least 40 implied boundary points, got " +
                               std::to_string(implied.size()));
    const KdTree3 tree(implied);
    std::vector<Vec3> collapsed;
    collapsed.reserve(mesh.vertex_count());
    for (const auto& v : mesh.vertices())
        collapsed.push_back(tree.points()[tree.nearest(v).first]);
    const auto implied_mesh = TriangleMesh::build_unchecked(collapsed, mesh.faces());
    return jaccard_volume(mesh, implied_mesh, resolution);
}

double volume_coverage(const TriangleMesh& mesh, const SweptModel& model, int resolution) {
    std::vector<Vec3> implied;
    for (const auto& site : model.spokes.sites) {
        implied.push_back(site.tip_up);
        implied.push_back(site.tip_down);
    }
    for (const auto& sec : model.sections) {
        implied.push_back(sec.vein_right.back());
        implied.push_back(sec.vein_left.back());
    }
    implied.push_back(model.spine.points.front());
    implied.push_back(model.spine.points.back());
    return volume_coverage_points(mesh, implied, resolution);
}

double skeletal_symmetry(const std::vector<double>& up, const std::vector<double>& down,
                         const std::vector<double>& vein_right,
                         const std::vector<double>& vein_left) {
    if (up.size() != down.size() || vein_right.size() != vein_left.size())
        throw Error("gof", "unpaired symmetry inputs");
    std::vector<double> plus(up), minus(down);
    plus.insert(plus.end(), vein_right.begin(), vein_right.end());
    minus.insert(minus.end(), vein_left.begin(), vein_left.end());
    if (plus.empty()) throw Error("gof", "empty symmetry inputs");

    double total = 0;
    for (std::size_t i = 0; i < plus.size(); ++i) {
        if (!(plus[i] > 0) || !(minus[i] > 0)) throw Error("gof", "zero-length element");
        total += plus[i] + minus[i];
    }
    double sum = 0;
    for (std::size_t i = 0; i < plus.size(); ++i) {
        const double w = (plus[i] + minus[i]) / total;
        const double f = std::min(plus[i], minus[i]) / std::max(plus[i], minus[i]);
        sum += w * f;
    }
    return sum;
}

double skeletal_symmetry(const LpDssRep& rep, const SweptModel& model) {
    return skeletal_symmetry(rep.spoke_lens_up, rep.spoke_lens_down, model.vein_len_right,
                             model.vein_len_left);
}

namespace {

double quaternion_distance(const Mat3& a, const Mat3& b) {
    const Quat qa(a), qb(b);
    return safe_acos(std::abs(qa.dot(qb)));
}

// mean and max consecutive frame rotation along one curve
std::pair<double, double> curve_perturbation(const std::vector<Mat3>& frames) {
    if (frames.size() < 2) throw Error("gof", "need at least 2 frames per curve");
    double sum = 0, worst = 0;
    for (std::size_t i = 1; i < frames.size(); ++i) {
        const double d = quaternion_distance(frames[i - 1], frames[i]);
        sum += d;
        worst = std::max(worst, d);
    }
    return {sum / double(frames.size() - 1), worst};
}

}  // namespace

Tidiness tidiness(const StationFrames& frames) {
    const int n = int(frames.sections.size());
    const auto [spine_mean, spine_worst] = curve_perturbation(frames.spine);

    double sum = spine_mean;
    double worst = spine_worst;
    for (const auto& section : frames.sections) {
        const auto [mean, w] = curve_perturbation(section);
        sum += mean;
        worst = std::max(worst, w);
    }
    for (double d : frames.rotation_offsets) {
        sum += d;
        worst = std::max(worst, d);
    }
    if (int(frames.rotation_offsets.size()) != n)
        throw Error("gof", "rotation offsets do not match section count");

    Tidiness t;
    t.average = 1.0 - 2.0 / ((2.0 * n + 1.0) * M_PI) * sum;
    t.strict = 1.0 - 2.0 / M_PI * worst;
    return t;
}

GofReport gof_score(const GofComponents& c) {
    auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in01(c.volume_coverage) || !in01(c.skeletal_symmetry) || !in01(c.avg_tidiness) ||
        !in01(c.strict_tidiness))
        throw Error("gof", "component out of range [0,1]");
    GofReport r;
    r.volume_coverage = c.volume_coverage;
    r.skeletal_symmetry = c.skeletal_symmetry;
    r.avg_tidiness = c.avg_tidiness;
    r.strict_tidiness = c.strict_tidiness;
    r.score1 = c.volume_coverage * c.skeletal_symmetry * c.avg_tidiness;
    r.score2 = c.volume_coverage * c.skeletal_symmetry * c.strict_tidiness;
    return r;
}

GofReport evaluate_fit(const TriangleMesh& mesh, const SweptModel& model, const LpDssRep& rep,
                       int jaccard_resolution) {
    GofComponents c;
    c.volume_coverage = volume_coverage(mesh, model, jaccard_resolution);
    c.skeletal_symmetry = skeletal_symmetry(rep, model);
    const Tidiness t = tidiness(model.frames);
    c.avg_tidiness = std::max(0.0, t.average);
    c.strict_tidiness = std::max(0.0, t.strict);
    GofReport r = gof_score(c);
    r.sheet_degree = model.sheet.degree;
    r.spine_degree = model.spine.degree;
    r.rcc_pass = model.rcc.pass();
    return r;
}

void save_gof_csv(const std::vector<GofReport>& reports, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("gof", "cannot write " + path);
    out << "sheet_degree,spine_degree,volume_coverage,skeletal_symmetry,avg_tidiness,"
           "strict_tidiness,score1,score2,rcc_pass\n";
    out.precision(6);
    for (const auto& r : reports)
        out << r.sheet_degree << ',' << r.spine_degree << ',' << r.volume_coverage << ','
            << r.skeletal_symmetry << ',' << r.avg_tidiness << ',' << r.strict_tidiness << ','
            << r.score1 << ',' << r.score2 << ',' << (r.rcc_pass ? 1 : 0) << '\n';
}

std::string format_gof_table(const std::vector<GofReport>& reports) {
    std::ostringstream out;
    out << "degrees  coverage  symmetry  tidy(avg)  tidy(strict)  score1  score2  rcc\n";
    char line[160];
    for (const auto& r : reports) {
        std::snprintf(line, sizeof line, "%d, %d     %.3f     %.3f     %.3f      %.3f         %.3f   %.3f   %s\n",
                      r.sheet_degree, r.spine_degree, r.volume_coverage, r.skeletal_symmetry,
                      r.avg_tidiness, r.strict_tidiness, r.score1, r.score2,
                      r.rcc_pass ? "ok" : "fail");
        out << line;
    }
    return out.str();
}

}  // namespace dss
